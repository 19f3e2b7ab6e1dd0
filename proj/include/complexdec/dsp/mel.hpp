// mel.hpp
// Mel filterbank analysis for the multi-resolution mel loss.

#pragma once

#include <Eigen/Dense>

#include "complexdec/dsp/stft.hpp"

namespace complexdec::dsp {

struct MelConfig {
    int n_mels = 80;
    int hop = 240;
    int fft_size = 2048;
    float fmin = 0.0f;
    float fmax = 24000.0f;
    int sample_rate = 48000;

    void validate() const;
};

// Triangular filters (peak 1) on the HTK mel scale, n_mels x bins.
// Unnormalized triangles keep sum over filters <= 1 per bin, so total mel
// energy never exceeds total spectral energy.
Eigen::MatrixXf mel_filterbank(const MelConfig& cfg);

// Linear mel magnitudes, n_mels x frames: filterbank applied to |STFT|.
// Log compression is the caller's business (the loss clamps at its floor).
Eigen::MatrixXf mel_spectrogram(const WaveSegment& wave, const MelConfig& cfg);

}  // namespace complexdec::dsp
