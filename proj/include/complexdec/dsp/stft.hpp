// stft.hpp
// STFT / inverse STFT with reflect-padded centered frames and
// normalized weighted overlap-add reconstruction.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

#include "complexdec/config.hpp"

namespace complexdec::dsp {

struct WaveSegment {
    std::vector<float> samples;  // nominally in [-1, 1]
    int sample_rate = 48000;

    int length() const { return int(samples.size()); }
};

enum class WindowType { Hann };

// Complex spectrogram stored bins x frames (column = one frame) so a frame
// is contiguous. F = fft_size/2 + 1.
struct ComplexSpectrogram {
    Eigen::MatrixXcf data;  // bins x frames
    int hop = 320;
    int fft_size = 510;
    WindowType window = WindowType::Hann;
    int sample_rate = 48000;

    int bins() const { return int(data.rows()); }
    int frames() const { return int(data.cols()); }
};

// Periodic Hann, w[n] = 0.5 (1 - cos(2 pi n / N)).
std::vector<float> hann_window(int n);

// Centered frames: reflect pad fft_size/2 on both ends, frame t starts at
// sample t*hop of the padded signal, giving ceil(len/hop) frames.
ComplexSpectrogram stft(const WaveSegment& wave, int hop, int fft_size,
                        WindowType window = WindowType::Hann);

// Normalized overlap-add inverse; throws if the window/hop pair leaves any
// sample uncovered (NOLA violated). Output cropped/zero-padded to
// target_length.
WaveSegment istft(const ComplexSpectrogram& spec, int target_length);

// Adjoints of the two linear maps above, used by the mel-loss backward
// path. stft_adjoint maps spectrogram-domain gradients to an input-length
// gradient; istft_adjoint maps waveform gradients back to the spectrogram.
std::vector<float> stft_adjoint(const Eigen::MatrixXcf& dspec, int input_length, int hop,
                                int fft_size);
Eigen::MatrixXcf istft_adjoint(const std::vector<float>& dwave, int frames, int hop, int fft_size,
                               int target_length);

}  // namespace complexdec::dsp
