#include "complexdec/dsp/mel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace complexdec::dsp {

namespace {

float hz_to_mel(float hz) { return 2595.0f * std::log10(1.0f + hz / 700.0f); }
float mel_to_hz(float mel) { return 700.0f * (std::pow(10.0f, mel / 2595.0f) - 1.0f); }

}  // namespace

void MelConfig::validate() const {
    if (n_mels <= 0) throw std::invalid_argument("MelConfig: n_mels must be > 0");
    if (hop <= 0 || hop >= fft_size) throw std::invalid_argument("MelConfig: require 0 < hop < fft_size");
    if (fmin < 0.f || fmax <= fmin) throw std::invalid_argument("MelConfig: require 0 <= fmin < fmax");
    if (sample_rate <= 0) throw std::invalid_argument("MelConfig: sample_rate must be > 0");
}

Eigen::MatrixXf mel_filterbank(const MelConfig& cfg) {
    cfg.validate();
    const int bins = cfg.fft_size / 2 + 1;
    const float mel_lo = hz_to_mel(cfg.fmin);
    const float mel_hi = hz_to_mel(std::min(cfg.fmax, float(cfg.sample_rate) / 2.0f));

    // n_mels + 2 band edges, evenly spaced in mel.
    std::vector<float> edges_hz(cfg.n_mels + 2);
    for (int m = 0; m < cfg.n_mels + 2; ++m)
        edges_hz[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * float(m) / float(cfg.n_mels + 1));

    Eigen::MatrixXf fb = Eigen::MatrixXf::Zero(cfg.n_mels, bins);
    const float bin_hz = float(cfg.sample_rate) / float(cfg.fft_size);
    for (int m = 0; m < cfg.n_mels; ++m) {
        const float lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
        for (int k = 0; k < bins; ++k) {
            const float f = k * bin_hz;
            if (f <= lo || f >= hi) continue;
            fb(m, k) = f < mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
        }
    }
    return fb;
}

Eigen::MatrixXf mel_spectrogram(const WaveSegment& wave, const MelConfig& cfg) {
    cfg.validate();
    if (wave.length() < cfg.hop)
        throw std::invalid_argument("mel_spectrogram: wave shorter than one frame");
    const ComplexSpectrogram spec = stft(wave, cfg.hop, cfg.fft_size);
    return mel_filterbank(cfg) * spec.data.cwiseAbs();
}

}  // namespace complexdec::dsp
