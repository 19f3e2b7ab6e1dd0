// losses.hpp
// Generator objective: complex spectral MSE/MAE, multi-resolution mel loss,
// commitment term, and the weighted total. All reductions are per-element
// means so the configured weights transfer across batch sizes.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "complexdec/config.hpp"
#include "complexdec/dsp/mel.hpp"
#include "complexdec/dsp/stft.hpp"

namespace complexdec::losses {

struct LossReport {
    float vq = 0.f;
    float mel = 0.f;
    float mse = 0.f;
    float mae = 0.f;
    float total = 0.f;

    std::string to_json_line(int step) const;
};

// Eq-style complex MSE: (mean(dr^2) + mean(di^2)) / 2.
float complex_mse(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat);
// d loss / d x_hat, packed as dRe + i dIm.
Eigen::MatrixXcf complex_mse_backward(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat);

// Mean complex modulus of the error.
float complex_mae(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat);
Eigen::MatrixXcf complex_mae_backward(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat);

struct MelLossConfig {
    std::vector<int> hops = {50, 120, 240};
    std::vector<int> fft_sizes = {512, 1024, 2048};
    int n_mels = 80;
    float fmin = 0.0f;
    float fmax = 24000.0f;
    float log_floor = 1e-5f;  // clamp before log10

    std::vector<dsp::MelConfig> resolutions(int sample_rate) const;
};

// Mean over resolutions of mean |log10 mel(x) - log10 mel(x_hat)|.
float multires_mel_loss(const dsp::WaveSegment& wave, const dsp::WaveSegment& wave_hat,
                        const MelLossConfig& cfg = {});
// d loss / d wave_hat samples.
std::vector<float> multires_mel_loss_backward(const dsp::WaveSegment& wave,
                                              const dsp::WaveSegment& wave_hat,
                                              const MelLossConfig& cfg = {});

// Weighted sum; throws (naming the offending term) on non-finite inputs.
LossReport total_loss(float vq, float mel, float mse, float mae, const LossWeights& weights);

}  // namespace complexdec::losses
