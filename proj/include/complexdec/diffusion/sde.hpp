// sde.hpp
// Ornstein-Uhlenbeck variance-exploding forward SDE of the post-filter:
//   dx_t = gamma (x_hat - x_t) dt + g(t) dw,
//   g(t) = sigma_min (sigma_max/sigma_min)^t sqrt(2 log(sigma_max/sigma_min)).
// The linear drift gives a Gaussian perturbation kernel in closed form.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace complexdec::diffusion {

struct SdeConfig {
    float gamma = 1.5f;
    float sigma_min = 0.05f;
    float sigma_max = 0.5f;
    float T = 1.0f;
    float t_eps = 0.03f;
    int n_steps = 30;
    float snr = 0.5f;

    void validate() const {
        if (!(0.f < sigma_min && sigma_min < sigma_max))
            throw std::invalid_argument("SdeConfig: require 0 < sigma_min < sigma_max");
        if (!(0.f < t_eps && t_eps < T))
            throw std::invalid_argument("SdeConfig: require 0 < t_eps < T");
        if (n_steps < 1) throw std::invalid_argument("SdeConfig: n_steps must be >= 1");
        if (gamma <= 0.f) throw std::invalid_argument("SdeConfig: gamma must be > 0");
        if (snr <= 0.f) throw std::invalid_argument("SdeConfig: snr must be > 0");
    }
};

// gamma (x_hat - x_t)
Eigen::MatrixXcf drift(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& x_hat,
                       const SdeConfig& cfg);

// Strictly increasing on [0, T].
float diffusion_coeff(float t, const SdeConfig& cfg);

// Closed-form moments of x_t | (x0, x_hat), from variation of constants:
//   mean(t)  = x_hat + e^{-gamma t} (x0 - x_hat)
//   sigma(t)^2 = sigma_min^2 log(k) / (gamma + log k) * (k^{2t} - e^{-2 gamma t}),
// with k = sigma_max/sigma_min.
struct PerturbationKernel {
    Eigen::MatrixXcf mean;
    float sigma;
};
PerturbationKernel perturbation_kernel(const Eigen::MatrixXcf& x0, const Eigen::MatrixXcf& x_hat,
                                       float t, const SdeConfig& cfg);
float kernel_sigma(float t, const SdeConfig& cfg);

// x_t = mean + sigma z.
Eigen::MatrixXcf sample_xt(const Eigen::MatrixXcf& x0, const Eigen::MatrixXcf& x_hat, float t,
                           const Eigen::MatrixXcf& z, const SdeConfig& cfg);

// Gaussian score -(x_t - mean)/sigma^2; throws for sigma == 0.
Eigen::MatrixXcf true_score(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& mean,
                            float sigma);

}  // namespace complexdec::diffusion
