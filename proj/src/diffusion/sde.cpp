#include "complexdec/diffusion/sde.hpp"

#include <cmath>

namespace complexdec::diffusion {

Eigen::MatrixXcf drift(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& x_hat,
                       const SdeConfig& cfg) {
    if (x_t.rows() != x_hat.rows() || x_t.cols() != x_hat.cols())
        throw std::invalid_argument("drift: shape mismatch");
    return cfg.gamma * (x_hat - x_t);
}

float diffusion_coeff(float t, const SdeConfig& cfg) {
    cfg.validate();
    if (t < 0.f || t > cfg.T) throw std::invalid_argument("diffusion_coeff: t outside [0, T]");
    const float log_ratio = std::log(cfg.sigma_max / cfg.sigma_min);
    return cfg.sigma_min * std::pow(cfg.sigma_max / cfg.sigma_min, t) *
           std::sqrt(2.f * log_ratio);
}

float kernel_sigma(float t, const SdeConfig& cfg) {
    if (t < 0.f) throw std::invalid_argument("kernel_sigma: t must be >= 0");
    const double k = double(cfg.sigma_max) / double(cfg.sigma_min);
    const double logk = std::log(k);
    const double var = double(cfg.sigma_min) * double(cfg.sigma_min) * logk /
                       (double(cfg.gamma) + logk) *
                       (std::pow(k, 2.0 * t) - std::exp(-2.0 * double(cfg.gamma) * t));
    return float(std::sqrt(std::max(var, 0.0)));
}

PerturbationKernel perturbation_kernel(const Eigen::MatrixXcf& x0, const Eigen::MatrixXcf& x_hat,
                                       float t, const SdeConfig& cfg) {
    cfg.validate();
    if (t < 0.f) throw std::invalid_argument("perturbation_kernel: t must be >= 0");
    if (x0.rows() != x_hat.rows() || x0.cols() != x_hat.cols())
        throw std::invalid_argument("perturbation_kernel: shape mismatch");
    PerturbationKernel pk;
    const float decay = std::exp(-cfg.gamma * t);
    pk.mean = x_hat + decay * (x0 - x_hat);
    pk.sigma = kernel_sigma(t, cfg);
    return pk;
}

Eigen::MatrixXcf sample_xt(const Eigen::MatrixXcf& x0, const Eigen::MatrixXcf& x_hat, float t,
                           const Eigen::MatrixXcf& z, const SdeConfig& cfg) {
    const PerturbationKernel pk = perturbation_kernel(x0, x_hat, t, cfg);
    return pk.mean + pk.sigma * z;
}

Eigen::MatrixXcf true_score(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& mean,
                            float sigma) {
    if (sigma <= 0.f) throw std::invalid_argument("true_score: sigma must be > 0");
    if (x_t.rows() != mean.rows() || x_t.cols() != mean.cols())
        throw std::invalid_argument("true_score: shape mismatch");
    return -(x_t - mean) / (sigma * sigma);
}

}  // namespace complexdec::diffusion
