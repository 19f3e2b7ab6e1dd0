#include "complexdec/diffusion/sampler.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace complexdec::diffusion {

namespace {

Eigen::MatrixXcf normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<float> dist(0.f, 1.f);
    Eigen::MatrixXcf z(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = {dist(rng), dist(rng)};
    return z;
}

double cnorm(const Eigen::MatrixXcf& m) {
    return std::sqrt(double(m.squaredNorm()));  // over both real channels
}

}  // namespace

Eigen::MatrixXcf pc_sample(const ScoreFn& score, const Eigen::MatrixXcf& x_hat,
                           const SdeConfig& cfg, uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    const float h = (cfg.T - cfg.t_eps) / float(cfg.n_steps);

    Eigen::MatrixXcf x =
        x_hat + kernel_sigma(cfg.T, cfg) * normal_matrix(x_hat.rows(), x_hat.cols(), rng);

    for (int i = 0; i < cfg.n_steps; ++i) {
        const float t = cfg.T - float(i) * h;
        const float t_next = t - h;

        // Reverse-diffusion predictor: x <- x - h f + h g^2 s + g sqrt(h) z.
        const float g = diffusion_coeff(t, cfg);
        const Eigen::MatrixXcf s = score(x, x_hat, t);
        const Eigen::MatrixXcf z = normal_matrix(x.rows(), x.cols(), rng);
        x += -h * drift(x, x_hat, cfg) + (h * g * g) * s + (g * std::sqrt(h)) * z;

        // Annealed Langevin corrector at the new time, step size from the
        // SNR rule eps = 2 (snr ||z|| / ||s||)^2.
        const Eigen::MatrixXcf s2 = score(x, x_hat, t_next);
        const Eigen::MatrixXcf z2 = normal_matrix(x.rows(), x.cols(), rng);
        const double s_norm = cnorm(s2);
        if (s_norm > 0.0) {
            const double eps = 2.0 * std::pow(double(cfg.snr) * cnorm(z2) / s_norm, 2.0);
            x += float(eps) * s2 + float(std::sqrt(2.0 * eps)) * z2;
        }
    }
    return x;
}

float score_matching_loss(const ScoreFn& score, const Eigen::MatrixXcf& x0,
                          const Eigen::MatrixXcf& x_hat, const std::vector<TimeNoise>& batch,
                          const SdeConfig& cfg) {
    cfg.validate();
    if (batch.empty()) throw std::invalid_argument("score_matching_loss: empty batch");
    double total = 0.0;
    for (const TimeNoise& tn : batch) {
        if (tn.t < cfg.t_eps || tn.t > cfg.T)
            throw std::invalid_argument("score_matching_loss: t outside [t_eps, T]");
        const PerturbationKernel pk = perturbation_kernel(x0, x_hat, tn.t, cfg);
        const Eigen::MatrixXcf x_t = pk.mean + pk.sigma * tn.z;
        const Eigen::MatrixXcf s = score(x_t, x_hat, tn.t);
        if (!s.allFinite()) throw std::runtime_error("score_matching_loss: non-finite score");
        total += double((s + tn.z / pk.sigma).squaredNorm());
    }
    return float(total / double(batch.size()));
}

}  // namespace complexdec::diffusion
