// sampler.hpp
// Predictor-corrector integration of the reverse SDE: reverse-diffusion
// predictor steps from t = T down to t_eps, each followed by one annealed
// Langevin corrector step.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "complexdec/diffusion/sde.hpp"

namespace complexdec::diffusion {

// Score estimate at (x_t, conditioner, t); complex matrices carry the two
// real channels.
using ScoreFn = std::function<Eigen::MatrixXcf(const Eigen::MatrixXcf& x_t,
                                               const Eigen::MatrixXcf& x_hat, float t)>;

// Deterministic given the seed. Starts from x_T = x_hat + sigma(T) z.
Eigen::MatrixXcf pc_sample(const ScoreFn& score, const Eigen::MatrixXcf& x_hat,
                           const SdeConfig& cfg, uint64_t seed);

// Eq-style score-matching objective: mean over the batch of the summed
// squared residual ||s(x_t) + z/sigma(t)||^2.
struct TimeNoise {
    float t;
    Eigen::MatrixXcf z;
};
float score_matching_loss(const ScoreFn& score, const Eigen::MatrixXcf& x0,
                          const Eigen::MatrixXcf& x_hat, const std::vector<TimeNoise>& batch,
                          const SdeConfig& cfg);

}  // namespace complexdec::diffusion
