// score_net.hpp
// U-Net score estimator. Input is the diffusion state and the decoded
// conditioner as 2 channels each (real/imaginary); diffusion time enters
// through Fourier embeddings projected to per-block channel biases. The
// network predicts sigma(t) * score, so the regression target is plain -z.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "complexdec/nn/conv2d.hpp"
#include "complexdec/nn/nn.hpp"

namespace complexdec::diffusion {

struct ScoreNetConfig {
    int in_channels = 4;
    int out_channels = 2;
    int base_channels = 16;
    int levels = 3;  // spatial sizes must divide 2^(levels-1)
    int channel_cap = 256;
    int emb_dim = 32;
    int n_freqs = 8;

    int channels_at(int level) const {
        const long long c = (long long)base_channels << level;
        return int(std::min(c, (long long)channel_cap));
    }

    static ScoreNetConfig desk_scale() { return ScoreNetConfig{}; }

    // Full NCSN++-like depth (256-channel bottleneck at 4x4 for 256x256
    // tiles). Not exercised in CI.
    static ScoreNetConfig full_scale() {
        ScoreNetConfig c;
        c.base_channels = 32;
        c.levels = 7;
        c.emb_dim = 128;
        c.n_freqs = 16;
        return c;
    }
};

class ScoreNet {
public:
    explicit ScoreNet(const ScoreNetConfig& cfg);

    void init(uint64_t seed);

    // x_t and cond are F x T complex tiles (F = rows). Returns the raw
    // (sigma-scaled) prediction with the same shape.
    Eigen::MatrixXcf forward(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& cond, float t,
                             nn::Cache& cache) const;
    Eigen::MatrixXcf forward(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& cond,
                             float t) const;

    // Accumulates parameter gradients for the matching forward call.
    void backward(const Eigen::MatrixXcf& dout, nn::Cache& cache);

    std::vector<nn::Parameter*> parameters();
    const ScoreNetConfig& config() const { return cfg_; }

private:
    struct ConvBlock {
        nn::Conv2d3x3 c1, c2;
        nn::Linear temb;

        ConvBlock(int in_ch, int out_ch, int emb_dim);
        nn::FeatureMap forward(const nn::FeatureMap& x, const Eigen::VectorXf& e,
                               nn::Cache& cache) const;
        nn::FeatureMap backward(const nn::FeatureMap& dy, Eigen::VectorXf& demb, int h, int w,
                                nn::Cache& cache);
        void init(std::mt19937_64& rng);
        std::vector<nn::Parameter*> parameters();
    };

    Eigen::VectorXf fourier_features(float t) const;

    ScoreNetConfig cfg_;
    nn::Linear emb1_, emb2_;
    std::vector<ConvBlock> down_;  // levels blocks, coarser with index
    std::vector<ConvBlock> up_;    // levels-1 blocks, up_[l] works at level l
    nn::Conv2d3x3 out_conv_;
};

}  // namespace complexdec::diffusion
