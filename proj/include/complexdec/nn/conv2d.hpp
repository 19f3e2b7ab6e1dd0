// conv2d.hpp
// 2-D layers for the score U-Net. Feature maps are channels x (h*w)
// matrices (pixel index = y*w + x); 3x3 convolutions go through im2col so
// the heavy lifting is a GEMM.

#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "complexdec/nn/nn.hpp"

namespace complexdec::nn {

struct FeatureMap {
    Eigen::MatrixXf m;  // channels x (h*w)
    int h = 0;
    int w = 0;

    int channels() const { return int(m.rows()); }
};

// 3x3, stride 1, zero "same" padding.
class Conv2d3x3 {
public:
    Conv2d3x3(int in_ch, int out_ch);

    void init(std::mt19937_64& rng);
    void zero_init();

    FeatureMap forward(const FeatureMap& x, Cache& cache) const;
    FeatureMap backward(const FeatureMap& dy, int h, int w, Cache& cache);

    std::vector<Parameter*> parameters() { return {&w_, &b_}; }

private:
    int in_ch_, out_ch_;
    Parameter w_;  // out_ch x (in_ch*9)
    Parameter b_;  // out_ch x 1
};

// 2x2 average pooling (h and w must be even).
FeatureMap avgpool2(const FeatureMap& x);
FeatureMap avgpool2_backward(const FeatureMap& dy);

// Nearest-neighbour 2x upsampling.
FeatureMap upsample2(const FeatureMap& x);
FeatureMap upsample2_backward(const FeatureMap& dy);

FeatureMap elu_fm(const FeatureMap& x, Cache& cache);
FeatureMap elu_fm_backward(const FeatureMap& dy, int h, int w, Cache& cache);

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);

// Dense layer, used by the time-embedding MLP and per-block bias taps.
class Linear {
public:
    Linear(int in_dim, int out_dim);

    void init(std::mt19937_64& rng);
    void zero_init();

    Eigen::VectorXf forward(const Eigen::VectorXf& x, Cache& cache) const;
    Eigen::VectorXf backward(const Eigen::VectorXf& dy, Cache& cache);

    std::vector<Parameter*> parameters() { return {&w_, &b_}; }

private:
    Parameter w_;  // out x in
    Parameter b_;  // out x 1
};

}  // namespace complexdec::nn
