// nn.hpp
// Minimal trainable layers for the codec networks: stride-1 (transpose)
// convolutions on channels x time matrices, ELU, and Adam. Layers are
// stateless across calls; every forward pushes what backward needs onto a
// caller-owned Cache, so shared-weight modules can run several passes
// before their backwards (LIFO order).

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace complexdec::nn {

struct Parameter {
    Eigen::MatrixXf value;
    Eigen::MatrixXf grad;

    explicit Parameter(int rows = 0, int cols = 1)
        : value(Eigen::MatrixXf::Zero(rows, cols)), grad(Eigen::MatrixXf::Zero(rows, cols)) {}

    void zero_grad() { grad.setZero(); }
};

using Cache = std::vector<Eigen::MatrixXf>;

// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void uniform_init(Eigen::MatrixXf& m, int fan_in, std::mt19937_64& rng);

// Stride-1 Conv1d with explicit zero padding; output width equals input
// width when pad_left + pad_right == (kernel-1)*dilation.
class Conv1d {
public:
    Conv1d(int in_ch, int out_ch, int kernel, int dilation, int pad_left, int pad_right);

    // "same" symmetric padding, extra pad on the left for even kernels.
    static Conv1d same(int in_ch, int out_ch, int kernel, int dilation = 1);

    void init(std::mt19937_64& rng);
    void zero_init();

    Eigen::MatrixXf forward(const Eigen::MatrixXf& x, Cache& cache) const;
    Eigen::MatrixXf backward(const Eigen::MatrixXf& dy, Cache& cache);

    std::vector<Parameter*> parameters();
    const std::vector<Parameter>& taps() const { return w_; }
    std::vector<Parameter>& taps() { return w_; }
    Parameter& bias() { return b_; }
    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }
    int kernel() const { return kernel_; }
    int dilation() const { return dilation_; }

private:
    int in_ch_, out_ch_, kernel_, dilation_, pad_left_, pad_right_;
    std::vector<Parameter> w_;  // one out_ch x in_ch matrix per tap
    Parameter b_;               // out_ch x 1
};

// Stride-1 transpose convolution. pad_left/pad_right crop the full
// correlation output; shapes are preserved when they sum to
// (kernel-1)*dilation. Equivalent to a Conv1d with flipped taps and
// mirrored padding.
class ConvTranspose1d {
public:
    ConvTranspose1d(int in_ch, int out_ch, int kernel, int dilation, int pad_left, int pad_right);
    static ConvTranspose1d same(int in_ch, int out_ch, int kernel, int dilation = 1);

    void init(std::mt19937_64& rng);
    void zero_init();

    Eigen::MatrixXf forward(const Eigen::MatrixXf& x, Cache& cache) const;
    Eigen::MatrixXf backward(const Eigen::MatrixXf& dy, Cache& cache);

    std::vector<Parameter*> parameters();
    std::vector<Parameter>& taps() { return w_; }
    Parameter& bias() { return b_; }

private:
    int in_ch_, out_ch_, kernel_, dilation_, pad_left_, pad_right_;
    std::vector<Parameter> w_;
    Parameter b_;
};

Eigen::MatrixXf elu(const Eigen::MatrixXf& x, Cache& cache);
Eigen::MatrixXf elu_backward(const Eigen::MatrixXf& dy, Cache& cache);

class Adam {
public:
    Adam(std::vector<Parameter*> params, float lr, float beta1 = 0.9f, float beta2 = 0.999f,
         float eps = 1e-8f);

    void step();
    void zero_grad();
    void set_lr(float lr) { lr_ = lr; }
    const std::vector<Parameter*>& params() const { return params_; }

private:
    std::vector<Parameter*> params_;
    std::vector<Eigen::MatrixXf> m_, v_;
    float lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
};

}  // namespace complexdec::nn
