#include "complexdec/nn/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace complexdec::nn {

void uniform_init(Eigen::MatrixXf& m, int fan_in, std::mt19937_64& rng) {
    const float a = 1.0f / std::sqrt(float(fan_in));
    std::uniform_real_distribution<float> dist(-a, a);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(int in_ch, int out_ch, int kernel, int dilation, int pad_left, int pad_right)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      dilation_(dilation),
      pad_left_(pad_left),
      pad_right_(pad_right),
      b_(out_ch, 1) {
    if (kernel < 1 || dilation < 1) throw std::invalid_argument("Conv1d: kernel/dilation must be >= 1");
    if (pad_left + pad_right != (kernel - 1) * dilation)
        throw std::invalid_argument("Conv1d: padding must sum to (kernel-1)*dilation");
    w_.reserve(kernel);
    for (int j = 0; j < kernel; ++j) w_.emplace_back(out_ch, in_ch);
}

Conv1d Conv1d::same(int in_ch, int out_ch, int kernel, int dilation) {
    const int span = (kernel - 1) * dilation;
    // Even kernels take the extra tap on the left (causal-leaning).
    return Conv1d(in_ch, out_ch, kernel, dilation, (span + 1) / 2, span / 2);
}

void Conv1d::init(std::mt19937_64& rng) {
    for (auto& tap : w_) uniform_init(tap.value, in_ch_ * kernel_, rng);
    uniform_init(b_.value, in_ch_ * kernel_, rng);
}

void Conv1d::zero_init() {
    for (auto& tap : w_) tap.value.setZero();
    b_.value.setZero();
}

Eigen::MatrixXf Conv1d::forward(const Eigen::MatrixXf& x, Cache& cache) const {
    if (int(x.rows()) != in_ch_) throw std::invalid_argument("Conv1d: channel mismatch");
    const Eigen::Index t = x.cols();
    Eigen::MatrixXf padded = Eigen::MatrixXf::Zero(in_ch_, t + pad_left_ + pad_right_);
    padded.middleCols(pad_left_, t) = x;

    Eigen::MatrixXf y = b_.value.replicate(1, t);
    for (int j = 0; j < kernel_; ++j)
        y.noalias() += w_[j].value * padded.middleCols(Eigen::Index(j) * dilation_, t);
    cache.push_back(std::move(padded));
    return y;
}

Eigen::MatrixXf Conv1d::backward(const Eigen::MatrixXf& dy, Cache& cache) {
    const Eigen::MatrixXf padded = std::move(cache.back());
    cache.pop_back();
    const Eigen::Index t = dy.cols();

    Eigen::MatrixXf dpadded = Eigen::MatrixXf::Zero(in_ch_, padded.cols());
    for (int j = 0; j < kernel_; ++j) {
        w_[j].grad.noalias() += dy * padded.middleCols(Eigen::Index(j) * dilation_, t).transpose();
        dpadded.middleCols(Eigen::Index(j) * dilation_, t).noalias() += w_[j].value.transpose() * dy;
    }
    b_.grad += dy.rowwise().sum();
    return dpadded.middleCols(pad_left_, t);
}

std::vector<Parameter*> Conv1d::parameters() {
    std::vector<Parameter*> out;
    for (auto& tap : w_) out.push_back(&tap);
    out.push_back(&b_);
    return out;
}

// ---------------------------------------------------------------------------
// ConvTranspose1d

ConvTranspose1d::ConvTranspose1d(int in_ch, int out_ch, int kernel, int dilation, int pad_left,
                                 int pad_right)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      dilation_(dilation),
      pad_left_(pad_left),
      pad_right_(pad_right),
      b_(out_ch, 1) {
    if (kernel < 1 || dilation < 1)
        throw std::invalid_argument("ConvTranspose1d: kernel/dilation must be >= 1");
    if (pad_left + pad_right != (kernel - 1) * dilation)
        throw std::invalid_argument("ConvTranspose1d: padding must sum to (kernel-1)*dilation");
    w_.reserve(kernel);
    for (int j = 0; j < kernel; ++j) w_.emplace_back(out_ch, in_ch);
}

ConvTranspose1d ConvTranspose1d::same(int in_ch, int out_ch, int kernel, int dilation) {
    const int span = (kernel - 1) * dilation;
    // Mirror of Conv1d::same so the pair composes shape-stably.
    return ConvTranspose1d(in_ch, out_ch, kernel, dilation, span / 2, (span + 1) / 2);
}

void ConvTranspose1d::init(std::mt19937_64& rng) {
    for (auto& tap : w_) uniform_init(tap.value, in_ch_ * kernel_, rng);
    uniform_init(b_.value, in_ch_ * kernel_, rng);
}

void ConvTranspose1d::zero_init() {
    for (auto& tap : w_) tap.value.setZero();
    b_.value.setZero();
}

Eigen::MatrixXf ConvTranspose1d::forward(const Eigen::MatrixXf& x, Cache& cache) const {
    if (int(x.rows()) != in_ch_) throw std::invalid_argument("ConvTranspose1d: channel mismatch");
    const Eigen::Index t = x.cols();
    const int span = (kernel_ - 1) * dilation_;

    // Scatter each input column to kernel positions, then crop the overhang.
    Eigen::MatrixXf full = Eigen::MatrixXf::Zero(out_ch_, t + span);
    for (int j = 0; j < kernel_; ++j)
        full.middleCols(Eigen::Index(j) * dilation_, t).noalias() += w_[j].value * x;
    Eigen::MatrixXf y = full.middleCols(pad_left_, t);
    y.colwise() += Eigen::VectorXf(b_.value.col(0));
    cache.push_back(x);
    return y;
}

Eigen::MatrixXf ConvTranspose1d::backward(const Eigen::MatrixXf& dy, Cache& cache) {
    const Eigen::MatrixXf x = std::move(cache.back());
    cache.pop_back();
    const Eigen::Index t = dy.cols();
    const int span = (kernel_ - 1) * dilation_;

    Eigen::MatrixXf dfull = Eigen::MatrixXf::Zero(out_ch_, t + span);
    dfull.middleCols(pad_left_, t) = dy;
    Eigen::MatrixXf dx = Eigen::MatrixXf::Zero(in_ch_, t);
    for (int j = 0; j < kernel_; ++j) {
        const auto dslice = dfull.middleCols(Eigen::Index(j) * dilation_, t);
        w_[j].grad.noalias() += dslice * x.transpose();
        dx.noalias() += w_[j].value.transpose() * dslice;
    }
    b_.grad += dy.rowwise().sum();
    return dx;
}

std::vector<Parameter*> ConvTranspose1d::parameters() {
    std::vector<Parameter*> out;
    for (auto& tap : w_) out.push_back(&tap);
    out.push_back(&b_);
    return out;
}

// ---------------------------------------------------------------------------
// ELU

Eigen::MatrixXf elu(const Eigen::MatrixXf& x, Cache& cache) {
    Eigen::MatrixXf y = x.unaryExpr([](float v) { return v > 0.f ? v : std::expm1(v); });
    cache.push_back(y);
    return y;
}

Eigen::MatrixXf elu_backward(const Eigen::MatrixXf& dy, Cache& cache) {
    const Eigen::MatrixXf y = std::move(cache.back());
    cache.pop_back();
    // dy/dx = 1 for x > 0, e^x = y + 1 otherwise.
    return dy.cwiseProduct(y.unaryExpr([](float v) { return v > 0.f ? 1.f : v + 1.f; }));
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(std::vector<Parameter*> params, float lr, float beta1, float beta2, float eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Parameter* p : params_) {
        m_.push_back(Eigen::MatrixXf::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Eigen::MatrixXf::Zero(p->value.rows(), p->value.cols()));
    }
}

void Adam::step() {
    ++t_;
    const float bc1 = 1.f - std::pow(beta1_, float(t_));
    const float bc2 = 1.f - std::pow(beta2_, float(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        m_[i] = beta1_ * m_[i] + (1.f - beta1_) * p.grad;
        v_[i] = beta2_ * v_[i] + (1.f - beta2_) * p.grad.cwiseProduct(p.grad);
        const Eigen::MatrixXf mhat = m_[i] / bc1;
        const Eigen::MatrixXf vhat = v_[i] / bc2;
        p.value.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

}  // namespace complexdec::nn
