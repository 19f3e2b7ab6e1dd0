#include "complexdec/nn/conv2d.hpp"

#include <stdexcept>

namespace complexdec::nn {

namespace {

// col is (in_ch*9) x (h*w); tap (dy,dx) block holds x shifted by (-dy,-dx)
// with zero fill outside the image.
Eigen::MatrixXf im2col3x3(const Eigen::MatrixXf& x, int h, int w) {
    const int c = int(x.rows());
    Eigen::MatrixXf col = Eigen::MatrixXf::Zero(c * 9, h * w);
    int tap = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx, ++tap) {
            for (int y = 0; y < h; ++y) {
                const int sy = y + dy;
                if (sy < 0 || sy >= h) continue;
                const int x0 = std::max(0, -dx);
                const int x1 = std::min(w, w - dx);
                if (x1 <= x0) continue;
                col.block(tap * c, y * w + x0, c, x1 - x0) =
                    x.block(0, sy * w + x0 + dx, c, x1 - x0);
            }
        }
    }
    return col;
}

// Adjoint of im2col3x3: scatter the tap blocks back to image positions.
Eigen::MatrixXf col2im3x3(const Eigen::MatrixXf& dcol, int c, int h, int w) {
    Eigen::MatrixXf dx = Eigen::MatrixXf::Zero(c, h * w);
    int tap = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dxo = -1; dxo <= 1; ++dxo, ++tap) {
            for (int y = 0; y < h; ++y) {
                const int sy = y + dy;
                if (sy < 0 || sy >= h) continue;
                const int x0 = std::max(0, -dxo);
                const int x1 = std::min(w, w - dxo);
                if (x1 <= x0) continue;
                dx.block(0, sy * w + x0 + dxo, c, x1 - x0) +=
                    dcol.block(tap * c, y * w + x0, c, x1 - x0);
            }
        }
    }
    return dx;
}

}  // namespace

Conv2d3x3::Conv2d3x3(int in_ch, int out_ch)
    : in_ch_(in_ch), out_ch_(out_ch), w_(out_ch, in_ch * 9), b_(out_ch, 1) {}

void Conv2d3x3::init(std::mt19937_64& rng) {
    uniform_init(w_.value, in_ch_ * 9, rng);
    uniform_init(b_.value, in_ch_ * 9, rng);
}

void Conv2d3x3::zero_init() {
    w_.value.setZero();
    b_.value.setZero();
}

FeatureMap Conv2d3x3::forward(const FeatureMap& x, Cache& cache) const {
    if (x.channels() != in_ch_) throw std::invalid_argument("Conv2d3x3: channel mismatch");
    Eigen::MatrixXf col = im2col3x3(x.m, x.h, x.w);
    FeatureMap y{Eigen::MatrixXf(out_ch_, x.h * x.w), x.h, x.w};
    y.m.noalias() = w_.value * col;
    y.m.colwise() += Eigen::VectorXf(b_.value.col(0));
    cache.push_back(std::move(col));
    return y;
}

FeatureMap Conv2d3x3::backward(const FeatureMap& dy, int h, int w, Cache& cache) {
    const Eigen::MatrixXf col = std::move(cache.back());
    cache.pop_back();
    w_.grad.noalias() += dy.m * col.transpose();
    b_.grad += dy.m.rowwise().sum();
    const Eigen::MatrixXf dcol = w_.value.transpose() * dy.m;
    return {col2im3x3(dcol, in_ch_, h, w), h, w};
}

FeatureMap avgpool2(const FeatureMap& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0) throw std::invalid_argument("avgpool2: odd spatial size");
    const int oh = x.h / 2, ow = x.w / 2;
    FeatureMap y{Eigen::MatrixXf::Zero(x.channels(), oh * ow), oh, ow};
    for (int yy = 0; yy < oh; ++yy)
        for (int xx = 0; xx < ow; ++xx)
            y.m.col(yy * ow + xx) =
                0.25f * (x.m.col(2 * yy * x.w + 2 * xx) + x.m.col(2 * yy * x.w + 2 * xx + 1) +
                         x.m.col((2 * yy + 1) * x.w + 2 * xx) +
                         x.m.col((2 * yy + 1) * x.w + 2 * xx + 1));
    return y;
}

FeatureMap avgpool2_backward(const FeatureMap& dy) {
    const int h = dy.h * 2, w = dy.w * 2;
    FeatureMap dx{Eigen::MatrixXf::Zero(dy.channels(), h * w), h, w};
    for (int yy = 0; yy < dy.h; ++yy)
        for (int xx = 0; xx < dy.w; ++xx) {
            const Eigen::VectorXf g = 0.25f * dy.m.col(yy * dy.w + xx);
            dx.m.col(2 * yy * w + 2 * xx) = g;
            dx.m.col(2 * yy * w + 2 * xx + 1) = g;
            dx.m.col((2 * yy + 1) * w + 2 * xx) = g;
            dx.m.col((2 * yy + 1) * w + 2 * xx + 1) = g;
        }
    return dx;
}

FeatureMap upsample2(const FeatureMap& x) {
    const int h = x.h * 2, w = x.w * 2;
    FeatureMap y{Eigen::MatrixXf(x.channels(), h * w), h, w};
    for (int yy = 0; yy < x.h; ++yy)
        for (int xx = 0; xx < x.w; ++xx) {
            const auto src = x.m.col(yy * x.w + xx);
            y.m.col(2 * yy * w + 2 * xx) = src;
            y.m.col(2 * yy * w + 2 * xx + 1) = src;
            y.m.col((2 * yy + 1) * w + 2 * xx) = src;
            y.m.col((2 * yy + 1) * w + 2 * xx + 1) = src;
        }
    return y;
}

FeatureMap upsample2_backward(const FeatureMap& dy) {
    if (dy.h % 2 != 0 || dy.w % 2 != 0)
        throw std::invalid_argument("upsample2_backward: odd spatial size");
    const int h = dy.h / 2, w = dy.w / 2;
    FeatureMap dx{Eigen::MatrixXf::Zero(dy.channels(), h * w), h, w};
    for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx)
            dx.m.col(yy * w + xx) = dy.m.col(2 * yy * dy.w + 2 * xx) +
                                    dy.m.col(2 * yy * dy.w + 2 * xx + 1) +
                                    dy.m.col((2 * yy + 1) * dy.w + 2 * xx) +
                                    dy.m.col((2 * yy + 1) * dy.w + 2 * xx + 1);
    return dx;
}

FeatureMap elu_fm(const FeatureMap& x, Cache& cache) {
    return {elu(x.m, cache), x.h, x.w};
}

FeatureMap elu_fm_backward(const FeatureMap& dy, int h, int w, Cache& cache) {
    return {elu_backward(dy.m, cache), h, w};
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("concat_channels: size mismatch");
    FeatureMap y{Eigen::MatrixXf(a.channels() + b.channels(), a.h * a.w), a.h, a.w};
    y.m.topRows(a.channels()) = a.m;
    y.m.bottomRows(b.channels()) = b.m;
    return y;
}

Linear::Linear(int in_dim, int out_dim) : w_(out_dim, in_dim), b_(out_dim, 1) {}

void Linear::init(std::mt19937_64& rng) {
    uniform_init(w_.value, int(w_.value.cols()), rng);
    uniform_init(b_.value, int(w_.value.cols()), rng);
}

void Linear::zero_init() {
    w_.value.setZero();
    b_.value.setZero();
}

Eigen::VectorXf Linear::forward(const Eigen::VectorXf& x, Cache& cache) const {
    cache.push_back(x);
    return w_.value * x + b_.value.col(0);
}

Eigen::VectorXf Linear::backward(const Eigen::VectorXf& dy, Cache& cache) {
    const Eigen::MatrixXf x = std::move(cache.back());
    cache.pop_back();
    w_.grad.noalias() += dy * x.transpose();
    b_.grad += dy;
    return w_.value.transpose() * dy;
}

}  // namespace complexdec::nn
