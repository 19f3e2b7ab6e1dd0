#include "complexdec/diffusion/score_net.hpp"

#include <cmath>
#include <stdexcept>

namespace complexdec::diffusion {

namespace {

nn::FeatureMap to_feature_map(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& cond) {
    const int f = int(x_t.rows()), t = int(x_t.cols());
    nn::FeatureMap fm{Eigen::MatrixXf(4, f * t), f, t};
    for (int i = 0; i < f; ++i) {
        for (int j = 0; j < t; ++j) {
            const int px = i * t + j;
            fm.m(0, px) = x_t(i, j).real();
            fm.m(1, px) = x_t(i, j).imag();
            fm.m(2, px) = cond(i, j).real();
            fm.m(3, px) = cond(i, j).imag();
        }
    }
    return fm;
}

Eigen::MatrixXcf from_feature_map(const nn::FeatureMap& fm) {
    Eigen::MatrixXcf out(fm.h, fm.w);
    for (int i = 0; i < fm.h; ++i)
        for (int j = 0; j < fm.w; ++j)
            out(i, j) = {fm.m(0, i * fm.w + j), fm.m(1, i * fm.w + j)};
    return out;
}

nn::FeatureMap grad_to_feature_map(const Eigen::MatrixXcf& d) {
    const int f = int(d.rows()), t = int(d.cols());
    nn::FeatureMap fm{Eigen::MatrixXf(2, f * t), f, t};
    for (int i = 0; i < f; ++i) {
        for (int j = 0; j < t; ++j) {
            fm.m(0, i * t + j) = d(i, j).real();
            fm.m(1, i * t + j) = d(i, j).imag();
        }
    }
    return fm;
}

}  // namespace

ScoreNet::ConvBlock::ConvBlock(int in_ch, int out_ch, int emb_dim)
    : c1(in_ch, out_ch), c2(out_ch, out_ch), temb(emb_dim, out_ch) {}

nn::FeatureMap ScoreNet::ConvBlock::forward(const nn::FeatureMap& x, const Eigen::VectorXf& e,
                                            nn::Cache& cache) const {
    nn::FeatureMap h = c1.forward(x, cache);
    const Eigen::VectorXf bias = temb.forward(e, cache);
    h.m.colwise() += bias;
    h = nn::elu_fm(h, cache);
    h = c2.forward(h, cache);
    return nn::elu_fm(h, cache);
}

nn::FeatureMap ScoreNet::ConvBlock::backward(const nn::FeatureMap& dy, Eigen::VectorXf& demb,
                                             int h, int w, nn::Cache& cache) {
    nn::FeatureMap d = nn::elu_fm_backward(dy, h, w, cache);
    d = c2.backward(d, h, w, cache);
    d = nn::elu_fm_backward(d, h, w, cache);
    const Eigen::VectorXf dbias = d.m.rowwise().sum();
    demb += temb.backward(dbias, cache);
    return c1.backward(d, h, w, cache);
}

void ScoreNet::ConvBlock::init(std::mt19937_64& rng) {
    c1.init(rng);
    c2.init(rng);
    temb.init(rng);
}

std::vector<nn::Parameter*> ScoreNet::ConvBlock::parameters() {
    std::vector<nn::Parameter*> out = c1.parameters();
    auto p2 = c2.parameters();
    auto p3 = temb.parameters();
    out.insert(out.end(), p2.begin(), p2.end());
    out.insert(out.end(), p3.begin(), p3.end());
    return out;
}

ScoreNet::ScoreNet(const ScoreNetConfig& cfg)
    : cfg_(cfg),
      emb1_(2 * cfg.n_freqs, cfg.emb_dim),
      emb2_(cfg.emb_dim, cfg.emb_dim),
      out_conv_(cfg.channels_at(0), cfg.out_channels) {
    if (cfg.levels < 2) throw std::invalid_argument("ScoreNet: levels must be >= 2");
    down_.reserve(cfg.levels);
    down_.emplace_back(cfg.in_channels, cfg.channels_at(0), cfg.emb_dim);
    for (int l = 1; l < cfg.levels; ++l)
        down_.emplace_back(cfg.channels_at(l - 1), cfg.channels_at(l), cfg.emb_dim);
    up_.reserve(cfg.levels - 1);
    for (int l = 0; l < cfg.levels - 1; ++l)
        up_.emplace_back(cfg.channels_at(l + 1) + cfg.channels_at(l), cfg.channels_at(l),
                         cfg.emb_dim);
}

void ScoreNet::init(uint64_t seed) {
    std::mt19937_64 rng(seed);
    emb1_.init(rng);
    emb2_.init(rng);
    for (auto& b : down_) b.init(rng);
    for (auto& b : up_) b.init(rng);
    out_conv_.zero_init();  // start as the zero score
}

Eigen::VectorXf ScoreNet::fourier_features(float t) const {
    Eigen::VectorXf f(2 * cfg_.n_freqs);
    for (int i = 0; i < cfg_.n_freqs; ++i) {
        const float w = float(2.0 * M_PI * std::pow(2.0, i));
        f[2 * i] = std::sin(w * t);
        f[2 * i + 1] = std::cos(w * t);
    }
    return f;
}

Eigen::MatrixXcf ScoreNet::forward(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& cond,
                                   float t, nn::Cache& cache) const {
    if (x_t.rows() != cond.rows() || x_t.cols() != cond.cols())
        throw std::invalid_argument("ScoreNet: state/conditioner shape mismatch");
    const int div = 1 << (cfg_.levels - 1);
    if (int(x_t.rows()) % div != 0 || int(x_t.cols()) % div != 0)
        throw std::invalid_argument("ScoreNet: tile size must divide 2^(levels-1)");

    Eigen::VectorXf e = emb1_.forward(fourier_features(t), cache);
    e = Eigen::VectorXf(nn::elu(e, cache));
    e = emb2_.forward(e, cache);

    std::vector<nn::FeatureMap> skips;
    nn::FeatureMap h = down_[0].forward(to_feature_map(x_t, cond), e, cache);
    skips.push_back(h);
    for (int l = 1; l < cfg_.levels; ++l) {
        h = down_[l].forward(nn::avgpool2(h), e, cache);
        if (l < cfg_.levels - 1) skips.push_back(h);
    }
    for (int l = cfg_.levels - 2; l >= 0; --l)
        h = up_[l].forward(nn::concat_channels(nn::upsample2(h), skips[l]), e, cache);
    return from_feature_map(out_conv_.forward(h, cache));
}

Eigen::MatrixXcf ScoreNet::forward(const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& cond,
                                   float t) const {
    nn::Cache cache;
    return forward(x_t, cond, t, cache);
}

void ScoreNet::backward(const Eigen::MatrixXcf& dout, nn::Cache& cache) {
    const int f = int(dout.rows()), tw = int(dout.cols());
    Eigen::VectorXf demb = Eigen::VectorXf::Zero(cfg_.emb_dim);

    nn::FeatureMap d = out_conv_.backward(grad_to_feature_map(dout), f, tw, cache);
    std::vector<nn::FeatureMap> skip_grads(cfg_.levels - 1);
    for (int l = 0; l < cfg_.levels - 1; ++l) {
        const int h = f >> l, w = tw >> l;
        nn::FeatureMap dcat = up_[l].backward(d, demb, h, w, cache);
        const int up_ch = cfg_.channels_at(l + 1);
        nn::FeatureMap dup{Eigen::MatrixXf(dcat.m.topRows(up_ch)), h, w};
        skip_grads[l] = {Eigen::MatrixXf(dcat.m.bottomRows(dcat.channels() - up_ch)), h, w};
        d = nn::upsample2_backward(dup);
    }
    for (int l = cfg_.levels - 1; l >= 1; --l) {
        const int h = f >> l, w = tw >> l;
        nn::FeatureMap dh = down_[l].backward(d, demb, h, w, cache);
        d = nn::avgpool2_backward(dh);
        if (l - 1 < cfg_.levels - 1) d.m += skip_grads[l - 1].m;
    }
    down_[0].backward(d, demb, f, tw, cache);

    Eigen::VectorXf de = emb2_.backward(demb, cache);
    de = Eigen::VectorXf(nn::elu_backward(de, cache));
    emb1_.backward(de, cache);
}

std::vector<nn::Parameter*> ScoreNet::parameters() {
    std::vector<nn::Parameter*> out = emb1_.parameters();
    auto p2 = emb2_.parameters();
    out.insert(out.end(), p2.begin(), p2.end());
    for (auto& b : down_) {
        auto p = b.parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    for (auto& b : up_) {
        auto p = b.parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    auto po = out_conv_.parameters();
    out.insert(out.end(), po.begin(), po.end());
    return out;
}

}  // namespace complexdec::diffusion
