#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "complexdec/codec/model.hpp"
#include "complexdec/losses/losses.hpp"

using namespace complexdec;

namespace {

Eigen::MatrixXf random_matrix(int rows, int cols, uint64_t seed, float scale = 1.f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-scale, scale);
    Eigen::MatrixXf m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

dsp::WaveSegment random_wave(int n, uint64_t seed, float scale = 0.5f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-scale, scale);
    dsp::WaveSegment w;
    w.samples.resize(size_t(n));
    for (float& s : w.samples) s = dist(rng);
    return w;
}

// Small generic operating point for gradient checks: every layer type is
// present but the parameter count stays in the hundreds.
CodecConfig grad_check_config() {
    CodecConfig c = CodecConfig::tiny();
    c.model_channels = 4;
    c.n_blocks = 1;
    c.units_per_block = 1;
    return c;
}

// Moves every parameter off its init point (the decoder output layer starts
// at zero, which would hide missing gradient paths).
void jitter_parameters(codec::CodecModel& model, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-0.05f, 0.05f);
    for (nn::Parameter* p : model.parameters())
        for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value(i) += dist(rng);
}

// Reconstruction loss on the companded spectrum, quantizer bypassed so the
// whole chain is differentiable.
float spec_loss(const dsp::WaveSegment& wave, const codec::CodecModel& model) {
    const codec::CodecForwardResult r = codec::codec_forward(wave, model, /*bypass_rvq=*/true);
    return losses::complex_mse(r.spec.data, r.spec_hat.data);
}

}  // namespace

TEST_CASE("the codec chain preserves frame count and sample count") {
    const CodecConfig cfg = CodecConfig::tiny();
    codec::CodecModel model(cfg);
    model.init(1);

    const dsp::WaveSegment wave = random_wave(3200, 2);  // 10 frames at hop 320
    const codec::CodecForwardResult r = codec::codec_forward(wave, model);

    CHECK(r.spec.data.rows() == 256);
    CHECK(r.spec.data.cols() == 10);
    CHECK(r.spec_hat.data.rows() == 256);
    CHECK(r.spec_hat.data.cols() == 10);
    CHECK(r.latents.real.rows() == cfg.model_channels);
    CHECK(r.latents.real.cols() == 10);
    CHECK(r.latents.imag.rows() == cfg.model_channels);
    CHECK(r.real_q.indices.rows() == cfg.n_stages);
    CHECK(r.imag_q.indices.rows() == cfg.n_stages);
    CHECK(r.wave_hat.length() == wave.length());

    const Eigen::MatrixXi idx = codec::encode_to_indices(wave, model);
    CHECK(idx.rows() == cfg.total_stages());
    CHECK(idx.cols() == 10);
    CHECK(codec::decode_from_indices(idx, wave.length(), model).length() == wave.length());
}

TEST_CASE("forward passes are deterministic and seeds reproduce parameters") {
    const CodecConfig cfg = CodecConfig::tiny();
    codec::CodecModel a(cfg), b(cfg), c(cfg);
    a.init(7);
    b.init(7);
    c.init(8);

    auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    REQUIRE(pa.size() == pb.size());
    bool identical = true, all_same_as_c = true;
    for (size_t i = 0; i < pa.size(); ++i) {
        if ((pa[i]->value - pb[i]->value).norm() != 0.f) identical = false;
        if ((pa[i]->value - pc[i]->value).norm() != 0.f) all_same_as_c = false;
    }
    CHECK(identical);
    CHECK_FALSE(all_same_as_c);

    const dsp::WaveSegment wave = random_wave(1600, 3);
    const auto r1 = codec::codec_forward(wave, a);
    const auto r2 = codec::codec_forward(wave, a);
    for (int i = 0; i < wave.length(); ++i)
        CHECK(r1.wave_hat.samples[size_t(i)] == r2.wave_hat.samples[size_t(i)]);
}

TEST_CASE("transpose convolution is the adjoint of the matching convolution") {
    for (int kernel : {2, 3, 7}) {
        const int span = kernel - 1;
        nn::Conv1d conv(3, 5, kernel, 1, (span + 1) / 2, span / 2);
        nn::ConvTranspose1d convt(5, 3, kernel, 1, (span + 1) / 2, span / 2);
        std::mt19937_64 rng(10 + uint64_t(kernel));
        conv.init(rng);
        // adjoint pairs share the weight tensor, transposed per tap
        for (int k = 0; k < kernel; ++k)
            convt.taps()[size_t(k)].value = conv.taps()[size_t(k)].value.transpose();
        convt.bias().value.setZero();
        conv.bias().value.setZero();

        const Eigen::MatrixXf x = random_matrix(3, 12, 20 + uint64_t(kernel));
        const Eigen::MatrixXf y = random_matrix(5, 12, 30 + uint64_t(kernel));
        nn::Cache c1, c2;
        const float lhs = (conv.forward(x, c1).cwiseProduct(y)).sum();
        const float rhs = (convt.forward(y, c2).cwiseProduct(x)).sum();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
    }
}

TEST_CASE("convolution outputs depend only on the receptive field") {
    nn::Conv1d conv = nn::Conv1d::same(2, 2, 7, /*dilation=*/3);
    std::mt19937_64 rng(11);
    conv.init(rng);
    conv.bias().value.setZero();

    Eigen::MatrixXf x = Eigen::MatrixXf::Zero(2, 41);
    x.col(20).setOnes();
    nn::Cache cache;
    const Eigen::MatrixXf y = conv.forward(x, cache);
    const int reach = 3 * (7 - 1) / 2;  // dilation * (kernel-1) / 2 each side
    for (int t = 0; t < 41; ++t) {
        if (std::abs(t - 20) > reach)
            CHECK(y.col(t).cwiseAbs().maxCoeff() == 0.f);
    }
    CHECK(y.col(20).cwiseAbs().maxCoeff() > 0.f);
    CHECK(y.col(20 - reach).cwiseAbs().maxCoeff() > 0.f);
    CHECK(y.col(20 + reach).cwiseAbs().maxCoeff() > 0.f);
}

TEST_CASE("layer gradients match finite differences") {
    std::mt19937_64 rng(12);
    nn::Conv1d conv = nn::Conv1d::same(2, 3, 5, 2);
    conv.init(rng);
    const Eigen::MatrixXf x = random_matrix(2, 9, 13);
    const Eigen::MatrixXf dy = random_matrix(3, 9, 14);

    nn::Cache cache;
    conv.forward(x, cache);
    nn::Cache back = cache;
    const Eigen::MatrixXf dx = conv.backward(dy, back);

    // loss(v) = sum(forward(v) .* dy) makes dy the upstream gradient
    const auto loss_at = [&](nn::Conv1d& c, const Eigen::MatrixXf& in) {
        nn::Cache tmp;
        return (c.forward(in, tmp).cwiseProduct(dy)).sum();
    };

    const float h = 1e-3f;
    std::uniform_int_distribution<int> pick_tap(0, conv.kernel() - 1);
    for (int trial = 0; trial < 8; ++trial) {
        nn::Parameter& p = conv.taps()[size_t(pick_tap(rng))];
        std::uniform_int_distribution<int> pick(0, int(p.value.size()) - 1);
        const int idx = pick(rng);
        const float keep = p.value(idx);
        p.value(idx) = keep + h;
        const float lp = loss_at(conv, x);
        p.value(idx) = keep - h;
        const float lm = loss_at(conv, x);
        p.value(idx) = keep;
        CHECK(p.grad(idx) == doctest::Approx((lp - lm) / (2 * h)).epsilon(0.01));
    }

    // input gradient via a random direction
    const Eigen::MatrixXf d = random_matrix(2, 9, 15);
    nn::Conv1d c2 = conv;
    const float fd = (loss_at(c2, x + h * d) - loss_at(c2, x - h * d)) / (2 * h);
    CHECK((dx.cwiseProduct(d)).sum() == doctest::Approx(fd).epsilon(0.01));
}

TEST_CASE("end-to-end parameter gradients match finite differences") {
    const CodecConfig cfg = grad_check_config();
    codec::CodecModel model(cfg);
    model.init(21);
    jitter_parameters(model, 22);

    const dsp::WaveSegment wave = random_wave(1600, 23);  // 5 frames

    // analytic gradients: mse on the companded spectra, quantizer bypassed
    codec::CodecForwardResult r = codec::codec_forward(wave, model, /*bypass_rvq=*/true);
    const Eigen::MatrixXcf dspec = losses::complex_mse_backward(r.spec.data, r.spec_hat.data);
    for (nn::Parameter* p : model.parameters()) p->zero_grad();
    const Eigen::MatrixXf d_real =
        model.decoder.backward(dspec.real(), r.dec_real_cache);
    const Eigen::MatrixXf d_imag =
        model.decoder.backward(dspec.imag(), r.dec_imag_cache);
    model.encoder.backward(d_real, r.enc_real_cache);
    model.encoder.backward(d_imag, r.enc_imag_cache);

    auto params = model.parameters();
    std::mt19937_64 rng(24);
    std::uniform_int_distribution<int> pick_param(0, int(params.size()) - 1);
    // the loss is float, so the difference quotient is quantized to about
    // one ULP of the loss divided by 2h; allow that as absolute slack
    const float h = 1e-2f;
    const float fd_resolution = 5e-5f;
    int checked = 0, resolved = 0;
    while (checked < 12) {
        nn::Parameter* p = params[size_t(pick_param(rng))];
        if (p->value.size() == 0) continue;
        std::uniform_int_distribution<int> pick(0, int(p->value.size()) - 1);
        const int idx = pick(rng);
        const float keep = p->value(idx);
        p->value(idx) = keep + h;
        const float lp = spec_loss(wave, model);
        p->value(idx) = keep - h;
        const float lm = spec_loss(wave, model);
        p->value(idx) = keep;
        const float fd = (lp - lm) / (2 * h);
        const float tol = std::max(0.05f * std::abs(fd), fd_resolution);
        CHECK(std::abs(p->grad(idx) - fd) <= tol);
        if (std::abs(fd) > 4 * fd_resolution) ++resolved;
        ++checked;
    }
    CHECK(resolved >= 4);  // the sample must exercise well-resolved gradient paths
}

TEST_CASE("a fresh decoder reconstructs silence before training") {
    // the output layer starts at zero so an untrained model is neutral,
    // not noise-emitting
    codec::CodecModel model(CodecConfig::tiny());
    model.init(30);
    const codec::CodecForwardResult r =
        codec::codec_forward(random_wave(1600, 31), model, /*bypass_rvq=*/true);
    CHECK(r.spec_hat.data.cwiseAbs().maxCoeff() == 0.f);
}

TEST_CASE("model checkpoints round-trip bitwise") {
    const CodecConfig cfg = CodecConfig::tiny();
    codec::CodecModel model(cfg);
    model.init(40);
    jitter_parameters(model, 41);
    // give the codebooks non-trivial content
    std::mt19937_64 rng(42);
    rvq::init_from_batch(model.real_rvq, random_matrix(cfg.model_channels, 64, 43), rng);
    rvq::init_from_batch(model.imag_rvq, random_matrix(cfg.model_channels, 64, 44), rng);
    model.rvq_initialized = true;

    std::stringstream ss;
    codec::save_model(ss, model);
    codec::CodecModel back = codec::load_model(ss);

    CHECK(back.config.model_channels == cfg.model_channels);
    CHECK(back.config.n_stages == cfg.n_stages);
    CHECK(back.config.codebook_bits == cfg.codebook_bits);
    CHECK(back.rvq_initialized);

    auto pa = model.parameters(), pb = back.parameters();
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) CHECK((pa[i]->value - pb[i]->value).norm() == 0.f);
    for (int s = 0; s < cfg.n_stages; ++s) {
        CHECK((model.real_rvq.stages[s].entries - back.real_rvq.stages[s].entries).norm() == 0.f);
        CHECK((model.imag_rvq.stages[s].entries - back.imag_rvq.stages[s].entries).norm() == 0.f);
    }

    // identical outputs after reload
    const dsp::WaveSegment wave = random_wave(1600, 45);
    const auto r1 = codec::codec_forward(wave, model);
    const auto r2 = codec::codec_forward(wave, back);
    CHECK((r1.spec_hat.data - r2.spec_hat.data).cwiseAbs().maxCoeff() == 0.f);

    std::stringstream bad("not a checkpoint");
    CHECK_THROWS(codec::load_model(bad));
}
