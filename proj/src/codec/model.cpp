#include "complexdec/codec/model.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace complexdec::codec {

namespace {

void write_bytes(std::ostream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), std::streamsize(n));
}
void read_bytes(std::istream& in, void* p, size_t n) {
    if (!in.read(static_cast<char*>(p), std::streamsize(n)))
        throw std::runtime_error("model checkpoint: unexpected end of stream");
}
void write_u32(std::ostream& out, uint32_t v) { write_bytes(out, &v, 4); }
uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    read_bytes(in, &v, 4);
    return v;
}
void write_f32(std::ostream& out, float v) { write_bytes(out, &v, 4); }
float read_f32(std::istream& in) {
    float v = 0;
    read_bytes(in, &v, 4);
    return v;
}

}  // namespace

EncoderConfig EncoderConfig::from_codec(const CodecConfig& c) {
    EncoderConfig e;
    e.in_dim = c.bins();
    e.channels = c.model_channels;
    e.n_blocks = c.n_blocks;
    e.units_per_block = c.units_per_block;
    if (int(e.dilations.size()) > e.units_per_block) e.dilations.resize(e.units_per_block);
    return e;
}

// ---------------------------------------------------------------------------
// Residual units

ResidualUnit::ResidualUnit(int channels, int kernel, int dilation)
    : conv1(nn::Conv1d::same(channels, channels, kernel, dilation)),
      conv2(nn::Conv1d::same(channels, channels, kernel, dilation)) {}

Eigen::MatrixXf ResidualUnit::forward(const Eigen::MatrixXf& x, nn::Cache& cache) const {
    Eigen::MatrixXf h = nn::elu(x, cache);
    h = conv1.forward(h, cache);
    h = nn::elu(h, cache);
    h = conv2.forward(h, cache);
    return x + h;
}

Eigen::MatrixXf ResidualUnit::backward(const Eigen::MatrixXf& dy, nn::Cache& cache) {
    Eigen::MatrixXf dh = conv2.backward(dy, cache);
    dh = nn::elu_backward(dh, cache);
    dh = conv1.backward(dh, cache);
    dh = nn::elu_backward(dh, cache);
    return dy + dh;
}

std::vector<nn::Parameter*> ResidualUnit::parameters() {
    auto out = conv1.parameters();
    auto p2 = conv2.parameters();
    out.insert(out.end(), p2.begin(), p2.end());
    return out;
}

ResidualUnitT::ResidualUnitT(int channels, int kernel)
    : conv1(nn::ConvTranspose1d::same(channels, channels, kernel)),
      conv2(nn::ConvTranspose1d::same(channels, channels, kernel)) {}

Eigen::MatrixXf ResidualUnitT::forward(const Eigen::MatrixXf& x, nn::Cache& cache) const {
    Eigen::MatrixXf h = nn::elu(x, cache);
    h = conv1.forward(h, cache);
    h = nn::elu(h, cache);
    h = conv2.forward(h, cache);
    return x + h;
}

Eigen::MatrixXf ResidualUnitT::backward(const Eigen::MatrixXf& dy, nn::Cache& cache) {
    Eigen::MatrixXf dh = conv2.backward(dy, cache);
    dh = nn::elu_backward(dh, cache);
    dh = conv1.backward(dh, cache);
    dh = nn::elu_backward(dh, cache);
    return dy + dh;
}

std::vector<nn::Parameter*> ResidualUnitT::parameters() {
    auto out = conv1.parameters();
    auto p2 = conv2.parameters();
    out.insert(out.end(), p2.begin(), p2.end());
    return out;
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(const EncoderConfig& cfg)
    : cfg_(cfg),
      input_conv_(nn::Conv1d::same(cfg.in_dim, cfg.channels, cfg.input_kernel)),
      output_conv_(nn::Conv1d::same(cfg.channels, cfg.channels, cfg.output_kernel)) {
    for (int b = 0; b < cfg.n_blocks; ++b) {
        Block block{nn::Conv1d::same(cfg.channels, cfg.channels, cfg.block_kernel), {}};
        for (int u = 0; u < cfg.units_per_block; ++u) {
            const int dil = cfg.dilations[u % cfg.dilations.size()];
            block.units.emplace_back(cfg.channels, cfg.unit_kernel, dil);
        }
        blocks_.push_back(std::move(block));
    }
}

void Encoder::init(std::mt19937_64& rng) {
    input_conv_.init(rng);
    for (auto& block : blocks_) {
        block.block_conv.init(rng);
        for (auto& unit : block.units) {
            unit.conv1.init(rng);
            unit.conv2.init(rng);
        }
    }
    output_conv_.init(rng);
}

Eigen::MatrixXf Encoder::forward(const Eigen::MatrixXf& x, nn::Cache& cache) const {
    if (int(x.rows()) != cfg_.in_dim)
        throw std::invalid_argument("Encoder: input bin count mismatch");
    Eigen::MatrixXf h = input_conv_.forward(x, cache);
    for (const auto& block : blocks_) {
        h = nn::elu(h, cache);
        h = block.block_conv.forward(h, cache);
        for (const auto& unit : block.units) h = unit.forward(h, cache);
    }
    h = nn::elu(h, cache);
    return output_conv_.forward(h, cache);
}

Eigen::MatrixXf Encoder::backward(const Eigen::MatrixXf& dy, nn::Cache& cache) {
    Eigen::MatrixXf dh = output_conv_.backward(dy, cache);
    dh = nn::elu_backward(dh, cache);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
        for (auto u = it->units.rbegin(); u != it->units.rend(); ++u) dh = u->backward(dh, cache);
        dh = it->block_conv.backward(dh, cache);
        dh = nn::elu_backward(dh, cache);
    }
    return input_conv_.backward(dh, cache);
}

std::vector<nn::Parameter*> Encoder::parameters() {
    std::vector<nn::Parameter*> out = input_conv_.parameters();
    for (auto& block : blocks_) {
        auto bp = block.block_conv.parameters();
        out.insert(out.end(), bp.begin(), bp.end());
        for (auto& unit : block.units) {
            auto up = unit.parameters();
            out.insert(out.end(), up.begin(), up.end());
        }
    }
    auto op = output_conv_.parameters();
    out.insert(out.end(), op.begin(), op.end());
    return out;
}

// ---------------------------------------------------------------------------
// Decoder

Decoder::Decoder(const EncoderConfig& cfg)
    : cfg_(cfg),
      input_conv_(nn::Conv1d::same(cfg.channels, cfg.channels, cfg.output_kernel)),
      output_conv_(nn::ConvTranspose1d::same(cfg.channels, cfg.in_dim, cfg.input_kernel)) {
    for (int b = 0; b < cfg.n_blocks; ++b) {
        Block block{{}, nn::ConvTranspose1d::same(cfg.channels, cfg.channels, cfg.block_kernel)};
        for (int u = 0; u < cfg.units_per_block; ++u)
            block.units.emplace_back(cfg.channels, cfg.unit_kernel);
        blocks_.push_back(std::move(block));
    }
}

void Decoder::init(std::mt19937_64& rng) {
    input_conv_.init(rng);
    for (auto& block : blocks_) {
        for (auto& unit : block.units) {
            unit.conv1.init(rng);
            unit.conv2.init(rng);
        }
        block.block_conv.init(rng);
    }
    output_conv_.zero_init();  // stable early training
}

Eigen::MatrixXf Decoder::forward(const Eigen::MatrixXf& q, nn::Cache& cache) const {
    if (int(q.rows()) != cfg_.channels)
        throw std::invalid_argument("Decoder: latent channel mismatch");
    Eigen::MatrixXf h = input_conv_.forward(q, cache);
    for (const auto& block : blocks_) {
        for (const auto& unit : block.units) h = unit.forward(h, cache);
        h = nn::elu(h, cache);
        h = block.block_conv.forward(h, cache);
    }
    h = nn::elu(h, cache);
    return output_conv_.forward(h, cache);
}

Eigen::MatrixXf Decoder::backward(const Eigen::MatrixXf& dy, nn::Cache& cache) {
    Eigen::MatrixXf dh = output_conv_.backward(dy, cache);
    dh = nn::elu_backward(dh, cache);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
        dh = it->block_conv.backward(dh, cache);
        dh = nn::elu_backward(dh, cache);
        for (auto u = it->units.rbegin(); u != it->units.rend(); ++u) dh = u->backward(dh, cache);
    }
    return input_conv_.backward(dh, cache);
}

std::vector<nn::Parameter*> Decoder::parameters() {
    std::vector<nn::Parameter*> out = input_conv_.parameters();
    for (auto& block : blocks_) {
        for (auto& unit : block.units) {
            auto up = unit.parameters();
            out.insert(out.end(), up.begin(), up.end());
        }
        auto bp = block.block_conv.parameters();
        out.insert(out.end(), bp.begin(), bp.end());
    }
    auto op = output_conv_.parameters();
    out.insert(out.end(), op.begin(), op.end());
    return out;
}

// ---------------------------------------------------------------------------
// CodecModel

CodecModel::CodecModel(const CodecConfig& cfg)
    : config(cfg),
      encoder(EncoderConfig::from_codec(cfg)),
      decoder(EncoderConfig::from_codec(cfg)) {
    config.validate();
    for (rvq::RvqStack* stack : {&real_rvq, &imag_rvq}) {
        stack->stages.clear();
        for (int s = 0; s < cfg.n_stages; ++s)
            stack->stages.push_back(rvq::Codebook::zeros(cfg.codebook_size(), cfg.model_channels));
    }
}

void CodecModel::init(uint64_t seed) {
    std::mt19937_64 rng(seed);
    encoder.init(rng);
    decoder.init(rng);
}

std::vector<nn::Parameter*> CodecModel::parameters() {
    auto out = encoder.parameters();
    auto dp = decoder.parameters();
    out.insert(out.end(), dp.begin(), dp.end());
    return out;
}

BranchLatents encode(const dsp::ComplexSpectrogram& spec, const CodecModel& model,
                     nn::Cache& real_cache, nn::Cache& imag_cache) {
    if (spec.bins() != model.config.bins())
        throw std::invalid_argument("encode: spectrogram bin count mismatch");
    BranchLatents out;
    out.real = model.encoder.forward(spec.data.real(), real_cache);
    out.imag = model.encoder.forward(spec.data.imag(), imag_cache);
    return out;
}

dsp::ComplexSpectrogram decode(const Eigen::MatrixXf& real_q, const Eigen::MatrixXf& imag_q,
                               const CodecModel& model, nn::Cache& real_cache,
                               nn::Cache& imag_cache, const CodecConfig& cfg) {
    if (real_q.cols() != imag_q.cols())
        throw std::invalid_argument("decode: branch frame counts differ");
    dsp::ComplexSpectrogram spec;
    spec.hop = cfg.hop;
    spec.fft_size = cfg.fft_size;
    spec.sample_rate = cfg.sample_rate;
    const Eigen::MatrixXf re = model.decoder.forward(real_q, real_cache);
    const Eigen::MatrixXf im = model.decoder.forward(imag_q, imag_cache);
    spec.data = re.cast<std::complex<float>>() +
                std::complex<float>(0.f, 1.f) * im.cast<std::complex<float>>();
    return spec;
}

CodecForwardResult codec_forward(const dsp::WaveSegment& wave, const CodecModel& model,
                                 bool bypass_rvq) {
    CodecForwardResult r;
    r.spec = dsp::stft(wave, model.config.hop, model.config.fft_size);
    r.latents = encode(r.spec, model, r.enc_real_cache, r.enc_imag_cache);

    Eigen::MatrixXf real_q, imag_q;
    if (bypass_rvq) {
        real_q = r.latents.real;
        imag_q = r.latents.imag;
        r.commitment = 0.f;
    } else {
        r.real_q = rvq::rvq_encode(r.latents.real, model.real_rvq);
        r.imag_q = rvq::rvq_encode(r.latents.imag, model.imag_rvq);
        real_q = r.real_q.quantized;
        imag_q = r.imag_q.quantized;
        r.commitment = 0.5f * (rvq::commitment_loss(r.latents.real, real_q) +
                               rvq::commitment_loss(r.latents.imag, imag_q));
    }

    r.spec_hat = decode(real_q, imag_q, model, r.dec_real_cache, r.dec_imag_cache, model.config);
    r.wave_hat = dsp::istft(r.spec_hat, wave.length());
    return r;
}

Eigen::MatrixXi encode_to_indices(const dsp::WaveSegment& wave, const CodecModel& model) {
    nn::Cache c1, c2;
    const dsp::ComplexSpectrogram spec = dsp::stft(wave, model.config.hop, model.config.fft_size);
    const BranchLatents latents = encode(spec, model, c1, c2);
    const rvq::QuantizationResult rq = rvq::rvq_encode(latents.real, model.real_rvq);
    const rvq::QuantizationResult iq = rvq::rvq_encode(latents.imag, model.imag_rvq);
    Eigen::MatrixXi indices(rq.indices.rows() + iq.indices.rows(), rq.indices.cols());
    indices << rq.indices, iq.indices;
    return indices;
}

dsp::WaveSegment decode_from_indices(const Eigen::MatrixXi& indices, int n_samples,
                                     const CodecModel& model) {
    const int n_real = model.real_rvq.n_stages();
    const Eigen::MatrixXf real_q = rvq::rvq_decode(indices.topRows(n_real), model.real_rvq);
    const Eigen::MatrixXf imag_q =
        rvq::rvq_decode(indices.bottomRows(indices.rows() - n_real), model.imag_rvq);
    nn::Cache c1, c2;
    const dsp::ComplexSpectrogram spec_hat =
        decode(real_q, imag_q, model, c1, c2, model.config);
    return dsp::istft(spec_hat, n_samples);
}

// ---------------------------------------------------------------------------
// Checkpoint IO

void save_model(std::ostream& out, const CodecModel& model) {
    const char magic[4] = {'C', 'P', 'X', 'M'};
    write_bytes(out, magic, 4);
    const uint32_t version = 1;
    write_u32(out, version);

    const CodecConfig& c = model.config;
    write_u32(out, uint32_t(c.sample_rate));
    write_u32(out, uint32_t(c.hop));
    write_u32(out, uint32_t(c.fft_size));
    write_u32(out, uint32_t(c.model_channels));
    write_u32(out, uint32_t(c.n_blocks));
    write_u32(out, uint32_t(c.units_per_block));
    write_u32(out, uint32_t(c.n_stages));
    write_u32(out, uint32_t(c.codebook_bits));
    write_f32(out, c.loss_weights.w_vq);
    write_f32(out, c.loss_weights.w_mel);
    write_f32(out, c.loss_weights.w_mse);
    write_f32(out, c.loss_weights.w_mae);
    write_f32(out, c.companding.alpha);
    write_f32(out, c.companding.beta);

    auto params = const_cast<CodecModel&>(model).parameters();
    write_u32(out, uint32_t(params.size()));
    for (const nn::Parameter* p : params) {
        write_u32(out, uint32_t(p->value.rows()));
        write_u32(out, uint32_t(p->value.cols()));
        write_bytes(out, p->value.data(), sizeof(float) * p->value.size());
    }

    rvq::save_stack(out, model.real_rvq, 0);
    rvq::save_stack(out, model.imag_rvq, 1);
    const uint8_t initialized = model.rvq_initialized ? 1 : 0;
    write_bytes(out, &initialized, 1);
}

CodecModel load_model(std::istream& in) {
    char magic[4];
    read_bytes(in, magic, 4);
    if (std::memcmp(magic, "CPXM", 4) != 0) throw std::runtime_error("model checkpoint: bad magic");
    const uint32_t version = read_u32(in);
    if (version != 1)
        throw std::runtime_error("model checkpoint: unsupported version " + std::to_string(version));

    CodecConfig c;
    c.sample_rate = int(read_u32(in));
    c.hop = int(read_u32(in));
    c.fft_size = int(read_u32(in));
    c.model_channels = int(read_u32(in));
    c.n_blocks = int(read_u32(in));
    c.units_per_block = int(read_u32(in));
    c.n_stages = int(read_u32(in));
    c.codebook_bits = int(read_u32(in));
    c.loss_weights.w_vq = read_f32(in);
    c.loss_weights.w_mel = read_f32(in);
    c.loss_weights.w_mse = read_f32(in);
    c.loss_weights.w_mae = read_f32(in);
    c.companding.alpha = read_f32(in);
    c.companding.beta = read_f32(in);

    CodecModel model(c);
    auto params = model.parameters();
    const uint32_t n = read_u32(in);
    if (n != params.size()) throw std::runtime_error("model checkpoint: parameter count mismatch");
    for (nn::Parameter* p : params) {
        const uint32_t rows = read_u32(in);
        const uint32_t cols = read_u32(in);
        if (int(rows) != p->value.rows() || int(cols) != p->value.cols())
            throw std::runtime_error("model checkpoint: parameter shape mismatch");
        read_bytes(in, p->value.data(), sizeof(float) * p->value.size());
    }

    model.real_rvq = rvq::load_stack(in, 0);
    model.imag_rvq = rvq::load_stack(in, 1);
    uint8_t initialized = 0;
    read_bytes(in, &initialized, 1);
    model.rvq_initialized = initialized != 0;
    return model;
}

void save_model_file(const std::string& path, const CodecModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    save_model(out, model);
}

CodecModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_model(in);
}

}  // namespace complexdec::codec
