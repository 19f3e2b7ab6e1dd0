#include "complexdec/diffusion/spf.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "complexdec/dsp/compand.hpp"

namespace complexdec::diffusion {

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t tile) {
    // splitmix64 of (seed + tile + 1)
    uint64_t z = seed + (tile + 1) * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

void write_bytes(std::ostream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), std::streamsize(n));
}
void read_bytes(std::istream& in, void* p, size_t n) {
    if (!in.read(static_cast<char*>(p), std::streamsize(n)))
        throw std::runtime_error("spf checkpoint: unexpected end of stream");
}

}  // namespace

ScoreFn SpfModel::score_fn() const {
    const ScoreNet* net_ptr = &net;
    const SdeConfig sde_cfg = sde;
    return [net_ptr, sde_cfg](const Eigen::MatrixXcf& x_t, const Eigen::MatrixXcf& x_hat,
                              float t) -> Eigen::MatrixXcf {
        return net_ptr->forward(x_t, x_hat, t) / kernel_sigma(t, sde_cfg);
    };
}

dsp::ComplexSpectrogram enhance(const dsp::ComplexSpectrogram& decoded, const ScoreFn& score,
                                const CompandingParams& params, const SdeConfig& cfg,
                                uint64_t seed, int tile_frames) {
    if (tile_frames < 1) throw std::invalid_argument("enhance: tile_frames must be >= 1");
    const dsp::ComplexSpectrogram companded = dsp::compand(decoded, params);
    const int frames = companded.frames();
    const int bins = companded.bins();
    const int n_tiles = (frames + tile_frames - 1) / tile_frames;

    Eigen::MatrixXcf refined(bins, frames);
    for (int tile = 0; tile < n_tiles; ++tile) {
        const int start = tile * tile_frames;
        const int width = std::min(tile_frames, frames - start);
        Eigen::MatrixXcf x_hat = Eigen::MatrixXcf::Zero(bins, tile_frames);
        x_hat.leftCols(width) = companded.data.middleCols(start, width);
        const Eigen::MatrixXcf out = pc_sample(score, x_hat, cfg, mix_seed(seed, uint64_t(tile)));
        refined.middleCols(start, width) = out.leftCols(width);
    }

    dsp::ComplexSpectrogram result = decoded;
    result.data = refined;
    return dsp::decompand(result, params);
}

void save_spf_file(const std::string& path, const SpfModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    const char magic[4] = {'C', 'P', 'X', 'S'};
    write_bytes(out, magic, 4);
    const uint32_t version = 1;
    write_bytes(out, &version, 4);

    const int32_t net_ints[7] = {model.net_cfg.in_channels, model.net_cfg.out_channels,
                                 model.net_cfg.base_channels, model.net_cfg.levels,
                                 model.net_cfg.channel_cap, model.net_cfg.emb_dim,
                                 model.net_cfg.n_freqs};
    write_bytes(out, net_ints, sizeof(net_ints));
    const float sde_floats[7] = {model.sde.gamma, model.sde.sigma_min, model.sde.sigma_max,
                                 model.sde.T,     model.sde.t_eps,     float(model.sde.n_steps),
                                 model.sde.snr};
    write_bytes(out, sde_floats, sizeof(sde_floats));
    const float cp[2] = {model.companding.alpha, model.companding.beta};
    write_bytes(out, cp, sizeof(cp));

    auto params = const_cast<SpfModel&>(model).net.parameters();
    const uint32_t n = uint32_t(params.size());
    write_bytes(out, &n, 4);
    for (const nn::Parameter* p : params) {
        const uint32_t rows = uint32_t(p->value.rows()), cols = uint32_t(p->value.cols());
        write_bytes(out, &rows, 4);
        write_bytes(out, &cols, 4);
        write_bytes(out, p->value.data(), sizeof(float) * p->value.size());
    }
}

SpfModel load_spf_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    read_bytes(in, magic, 4);
    if (std::memcmp(magic, "CPXS", 4) != 0) throw std::runtime_error("spf checkpoint: bad magic");
    uint32_t version = 0;
    read_bytes(in, &version, 4);
    if (version != 1)
        throw std::runtime_error("spf checkpoint: unsupported version " + std::to_string(version));

    int32_t net_ints[7];
    read_bytes(in, net_ints, sizeof(net_ints));
    ScoreNetConfig cfg;
    cfg.in_channels = net_ints[0];
    cfg.out_channels = net_ints[1];
    cfg.base_channels = net_ints[2];
    cfg.levels = net_ints[3];
    cfg.channel_cap = net_ints[4];
    cfg.emb_dim = net_ints[5];
    cfg.n_freqs = net_ints[6];

    float sde_floats[7];
    read_bytes(in, sde_floats, sizeof(sde_floats));
    SdeConfig sde;
    sde.gamma = sde_floats[0];
    sde.sigma_min = sde_floats[1];
    sde.sigma_max = sde_floats[2];
    sde.T = sde_floats[3];
    sde.t_eps = sde_floats[4];
    sde.n_steps = int(sde_floats[5]);
    sde.snr = sde_floats[6];

    float cp[2];
    read_bytes(in, cp, sizeof(cp));
    CompandingParams companding{cp[0], cp[1]};

    SpfModel model(cfg, sde, companding);
    auto params = model.net.parameters();
    uint32_t n = 0;
    read_bytes(in, &n, 4);
    if (n != params.size()) throw std::runtime_error("spf checkpoint: parameter count mismatch");
    for (nn::Parameter* p : params) {
        uint32_t rows = 0, cols = 0;
        read_bytes(in, &rows, 4);
        read_bytes(in, &cols, 4);
        if (int(rows) != p->value.rows() || int(cols) != p->value.cols())
            throw std::runtime_error("spf checkpoint: parameter shape mismatch");
        read_bytes(in, p->value.data(), sizeof(float) * p->value.size());
    }
    return model;
}

}  // namespace complexdec::diffusion
