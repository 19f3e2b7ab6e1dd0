// spf.hpp
// Score-based post-filter: companded-domain refinement of decoded complex
// spectra via the PC sampler, processed in 256-frame tiles.

#pragma once

#include <cstdint>
#include <string>

#include "complexdec/config.hpp"
#include "complexdec/diffusion/sampler.hpp"
#include "complexdec/diffusion/score_net.hpp"
#include "complexdec/dsp/stft.hpp"

namespace complexdec::diffusion {

struct SpfModel {
    ScoreNetConfig net_cfg;
    SdeConfig sde;
    CompandingParams companding;
    ScoreNet net;

    explicit SpfModel(const ScoreNetConfig& cfg = ScoreNetConfig::desk_scale(),
                      const SdeConfig& sde_cfg = {}, const CompandingParams& cp = {})
        : net_cfg(cfg), sde(sde_cfg), companding(cp), net(cfg) {}

    // The net predicts sigma(t) * score; divide it back out here.
    ScoreFn score_fn() const;
};

// compand -> 256-frame tiles (zero-padded tail) -> pc_sample per tile ->
// stitch -> decompand. Per-tile seeds derive from (seed, tile index), so
// the result does not depend on processing order.
dsp::ComplexSpectrogram enhance(const dsp::ComplexSpectrogram& decoded, const ScoreFn& score,
                                const CompandingParams& params, const SdeConfig& cfg,
                                uint64_t seed, int tile_frames = 256);

void save_spf_file(const std::string& path, const SpfModel& model);
SpfModel load_spf_file(const std::string& path);

}  // namespace complexdec::diffusion
