// train.hpp
// Training loops for the codec (spectral reconstruction objective with
// straight-through quantization and EMA codebooks) and the score-based
// post-filter (denoising score matching on companded spectrum pairs).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "complexdec/codec/model.hpp"
#include "complexdec/config.hpp"
#include "complexdec/diffusion/spf.hpp"
#include "complexdec/harness/dataset.hpp"
#include "complexdec/losses/losses.hpp"

namespace complexdec::harness {

struct TrainCodecResult {
    std::vector<losses::LossReport> logged;  // step 0, every log_every, final step
    float step0_total = 0.f;
    float final_total = 0.f;
    double final_si_sdr_db = 0.0;  // on the last training segment
    std::string checkpoint_path;
};

// Trains a fresh model on the manifest's train split (falling back to all
// entries). Deterministic for a fixed seed. Unreadable files are skipped
// with a warning; an empty usable set is an error. Checkpoints land in
// out_dir as codec.cpxm. With max_steps == 0 the initialized model is saved
// untouched.
TrainCodecResult train_codec(const DatasetManifest& manifest, const CodecConfig& codec_cfg,
                             const TrainConfig& train_cfg, const std::string& out_dir,
                             std::ostream* log = nullptr);

struct TrainSpfResult {
    float step0_loss = 0.f;
    float final_loss = 0.f;
    std::string checkpoint_path;
};

// Trains spf in place against pairs (companded clean spectrum, companded
// codec output) from the manifest, on random crop_size x crop_size tiles.
// Checkpoint lands in out_dir as spf.cpxs.
TrainSpfResult train_spf(const DatasetManifest& manifest, const codec::CodecModel& codec_model,
                         diffusion::SpfModel& spf, const TrainConfig& train_cfg,
                         const std::string& out_dir, std::ostream* log = nullptr,
                         int crop_size = 64);

}  // namespace complexdec::harness
