// config.hpp
// Central codec configuration and the derived quantities everything else
// depends on (frame rate, bins, bitrate). One struct, one source of truth.

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace complexdec {

struct CompandingParams {
    float alpha = 0.5f;  // amplitude exponent
    float beta = 0.15f;  // amplitude scale

    void validate() const {
        if (alpha <= 0.f || beta <= 0.f)
            throw std::invalid_argument("CompandingParams: alpha and beta must be > 0");
    }
};

struct LossWeights {
    float w_vq = 1.0f;
    float w_mel = 45.0f;
    float w_mse = 200.0f;
    float w_mae = 200.0f;
};

struct CodecConfig {
    int sample_rate = 48000;
    int hop = 320;
    int fft_size = 510;
    int channels = 1;  // mono only

    // network
    int model_channels = 256;  // Conv1D channel count == latent dim
    int n_blocks = 4;
    int units_per_block = 3;

    // quantizer (per branch)
    int n_stages = 8;
    int codebook_bits = 10;

    LossWeights loss_weights;
    CompandingParams companding;

    int bins() const { return fft_size / 2 + 1; }
    int codebook_size() const { return 1 << codebook_bits; }
    double frame_rate() const { return double(sample_rate) / double(hop); }
    int total_stages() const { return 2 * n_stages; }  // real + imaginary

    void validate() const {
        if (sample_rate <= 0) throw std::invalid_argument("CodecConfig: sample_rate must be > 0");
        if (hop <= 0 || fft_size <= 0 || hop > fft_size)
            throw std::invalid_argument("CodecConfig: require 0 < hop <= fft_size");
        if (fft_size % 2 != 0)
            throw std::invalid_argument("CodecConfig: fft_size must be even");
        if (model_channels <= 0 || n_stages <= 0)
            throw std::invalid_argument("CodecConfig: model_channels and n_stages must be > 0");
        if (codebook_bits < 1 || codebook_bits > 16)
            throw std::invalid_argument("CodecConfig: codebook_bits must be in [1,16]");
        companding.validate();
    }

    // Paper-scale operating point: 150 Hz x 16 codebooks x 10 bits = 24 kbps.
    static CodecConfig defaults() { return CodecConfig{}; }

    // CI-speed preset: same STFT geometry, tiny network and codebooks.
    static CodecConfig tiny() {
        CodecConfig c;
        c.model_channels = 8;
        c.n_blocks = 2;
        c.units_per_block = 2;
        c.n_stages = 2;
        c.codebook_bits = 4;  // K = 16
        return c;
    }
};

struct TrainConfig {
    float lr = 1e-4f;  // no decay
    int batch_size = 16;
    int segment_length = 96000;  // samples
    int max_steps = 500000;
    uint64_t seed = 0;
    int checkpoint_every = 10000;
    int log_every = 100;
    LossWeights loss_weights;

    void validate(int hop) const {
        if (segment_length <= 0 || segment_length % hop != 0)
            throw std::invalid_argument("TrainConfig: segment_length must be a positive multiple of hop");
        if (batch_size <= 0) throw std::invalid_argument("TrainConfig: batch_size must be > 0");
        if (lr <= 0.f) throw std::invalid_argument("TrainConfig: lr must be > 0");
    }

    static TrainConfig desk_scale() {
        TrainConfig t;
        t.lr = 2e-3f;
        t.batch_size = 4;
        t.segment_length = 32000;
        t.max_steps = 2000;
        t.checkpoint_every = 2000;
        return t;
    }
};

// Flat key=value config file, '#' comments. Unknown keys are errors.
std::map<std::string, std::string> parse_kv_file(const std::string& path);
CodecConfig load_codec_config(const std::string& path);
TrainConfig load_train_config(const std::string& path);

}  // namespace complexdec
