// model.hpp
// The codec networks: a shared-weight convolutional encoder/decoder applied
// to the real and imaginary spectra separately, with an independent RVQ
// stack per branch. All layers are stride 1, so frame count is preserved
// end to end.

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "complexdec/config.hpp"
#include "complexdec/dsp/stft.hpp"
#include "complexdec/nn/nn.hpp"
#include "complexdec/rvq/rvq.hpp"

namespace complexdec::codec {

struct EncoderConfig {
    int in_dim = 256;  // spectrogram bins
    int channels = 256;
    int input_kernel = 7;
    int n_blocks = 4;
    int units_per_block = 3;
    int unit_kernel = 7;
    std::vector<int> dilations = {1, 3, 9};  // per unit within a block
    int block_kernel = 2;
    int output_kernel = 3;

    static EncoderConfig from_codec(const CodecConfig& c);
};

// ELU -> dilated conv -> ELU -> dilated conv, plus identity skip.
struct ResidualUnit {
    nn::Conv1d conv1, conv2;

    ResidualUnit(int channels, int kernel, int dilation);
    Eigen::MatrixXf forward(const Eigen::MatrixXf& x, nn::Cache& cache) const;
    Eigen::MatrixXf backward(const Eigen::MatrixXf& dy, nn::Cache& cache);
    std::vector<nn::Parameter*> parameters();
};

// Transpose-conv mirror of ResidualUnit (plain, undilated).
struct ResidualUnitT {
    nn::ConvTranspose1d conv1, conv2;

    ResidualUnitT(int channels, int kernel);
    Eigen::MatrixXf forward(const Eigen::MatrixXf& x, nn::Cache& cache) const;
    Eigen::MatrixXf backward(const Eigen::MatrixXf& dy, nn::Cache& cache);
    std::vector<nn::Parameter*> parameters();
};

class Encoder {
public:
    explicit Encoder(const EncoderConfig& cfg);

    void init(std::mt19937_64& rng);
    Eigen::MatrixXf forward(const Eigen::MatrixXf& x, nn::Cache& cache) const;  // bins x T -> C x T
    Eigen::MatrixXf backward(const Eigen::MatrixXf& dy, nn::Cache& cache);
    std::vector<nn::Parameter*> parameters();
    const EncoderConfig& config() const { return cfg_; }

private:
    struct Block {
        nn::Conv1d block_conv;
        std::vector<ResidualUnit> units;
    };
    EncoderConfig cfg_;
    nn::Conv1d input_conv_;
    std::vector<Block> blocks_;
    nn::Conv1d output_conv_;
};

class Decoder {
public:
    explicit Decoder(const EncoderConfig& cfg);  // mirrored layout

    void init(std::mt19937_64& rng);  // final layer stays zero-initialized
    Eigen::MatrixXf forward(const Eigen::MatrixXf& q, nn::Cache& cache) const;  // C x T -> bins x T
    Eigen::MatrixXf backward(const Eigen::MatrixXf& dy, nn::Cache& cache);
    std::vector<nn::Parameter*> parameters();

private:
    struct Block {
        std::vector<ResidualUnitT> units;
        nn::ConvTranspose1d block_conv;
    };
    EncoderConfig cfg_;
    nn::Conv1d input_conv_;
    std::vector<Block> blocks_;
    nn::ConvTranspose1d output_conv_;
};

struct CodecModel {
    CodecConfig config;
    Encoder encoder;
    Decoder decoder;
    rvq::RvqStack real_rvq;
    rvq::RvqStack imag_rvq;
    bool rvq_initialized = false;

    explicit CodecModel(const CodecConfig& cfg);

    void init(uint64_t seed);
    std::vector<nn::Parameter*> parameters();
};

struct BranchLatents {
    Eigen::MatrixXf real;  // C x T
    Eigen::MatrixXf imag;  // C x T
};

// Shared encoder applied to each branch; caches are per branch so the two
// backwards can run independently (weight grads accumulate).
BranchLatents encode(const dsp::ComplexSpectrogram& spec, const CodecModel& model,
                     nn::Cache& real_cache, nn::Cache& imag_cache);

dsp::ComplexSpectrogram decode(const Eigen::MatrixXf& real_q, const Eigen::MatrixXf& imag_q,
                               const CodecModel& model, nn::Cache& real_cache,
                               nn::Cache& imag_cache, const CodecConfig& cfg);

struct CodecForwardResult {
    dsp::WaveSegment wave_hat;
    dsp::ComplexSpectrogram spec;      // input spectrum
    dsp::ComplexSpectrogram spec_hat;  // reconstruction
    BranchLatents latents;
    rvq::QuantizationResult real_q;
    rvq::QuantizationResult imag_q;
    float commitment = 0.f;  // mean of the two branch commitment losses
    // caches for the backward pass, LIFO per branch
    nn::Cache enc_real_cache, enc_imag_cache, dec_real_cache, dec_imag_cache;
};

// stft -> encode -> rvq per branch -> decode -> istft. With bypass_rvq the
// quantizer is the identity (latents pass straight through).
CodecForwardResult codec_forward(const dsp::WaveSegment& wave, const CodecModel& model,
                                 bool bypass_rvq = false);

// Inference-only paths used by the CLI.
Eigen::MatrixXi encode_to_indices(const dsp::WaveSegment& wave, const CodecModel& model);
dsp::WaveSegment decode_from_indices(const Eigen::MatrixXi& indices, int n_samples,
                                     const CodecModel& model);

void save_model(std::ostream& out, const CodecModel& model);
CodecModel load_model(std::istream& in);
void save_model_file(const std::string& path, const CodecModel& model);
CodecModel load_model_file(const std::string& path);

}  // namespace complexdec::codec
