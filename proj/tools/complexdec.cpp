// complexdec: command-line front end for the codec, post-filter, and
// evaluation harness.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "complexdec/bitstream/bitstream.hpp"
#include "complexdec/codec/model.hpp"
#include "complexdec/config.hpp"
#include "complexdec/diffusion/spf.hpp"
#include "complexdec/dsp/wav.hpp"
#include "complexdec/harness/dataset.hpp"
#include "complexdec/harness/metrics.hpp"
#include "complexdec/harness/train.hpp"

namespace {

using namespace complexdec;

// Checkpoint directory: --out flag beats COMPLEXDEC_CHECKPOINT_DIR beats ./checkpoints.
std::string checkpoint_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("COMPLEXDEC_CHECKPOINT_DIR"); env != nullptr && *env != '\0')
        return env;
    return "checkpoints";
}

bitstream::BitstreamHeader header_for(const CodecConfig& c, int n_frames, int n_samples) {
    bitstream::BitstreamHeader h;
    h.sample_rate = uint32_t(c.sample_rate);
    h.hop = uint32_t(c.hop);
    h.fft_size = uint32_t(c.fft_size);
    h.n_stages_real = uint8_t(c.n_stages);
    h.n_stages_imag = uint8_t(c.n_stages);
    h.bits_per_index = uint8_t(c.codebook_bits);
    h.n_frames = uint32_t(n_frames);
    h.n_samples = uint32_t(n_samples);
    return h;
}

int cmd_train_codec(const std::string& manifest_path, const std::string& codec_cfg_path,
                    const std::string& train_cfg_path, const std::string& out_flag,
                    const std::string& log_path) {
    const harness::DatasetManifest manifest = harness::load_manifest(manifest_path);
    const CodecConfig codec_cfg =
        codec_cfg_path.empty() ? CodecConfig::defaults() : load_codec_config(codec_cfg_path);
    const TrainConfig train_cfg =
        train_cfg_path.empty() ? TrainConfig{} : load_train_config(train_cfg_path);
    const std::string out_dir = checkpoint_dir(out_flag);

    std::ofstream log_file;
    std::ostream* log = &std::cout;
    if (!log_path.empty()) {
        log_file.open(log_path);
        if (!log_file) throw std::runtime_error("cannot open log file " + log_path);
        log = &log_file;
    }
    const harness::TrainCodecResult r =
        harness::train_codec(manifest, codec_cfg, train_cfg, out_dir, log);
    std::cout << "checkpoint: " << r.checkpoint_path << "\n"
              << "final total loss: " << r.final_total << " (step 0: " << r.step0_total << ")\n";
    return 0;
}

int cmd_train_spf(const std::string& manifest_path, const std::string& codec_path,
                  const std::string& train_cfg_path, const std::string& out_flag,
                  const std::string& log_path) {
    const harness::DatasetManifest manifest = harness::load_manifest(manifest_path);
    const codec::CodecModel model = codec::load_model_file(codec_path);
    const TrainConfig train_cfg =
        train_cfg_path.empty() ? TrainConfig{} : load_train_config(train_cfg_path);
    const std::string out_dir = checkpoint_dir(out_flag);

    diffusion::SpfModel spf;
    spf.companding = model.config.companding;
    spf.net.init(train_cfg.seed);

    std::ofstream log_file;
    std::ostream* log = &std::cout;
    if (!log_path.empty()) {
        log_file.open(log_path);
        if (!log_file) throw std::runtime_error("cannot open log file " + log_path);
        log = &log_file;
    }
    const harness::TrainSpfResult r =
        harness::train_spf(manifest, model, spf, train_cfg, out_dir, log);
    std::cout << "checkpoint: " << r.checkpoint_path << "\n"
              << "final score loss: " << r.final_loss << " (step 0: " << r.step0_loss << ")\n";
    return 0;
}

int cmd_encode(const std::string& in_wav, const std::string& out_cpxd,
               const std::string& model_path) {
    const codec::CodecModel model = codec::load_model_file(model_path);
    const dsp::WaveSegment wave = dsp::read_wav(in_wav);
    const Eigen::MatrixXi indices = codec::encode_to_indices(wave, model);
    const bitstream::BitstreamHeader h =
        header_for(model.config, int(indices.cols()), wave.length());
    bitstream::write_file(out_cpxd, bitstream::pack(indices, h));
    std::cout << in_wav << " -> " << out_cpxd << ": " << indices.cols() << " frames, "
              << bitstream::bitrate(model.config.frame_rate(), h.total_stages(),
                                    h.bits_per_index)
              << " bps\n";
    return 0;
}

int cmd_decode(const std::string& in_cpxd, const std::string& out_wav,
               const std::string& model_path, const std::string& spf_path, uint64_t seed) {
    const codec::CodecModel model = codec::load_model_file(model_path);
    const bitstream::Unpacked u = bitstream::unpack(bitstream::read_file(in_cpxd));
    if (int(u.header.n_stages_real) != model.config.n_stages ||
        int(u.header.n_stages_imag) != model.config.n_stages ||
        int(u.header.bits_per_index) != model.config.codebook_bits)
        throw std::runtime_error("decode: bitstream does not match the model configuration");

    const int n_samples =
        u.header.n_samples > 0 ? int(u.header.n_samples) : int(u.header.n_frames * u.header.hop);

    dsp::WaveSegment wave_hat;
    if (spf_path.empty()) {
        wave_hat = codec::decode_from_indices(u.indices, n_samples, model);
    } else {
        const diffusion::SpfModel spf = diffusion::load_spf_file(spf_path);
        dsp::WaveSegment dummy;
        dummy.samples.assign(size_t(n_samples), 0.f);
        dummy.sample_rate = model.config.sample_rate;
        const int n_real = model.real_rvq.n_stages();
        const Eigen::MatrixXf real_q =
            rvq::rvq_decode(u.indices.topRows(n_real), model.real_rvq);
        const Eigen::MatrixXf imag_q =
            rvq::rvq_decode(u.indices.bottomRows(u.indices.rows() - n_real), model.imag_rvq);
        nn::Cache c1, c2;
        dsp::ComplexSpectrogram spec_hat =
            codec::decode(real_q, imag_q, model, c1, c2, model.config);
        spec_hat = diffusion::enhance(spec_hat, spf.score_fn(), spf.companding, spf.sde, seed);
        wave_hat = dsp::istft(spec_hat, n_samples);
    }
    wave_hat.sample_rate = int(u.header.sample_rate);
    dsp::write_wav(out_wav, wave_hat);
    std::cout << in_cpxd << " -> " << out_wav << ": " << wave_hat.length() << " samples\n";
    return 0;
}

int cmd_eval(const std::string& manifest_path, const std::string& model_path,
             const std::string& spf_path, uint64_t seed, const std::string& split,
             const std::string& report_path) {
    const harness::DatasetManifest manifest = harness::load_manifest(manifest_path);
    const codec::CodecModel model = codec::load_model_file(model_path);
    std::optional<diffusion::SpfModel> spf;
    if (!spf_path.empty()) spf = diffusion::load_spf_file(spf_path);

    const harness::MetricReport report =
        harness::evaluate(manifest, model, spf ? &*spf : nullptr, seed, split);
    const std::string lines = report.to_json_lines();
    if (report_path.empty()) {
        std::cout << lines;
    } else {
        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot open " + report_path);
        out << lines;
        std::cout << "report: " << report_path << "\n";
    }
    return 0;
}

int cmd_spectrogram(const std::string& in_wav, const std::string& out_image, int hop,
                    int fft_size) {
    CodecConfig cfg;
    cfg.hop = hop;
    cfg.fft_size = fft_size;
    harness::export_spectrogram_image(dsp::read_wav(in_wav), cfg, out_image);
    std::cout << in_wav << " -> " << out_image << "\n";
    return 0;
}

int cmd_info(const std::string& path) {
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".cpxd") {
        const bitstream::Unpacked u = bitstream::unpack(bitstream::read_file(path));
        const bitstream::BitstreamHeader& h = u.header;
        const double fr = double(h.sample_rate) / double(h.hop);
        std::cout << "bitstream " << path << "\n"
                  << "  version:        " << int(h.version) << "\n"
                  << "  sample_rate:    " << h.sample_rate << " Hz\n"
                  << "  hop:            " << h.hop << " samples (" << fr << " frames/s)\n"
                  << "  fft_size:       " << h.fft_size << "\n"
                  << "  stages:         " << int(h.n_stages_real) << " real + "
                  << int(h.n_stages_imag) << " imag\n"
                  << "  bits_per_index: " << int(h.bits_per_index) << "\n"
                  << "  n_frames:       " << h.n_frames << "\n"
                  << "  n_samples:      " << h.n_samples << "\n"
                  << "  bitrate:        "
                  << bitstream::bitrate(fr, h.total_stages(), h.bits_per_index) << " bps\n";
    } else if (ext == ".cpxm") {
        const codec::CodecModel model = codec::load_model_file(path);
        const CodecConfig& c = model.config;
        std::cout << "codec model " << path << "\n"
                  << "  sample_rate:    " << c.sample_rate << " Hz\n"
                  << "  hop/fft:        " << c.hop << "/" << c.fft_size << " (" << c.bins()
                  << " bins, " << c.frame_rate() << " frames/s)\n"
                  << "  channels:       " << c.model_channels << "\n"
                  << "  blocks/units:   " << c.n_blocks << "/" << c.units_per_block << "\n"
                  << "  rvq:            " << c.n_stages << " stages x " << c.codebook_size()
                  << " entries per branch"
                  << (model.rvq_initialized ? "" : " (uninitialized)") << "\n"
                  << "  bitrate:        "
                  << bitstream::bitrate(c.frame_rate(), c.total_stages(), c.codebook_bits)
                  << " bps\n";
    } else if (ext == ".cpxs") {
        const diffusion::SpfModel spf = diffusion::load_spf_file(path);
        std::cout << "post-filter " << path << "\n"
                  << "  unet:  base " << spf.net_cfg.base_channels << ", " << spf.net_cfg.levels
                  << " levels\n"
                  << "  sde:   gamma " << spf.sde.gamma << ", sigma [" << spf.sde.sigma_min
                  << ", " << spf.sde.sigma_max << "], " << spf.sde.n_steps << " steps\n";
    } else if (ext == ".wav") {
        const dsp::WaveSegment wave = dsp::read_wav(path);
        std::cout << "wav " << path << "\n"
                  << "  sample_rate: " << wave.sample_rate << " Hz\n"
                  << "  samples:     " << wave.length() << " ("
                  << double(wave.length()) / double(wave.sample_rate) << " s)\n";
    } else {
        throw std::runtime_error("info: unrecognized extension '" + ext + "'");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"complexdec: complex-spectral neural audio codec"};
    app.require_subcommand(1);

    std::string manifest, codec_cfg, train_cfg, out_dir, log_path;
    auto* tc = app.add_subcommand("train-codec", "Train the codec on a manifest");
    tc->add_option("--manifest", manifest, "dataset manifest file")->required();
    tc->add_option("--codec-config", codec_cfg, "codec key=value config file");
    tc->add_option("--train-config", train_cfg, "training key=value config file");
    tc->add_option("--out", out_dir, "checkpoint directory (or $COMPLEXDEC_CHECKPOINT_DIR)");
    tc->add_option("--log", log_path, "loss log file (JSON lines; default stdout)");

    std::string spf_manifest, spf_codec, spf_train, spf_out, spf_log;
    auto* ts = app.add_subcommand("train-spf", "Train the score-based post-filter");
    ts->add_option("--manifest", spf_manifest, "dataset manifest file")->required();
    ts->add_option("--codec", spf_codec, "trained codec checkpoint (.cpxm)")->required();
    ts->add_option("--train-config", spf_train, "training key=value config file");
    ts->add_option("--out", spf_out, "checkpoint directory (or $COMPLEXDEC_CHECKPOINT_DIR)");
    ts->add_option("--log", spf_log, "loss log file (JSON lines; default stdout)");

    std::string enc_in, enc_out, enc_model;
    auto* en = app.add_subcommand("encode", "WAV -> .cpxd");
    en->add_option("input", enc_in, "input WAV")->required();
    en->add_option("output", enc_out, "output .cpxd")->required();
    en->add_option("--model", enc_model, "codec checkpoint (.cpxm)")->required();

    std::string dec_in, dec_out, dec_model, dec_spf;
    uint64_t dec_seed = 0;
    auto* de = app.add_subcommand("decode", ".cpxd -> WAV");
    de->add_option("input", dec_in, "input .cpxd")->required();
    de->add_option("output", dec_out, "output WAV")->required();
    de->add_option("--model", dec_model, "codec checkpoint (.cpxm)")->required();
    de->add_option("--spf", dec_spf, "post-filter checkpoint (.cpxs)");
    de->add_option("--seed", dec_seed, "post-filter noise seed");

    std::string ev_manifest, ev_model, ev_spf, ev_split = "test", ev_report;
    uint64_t ev_seed = 0;
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
    ev->add_option("--manifest", ev_manifest, "dataset manifest file")->required();
    ev->add_option("--model", ev_model, "codec checkpoint (.cpxm)")->required();
    ev->add_option("--spf", ev_spf, "post-filter checkpoint (.cpxs)");
    ev->add_option("--seed", ev_seed, "post-filter noise seed");
    ev->add_option("--split", ev_split, "manifest split to evaluate");
    ev->add_option("--report", ev_report, "write JSON-lines report here (default stdout)");

    std::string sp_in, sp_out;
    int sp_hop = 320, sp_fft = 510;
    auto* sp = app.add_subcommand("spectrogram", "WAV -> log-magnitude PGM image");
    sp->add_option("input", sp_in, "input WAV")->required();
    sp->add_option("output", sp_out, "output PGM image")->required();
    sp->add_option("--hop", sp_hop, "hop size in samples");
    sp->add_option("--fft", sp_fft, "FFT size in samples");

    std::string info_path;
    auto* in = app.add_subcommand("info", "Describe a .cpxd/.cpxm/.cpxs/.wav file");
    in->add_option("path", info_path, "file to inspect")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (tc->parsed()) return cmd_train_codec(manifest, codec_cfg, train_cfg, out_dir, log_path);
        if (ts->parsed()) return cmd_train_spf(spf_manifest, spf_codec, spf_train, spf_out, spf_log);
        if (en->parsed()) return cmd_encode(enc_in, enc_out, enc_model);
        if (de->parsed()) return cmd_decode(dec_in, dec_out, dec_model, dec_spf, dec_seed);
        if (ev->parsed()) return cmd_eval(ev_manifest, ev_model, ev_spf, ev_seed, ev_split, ev_report);
        if (sp->parsed()) return cmd_spectrogram(sp_in, sp_out, sp_hop, sp_fft);
        if (in->parsed()) return cmd_info(info_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
