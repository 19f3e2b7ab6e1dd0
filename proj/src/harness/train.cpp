#include "complexdec/harness/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <stdexcept>

#include "complexdec/dsp/compand.hpp"
#include "complexdec/dsp/wav.hpp"
#include "complexdec/harness/metrics.hpp"

namespace complexdec::harness {

namespace {

struct LoadedUtterance {
    std::string path;
    dsp::WaveSegment wave;
};

// Reads the train split (or everything for single-split manifests), skipping
// unreadable files with a warning.
std::vector<LoadedUtterance> load_train_set(const DatasetManifest& manifest) {
    std::vector<ManifestEntry> entries = manifest.split_entries("train");
    if (entries.empty()) entries = manifest.entries;
    std::vector<LoadedUtterance> out;
    for (const auto& e : entries) {
        try {
            out.push_back({e.path, dsp::read_wav(e.path)});
        } catch (const std::exception& ex) {
            std::cerr << "warning: skipping " << e.path << ": " << ex.what() << "\n";
        }
    }
    if (out.empty()) throw std::runtime_error("train: no readable utterances in manifest");
    return out;
}

// One EMA pass over a batch of latents: assignments are re-derived per stage
// from the recorded indices (chosen against the pre-update entries), then
// each stage's statistics move and long-dead codes are reseeded.
void ema_update_stack(rvq::RvqStack& stack, const Eigen::MatrixXf& latents,
                      const Eigen::MatrixXi& indices, std::mt19937_64& rng) {
    const int n_stages = stack.n_stages();
    std::vector<Eigen::MatrixXf> stage_input(n_stages);
    Eigen::MatrixXf residual = latents;
    for (int s = 0; s < n_stages; ++s) {
        stage_input[s] = residual;
        const rvq::Codebook& cb = stack.stages[s];
        for (Eigen::Index j = 0; j < residual.cols(); ++j)
            residual.col(j) -= cb.entries.row(indices(s, j)).transpose();
    }
    for (int s = 0; s < n_stages; ++s) {
        const Eigen::VectorXi assignments = indices.row(s).transpose();
        rvq::ema_update(stack.stages[s], stage_input[s], assignments);
        rvq::revive_dead_codes(stack.stages[s], stage_input[s], rng);
    }
}

Eigen::MatrixXf hconcat(const std::vector<Eigen::MatrixXf>& mats) {
    Eigen::Index cols = 0;
    for (const auto& m : mats) cols += m.cols();
    Eigen::MatrixXf out(mats.front().rows(), cols);
    Eigen::Index at = 0;
    for (const auto& m : mats) {
        out.middleCols(at, m.cols()) = m;
        at += m.cols();
    }
    return out;
}

Eigen::MatrixXi hconcat_i(const std::vector<Eigen::MatrixXi>& mats) {
    Eigen::Index cols = 0;
    for (const auto& m : mats) cols += m.cols();
    Eigen::MatrixXi out(mats.front().rows(), cols);
    Eigen::Index at = 0;
    for (const auto& m : mats) {
        out.middleCols(at, m.cols()) = m;
        at += m.cols();
    }
    return out;
}

}  // namespace

TrainCodecResult train_codec(const DatasetManifest& manifest, const CodecConfig& codec_cfg,
                             const TrainConfig& train_cfg, const std::string& out_dir,
                             std::ostream* log) {
    codec_cfg.validate();
    train_cfg.validate(codec_cfg.hop);
    std::filesystem::create_directories(out_dir);

    const std::vector<LoadedUtterance> train_set = load_train_set(manifest);
    codec::CodecModel model(codec_cfg);
    model.init(train_cfg.seed);
    nn::Adam opt(model.parameters(), train_cfg.lr);

    std::mt19937_64 rng(train_cfg.seed ^ 0x7261696e636463ull);
    std::uniform_int_distribution<size_t> pick_file(0, train_set.size() - 1);
    const LossWeights& w = train_cfg.loss_weights;
    const float inv_batch = 1.f / float(train_cfg.batch_size);

    TrainCodecResult result;
    result.checkpoint_path = (std::filesystem::path(out_dir) / "codec.cpxm").string();

    for (int step = 0; step < train_cfg.max_steps; ++step) {
        opt.zero_grad();
        float vq = 0.f, mel = 0.f, mse = 0.f, mae = 0.f;
        std::vector<Eigen::MatrixXf> lat_real, lat_imag;
        std::vector<Eigen::MatrixXi> idx_real, idx_imag;
        double last_si_sdr = 0.0;

        for (int b = 0; b < train_cfg.batch_size; ++b) {
            const LoadedUtterance& utt = train_set[pick_file(rng)];
            dsp::WaveSegment wave;
            wave.sample_rate = utt.wave.sample_rate;
            wave.samples = random_crop(utt.wave.samples, train_cfg.segment_length, rng);

            if (!model.rvq_initialized) {
                nn::Cache c1, c2;
                const dsp::ComplexSpectrogram spec =
                    dsp::stft(wave, codec_cfg.hop, codec_cfg.fft_size);
                const codec::BranchLatents first = codec::encode(spec, model, c1, c2);
                rvq::init_from_batch(model.real_rvq, first.real, rng);
                rvq::init_from_batch(model.imag_rvq, first.imag, rng);
                model.rvq_initialized = true;
            }

            codec::CodecForwardResult r = codec::codec_forward(wave, model);
            mse += losses::complex_mse(r.spec.data, r.spec_hat.data) * inv_batch;
            mae += losses::complex_mae(r.spec.data, r.spec_hat.data) * inv_batch;
            mel += losses::multires_mel_loss(wave, r.wave_hat) * inv_batch;
            vq += r.commitment * inv_batch;
            last_si_sdr = si_sdr(wave.samples, r.wave_hat.samples);

            // Reconstruction gradients land on the decoded spectrum: the
            // spectral terms directly, the mel term through the inverse
            // transform's adjoint.
            Eigen::MatrixXcf dspec = w.w_mse * losses::complex_mse_backward(r.spec.data,
                                                                            r.spec_hat.data) +
                                     w.w_mae * losses::complex_mae_backward(r.spec.data,
                                                                            r.spec_hat.data);
            const std::vector<float> dwave = losses::multires_mel_loss_backward(wave, r.wave_hat);
            dspec += w.w_mel * dsp::istft_adjoint(dwave, r.spec_hat.frames(), codec_cfg.hop,
                                                  codec_cfg.fft_size, wave.length());
            dspec *= inv_batch;

            const Eigen::MatrixXf dq_real =
                model.decoder.backward(dspec.real(), r.dec_real_cache);
            const Eigen::MatrixXf dq_imag =
                model.decoder.backward(dspec.imag(), r.dec_imag_cache);

            // Straight-through: pass the decoder gradient around the
            // quantizer, plus the commitment pull toward the codes.
            const float commit_scale =
                w.w_vq * inv_batch * 0.5f * 2.f / float(r.latents.real.size());
            const Eigen::MatrixXf dlat_real =
                dq_real + commit_scale * (r.latents.real - r.real_q.quantized);
            const Eigen::MatrixXf dlat_imag =
                dq_imag + commit_scale * (r.latents.imag - r.imag_q.quantized);
            model.encoder.backward(dlat_real, r.enc_real_cache);
            model.encoder.backward(dlat_imag, r.enc_imag_cache);

            lat_real.push_back(r.latents.real);
            lat_imag.push_back(r.latents.imag);
            idx_real.push_back(r.real_q.indices);
            idx_imag.push_back(r.imag_q.indices);
        }

        opt.step();
        ema_update_stack(model.real_rvq, hconcat(lat_real), hconcat_i(idx_real), rng);
        ema_update_stack(model.imag_rvq, hconcat(lat_imag), hconcat_i(idx_imag), rng);

        const losses::LossReport report = losses::total_loss(vq, mel, mse, mae, w);
        if (step == 0) result.step0_total = report.total;
        result.final_total = report.total;
        result.final_si_sdr_db = last_si_sdr;

        const bool is_last = step == train_cfg.max_steps - 1;
        if (step % train_cfg.log_every == 0 || is_last) {
            result.logged.push_back(report);
            if (log != nullptr) *log << report.to_json_line(step) << "\n" << std::flush;
        }
        if ((step + 1) % train_cfg.checkpoint_every == 0 || is_last)
            codec::save_model_file(result.checkpoint_path, model);
    }

    if (train_cfg.max_steps == 0) codec::save_model_file(result.checkpoint_path, model);
    return result;
}

TrainSpfResult train_spf(const DatasetManifest& manifest, const codec::CodecModel& codec_model,
                         diffusion::SpfModel& spf, const TrainConfig& train_cfg,
                         const std::string& out_dir, std::ostream* log, int crop_size) {
    spf.sde.validate();
    const int pool = 1 << (spf.net_cfg.levels - 1);
    if (crop_size < pool || crop_size % pool != 0)
        throw std::invalid_argument("train_spf: crop_size must be a multiple of the U-Net pool factor");
    std::filesystem::create_directories(out_dir);

    // Companded (clean, decoded) spectrum pairs, zero-padded up to the crop
    // size so every utterance yields valid tiles.
    struct Pair {
        Eigen::MatrixXcf x0, x_hat;
    };
    std::vector<ManifestEntry> entries = manifest.split_entries("train");
    if (entries.empty()) entries = manifest.entries;
    std::vector<Pair> pairs;
    for (const auto& e : entries) {
        try {
            const dsp::WaveSegment wave = dsp::read_wav(e.path);
            const CodecConfig& cc = codec_model.config;
            const dsp::ComplexSpectrogram spec = dsp::stft(wave, cc.hop, cc.fft_size);
            const Eigen::MatrixXi indices = codec::encode_to_indices(wave, codec_model);
            const int n_real = codec_model.real_rvq.n_stages();
            const Eigen::MatrixXf real_q =
                rvq::rvq_decode(indices.topRows(n_real), codec_model.real_rvq);
            const Eigen::MatrixXf imag_q = rvq::rvq_decode(
                indices.bottomRows(indices.rows() - n_real), codec_model.imag_rvq);
            nn::Cache c1, c2;
            const dsp::ComplexSpectrogram spec_hat =
                codec::decode(real_q, imag_q, codec_model, c1, c2, cc);

            Pair p;
            // Pad up to whole tiles on the same grid the enhancement pass
            // uses, so training sees exactly the conditioner tiles that
            // inference will present to the net.
            const int rows = (spec.bins() + crop_size - 1) / crop_size * crop_size;
            const int cols = (spec.frames() + crop_size - 1) / crop_size * crop_size;
            p.x0 = Eigen::MatrixXcf::Zero(rows, cols);
            p.x_hat = Eigen::MatrixXcf::Zero(rows, cols);
            p.x0.topLeftCorner(spec.bins(), spec.frames()) =
                dsp::compand(spec.data, spf.companding);
            p.x_hat.topLeftCorner(spec.bins(), spec.frames()) =
                dsp::compand(spec_hat.data, spf.companding);
            pairs.push_back(std::move(p));
        } catch (const std::exception& ex) {
            std::cerr << "warning: skipping " << e.path << ": " << ex.what() << "\n";
        }
    }
    if (pairs.empty()) throw std::runtime_error("train_spf: no usable utterances in manifest");

    nn::Adam opt(spf.net.parameters(), train_cfg.lr);

    TrainSpfResult result;
    result.checkpoint_path = (std::filesystem::path(out_dir) / "spf.cpxs").string();

    std::mt19937_64 rng(train_cfg.seed ^ 0x747261696e737066ull);
    std::uniform_int_distribution<size_t> pick_pair(0, pairs.size() - 1);
    std::uniform_real_distribution<float> pick_t(spf.sde.t_eps, spf.sde.T);
    std::normal_distribution<float> normal(0.f, 1.f);
    const float inv_batch = 1.f / float(train_cfg.batch_size);

    for (int step = 0; step < train_cfg.max_steps; ++step) {
        // Cosine learning-rate decay to zero: with a constant rate the
        // final-step weights oscillate around the optimum and the
        // checkpoint quality is a lottery; annealing lets them settle.
        const float progress = float(step) / float(std::max(1, train_cfg.max_steps));
        opt.set_lr(train_cfg.lr * 0.5f * (1.f + std::cos(progress * 3.14159265f)));
        opt.zero_grad();
        float loss = 0.f;
        for (int b = 0; b < train_cfg.batch_size; ++b) {
            const Pair& p = pairs[pick_pair(rng)];
            std::uniform_int_distribution<int> pick_row(0, int(p.x0.rows()) - crop_size);
            std::uniform_int_distribution<int> pick_col(0, int(p.x0.cols()) - crop_size);
            const int r0 = pick_row(rng), c0 = pick_col(rng);
            const Eigen::MatrixXcf x0 = p.x0.block(r0, c0, crop_size, crop_size);
            const Eigen::MatrixXcf x_hat = p.x_hat.block(r0, c0, crop_size, crop_size);

            const float t = pick_t(rng);
            Eigen::MatrixXcf z(crop_size, crop_size);
            for (int j = 0; j < crop_size; ++j)
                for (int i = 0; i < crop_size; ++i)
                    z(i, j) = std::complex<float>(normal(rng), normal(rng));
            const Eigen::MatrixXcf x_t = diffusion::sample_xt(x0, x_hat, t, z, spf.sde);
            nn::Cache cache;
            const Eigen::MatrixXcf raw = spf.net.forward(x_t, x_hat, t, cache);
            // Noise-prediction objective: the net outputs the sigma-scaled
            // score, so the target is -z at every noise level. Training on
            // ||raw + z||^2 without the 1/sigma^2 score weighting keeps the
            // per-sample gradient scale uniform across t (the weighting
            // spans two orders of magnitude over [t_eps, T] and would let
            // low-noise samples drown out the high-noise regime the reverse
            // sampler starts in). The weighted score-matching loss is still
            // the evaluation metric; minimizing the residual drives both.
            const Eigen::MatrixXcf resid = raw + z;
            loss += resid.squaredNorm() * inv_batch;
            const Eigen::MatrixXcf draw = (2.f * inv_batch) * resid;
            spf.net.backward(draw, cache);
        }
        opt.step();

        if (!std::isfinite(loss)) throw std::runtime_error("train_spf: non-finite loss");
        if (step == 0) result.step0_loss = loss;
        result.final_loss = loss;

        const bool is_last = step == train_cfg.max_steps - 1;
        if (log != nullptr && (step % train_cfg.log_every == 0 || is_last))
            *log << "{\"step\":" << step << ",\"score_loss\":" << loss << "}\n" << std::flush;
        if ((step + 1) % train_cfg.checkpoint_every == 0 || is_last)
            diffusion::save_spf_file(result.checkpoint_path, spf);
    }

    if (train_cfg.max_steps == 0) diffusion::save_spf_file(result.checkpoint_path, spf);
    return result;
}

}  // namespace complexdec::harness
