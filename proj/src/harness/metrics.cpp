#include "complexdec/harness/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "complexdec/dsp/wav.hpp"

namespace complexdec::harness {

double si_sdr(const std::vector<float>& reference, const std::vector<float>& estimate) {
    if (reference.size() != estimate.size())
        throw std::invalid_argument("si_sdr: length mismatch");
    if (reference.empty()) throw std::invalid_argument("si_sdr: empty input");

    double ref_energy = 0.0, dot = 0.0;
    for (size_t i = 0; i < reference.size(); ++i) {
        ref_energy += double(reference[i]) * double(reference[i]);
        dot += double(estimate[i]) * double(reference[i]);
    }
    if (ref_energy == 0.0) throw std::invalid_argument("si_sdr: silent reference");

    const double scale = dot / ref_energy;
    double target_energy = 0.0, error_energy = 0.0;
    for (size_t i = 0; i < reference.size(); ++i) {
        const double t = scale * double(reference[i]);
        const double e = double(estimate[i]) - t;
        target_energy += t * t;
        error_energy += e * e;
    }
    if (error_energy == 0.0 || 10.0 * std::log10(target_energy / error_energy) > kSiSdrCap)
        return kSiSdrCap;
    return 10.0 * std::log10(target_energy / error_energy);
}

double wav_mse(const std::vector<float>& reference, const std::vector<float>& estimate) {
    if (reference.size() != estimate.size())
        throw std::invalid_argument("wav_mse: length mismatch");
    if (reference.empty()) throw std::invalid_argument("wav_mse: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < reference.size(); ++i) {
        const double d = double(reference[i]) - double(estimate[i]);
        acc += d * d;
    }
    return acc / double(reference.size());
}

std::string MetricReport::to_json_lines() const {
    std::ostringstream os;
    for (const auto& u : per_utterance)
        os << "{\"path\":\"" << u.path << "\",\"wav_mse\":" << u.wav_mse
           << ",\"si_sdr_db\":" << u.si_sdr_db << ",\"sample_rate\":" << sample_rate << "}\n";
    os << "{\"aggregate\":true,\"mean_wav_mse\":" << mean_wav_mse
       << ",\"mean_si_sdr_db\":" << mean_si_sdr_db << ",\"sample_rate\":" << sample_rate << "}\n";
    return os.str();
}

dsp::WaveSegment code_utterance(const dsp::WaveSegment& wave, const codec::CodecModel& model,
                                const diffusion::SpfModel* spf, uint64_t seed) {
    const Eigen::MatrixXi indices = codec::encode_to_indices(wave, model);
    const int n_real = model.real_rvq.n_stages();
    const Eigen::MatrixXf real_q = rvq::rvq_decode(indices.topRows(n_real), model.real_rvq);
    const Eigen::MatrixXf imag_q =
        rvq::rvq_decode(indices.bottomRows(indices.rows() - n_real), model.imag_rvq);
    nn::Cache c1, c2;
    dsp::ComplexSpectrogram spec_hat =
        codec::decode(real_q, imag_q, model, c1, c2, model.config);
    if (spf != nullptr)
        spec_hat = diffusion::enhance(spec_hat, spf->score_fn(), spf->companding, spf->sde, seed);
    return dsp::istft(spec_hat, wave.length());
}

MetricReport evaluate(const DatasetManifest& manifest, const codec::CodecModel& model,
                      const diffusion::SpfModel* spf, uint64_t seed, const std::string& split) {
    std::vector<ManifestEntry> entries = manifest.split_entries(split);
    if (entries.empty()) entries = manifest.entries;  // single-split manifests
    if (entries.empty()) throw std::invalid_argument("evaluate: empty manifest");

    MetricReport report;
    report.sample_rate = manifest.sample_rate;
    for (const auto& entry : entries) {
        const dsp::WaveSegment wave = dsp::read_wav(entry.path);
        const dsp::WaveSegment wave_hat = code_utterance(wave, model, spf, seed);
        UtteranceMetrics um;
        um.path = entry.path;
        um.wav_mse = wav_mse(wave.samples, wave_hat.samples);
        um.si_sdr_db = si_sdr(wave.samples, wave_hat.samples);
        report.per_utterance.push_back(std::move(um));
    }
    for (const auto& u : report.per_utterance) {
        report.mean_wav_mse += u.wav_mse;
        report.mean_si_sdr_db += u.si_sdr_db;
    }
    report.mean_wav_mse /= double(report.per_utterance.size());
    report.mean_si_sdr_db /= double(report.per_utterance.size());
    return report;
}

void export_spectrogram_image(const dsp::ComplexSpectrogram& spec, const std::string& path) {
    const int h = spec.bins(), w = spec.frames();
    // Fixed dB-style scale: log10 magnitude clamped to [-5, 1].
    const float lo = -5.0f, hi = 1.0f;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export_spectrogram_image: cannot open " + path);
    out << "P5\n" << w << ' ' << h << "\n255\n";
    for (int row = h - 1; row >= 0; --row) {  // low frequencies at the bottom
        for (int col = 0; col < w; ++col) {
            const float mag = std::max(std::abs(spec.data(row, col)), 1e-5f);
            const float v = std::clamp((std::log10(mag) - lo) / (hi - lo), 0.0f, 1.0f);
            out.put(char(uint8_t(std::lround(v * 255.0f))));
        }
    }
}

void export_spectrogram_image(const dsp::WaveSegment& wave, const CodecConfig& cfg,
                              const std::string& path) {
    export_spectrogram_image(dsp::stft(wave, cfg.hop, cfg.fft_size), path);
}

}  // namespace complexdec::harness
