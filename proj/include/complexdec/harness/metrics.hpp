// metrics.hpp
// Objective reconstruction metrics and the evaluation driver.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "complexdec/codec/model.hpp"
#include "complexdec/diffusion/spf.hpp"
#include "complexdec/harness/dataset.hpp"

namespace complexdec::harness {

// Scale-invariant SDR in dB: 10 log10(||s_target||^2 / ||e||^2) with
// s_target the projection of the estimate onto the reference. Capped at
// +100 dB (exact matches leave zero residual).
double si_sdr(const std::vector<float>& reference, const std::vector<float>& estimate);

constexpr double kSiSdrCap = 100.0;

double wav_mse(const std::vector<float>& reference, const std::vector<float>& estimate);

struct UtteranceMetrics {
    std::string path;
    double wav_mse = 0.0;
    double si_sdr_db = 0.0;
};

struct MetricReport {
    std::vector<UtteranceMetrics> per_utterance;
    double mean_wav_mse = 0.0;
    double mean_si_sdr_db = 0.0;
    int sample_rate = 48000;  // metrics are computed at the native rate

    std::string to_json_lines() const;
};

// Full encode -> (optional enhance) -> decode of one utterance.
dsp::WaveSegment code_utterance(const dsp::WaveSegment& wave, const codec::CodecModel& model,
                                const diffusion::SpfModel* spf, uint64_t seed);

MetricReport evaluate(const DatasetManifest& manifest, const codec::CodecModel& model,
                      const diffusion::SpfModel* spf = nullptr, uint64_t seed = 0,
                      const std::string& split = "test");

// Grayscale log-magnitude PGM, frequency on the vertical axis (low bins at
// the bottom).
void export_spectrogram_image(const dsp::ComplexSpectrogram& spec, const std::string& path);
void export_spectrogram_image(const dsp::WaveSegment& wave, const CodecConfig& cfg,
                              const std::string& path);

}  // namespace complexdec::harness
