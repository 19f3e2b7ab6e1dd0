// dataset.hpp
// Manifest-driven dataset access: whitespace-separated lines of
// "<wav path> <duration seconds> <split tag>".

#pragma once

#include <random>
#include <string>
#include <vector>

#include "complexdec/dsp/stft.hpp"

namespace complexdec::harness {

struct ManifestEntry {
    std::string path;
    double duration_sec = 0.0;
    std::string split = "train";
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    int sample_rate = 48000;

    std::vector<ManifestEntry> split_entries(const std::string& split) const;
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const DatasetManifest& manifest);

// Builds a single-split manifest from wav paths, probing durations.
DatasetManifest manifest_from_wavs(const std::vector<std::string>& paths,
                                   const std::string& split = "train");

// Random segment_length crop; files shorter than segment_length are
// loop-padded first.
std::vector<float> random_crop(const std::vector<float>& samples, int segment_length,
                               std::mt19937_64& rng);

}  // namespace complexdec::harness
