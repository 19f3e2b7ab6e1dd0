#include "complexdec/harness/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "complexdec/dsp/wav.hpp"

namespace complexdec::harness {

std::vector<ManifestEntry> DatasetManifest::split_entries(const std::string& split) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
        if (e.split == split) out.push_back(e);
    return out;
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
    DatasetManifest m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        ManifestEntry e;
        if (!(ss >> e.path >> e.duration_sec >> e.split))
            throw std::runtime_error("load_manifest: malformed line: " + line);
        m.entries.push_back(std::move(e));
    }
    return m;
}

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_manifest: cannot open " + path);
    for (const auto& e : manifest.entries)
        out << e.path << ' ' << e.duration_sec << ' ' << e.split << '\n';
}

DatasetManifest manifest_from_wavs(const std::vector<std::string>& paths,
                                   const std::string& split) {
    DatasetManifest m;
    for (const auto& p : paths) {
        const dsp::WaveSegment wave = dsp::read_wav(p);
        ManifestEntry e;
        e.path = p;
        e.duration_sec = double(wave.length()) / double(wave.sample_rate);
        e.split = split;
        m.sample_rate = wave.sample_rate;
        m.entries.push_back(std::move(e));
    }
    return m;
}

std::vector<float> random_crop(const std::vector<float>& samples, int segment_length,
                               std::mt19937_64& rng) {
    if (samples.empty()) throw std::invalid_argument("random_crop: empty input");
    std::vector<float> padded = samples;
    while (int(padded.size()) < segment_length)  // loop-pad short files
        padded.insert(padded.end(), samples.begin(), samples.end());
    std::uniform_int_distribution<size_t> dist(0, padded.size() - size_t(segment_length));
    const size_t start = dist(rng);
    return std::vector<float>(padded.begin() + start, padded.begin() + start + segment_length);
}

}  // namespace complexdec::harness
