#include "complexdec/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace complexdec {

namespace {

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int to_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer for " + key + ": '" + value + "'");
    }
}

float to_float(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const float v = std::stof(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad number for " + key + ": '" + value + "'");
    }
}

uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer for " + key + ": '" + value + "'");
    }
}

}  // namespace

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": empty key");
        if (kv.count(key))
            throw std::runtime_error("config: " + path + ": duplicate key " + key);
        kv[key] = value;
    }
    return kv;
}

CodecConfig load_codec_config(const std::string& path) {
    const auto kv = parse_kv_file(path);
    CodecConfig c;
    if (kv.count("preset")) {
        const std::string& p = kv.at("preset");
        if (p == "tiny")
            c = CodecConfig::tiny();
        else if (p == "default")
            c = CodecConfig::defaults();
        else
            throw std::runtime_error("config: unknown preset '" + p + "'");
    }
    for (const auto& [key, value] : kv) {
        if (key == "preset") continue;
        if (key == "sample_rate") c.sample_rate = to_int(key, value);
        else if (key == "hop") c.hop = to_int(key, value);
        else if (key == "fft_size") c.fft_size = to_int(key, value);
        else if (key == "model_channels") c.model_channels = to_int(key, value);
        else if (key == "n_blocks") c.n_blocks = to_int(key, value);
        else if (key == "units_per_block") c.units_per_block = to_int(key, value);
        else if (key == "n_stages") c.n_stages = to_int(key, value);
        else if (key == "codebook_bits") c.codebook_bits = to_int(key, value);
        else if (key == "compand_alpha") c.companding.alpha = to_float(key, value);
        else if (key == "compand_beta") c.companding.beta = to_float(key, value);
        else if (key == "w_vq") c.loss_weights.w_vq = to_float(key, value);
        else if (key == "w_mel") c.loss_weights.w_mel = to_float(key, value);
        else if (key == "w_mse") c.loss_weights.w_mse = to_float(key, value);
        else if (key == "w_mae") c.loss_weights.w_mae = to_float(key, value);
        else throw std::runtime_error("config: unknown key '" + key + "' in " + path);
    }
    c.validate();
    return c;
}

TrainConfig load_train_config(const std::string& path) {
    const auto kv = parse_kv_file(path);
    TrainConfig t;
    if (kv.count("preset")) {
        const std::string& p = kv.at("preset");
        if (p == "desk")
            t = TrainConfig::desk_scale();
        else if (p == "default")
            t = TrainConfig{};
        else
            throw std::runtime_error("config: unknown preset '" + p + "'");
    }
    for (const auto& [key, value] : kv) {
        if (key == "preset") continue;
        if (key == "lr") t.lr = to_float(key, value);
        else if (key == "batch_size") t.batch_size = to_int(key, value);
        else if (key == "segment_length") t.segment_length = to_int(key, value);
        else if (key == "max_steps") t.max_steps = to_int(key, value);
        else if (key == "seed") t.seed = to_u64(key, value);
        else if (key == "checkpoint_every") t.checkpoint_every = to_int(key, value);
        else if (key == "log_every") t.log_every = to_int(key, value);
        else if (key == "w_vq") t.loss_weights.w_vq = to_float(key, value);
        else if (key == "w_mel") t.loss_weights.w_mel = to_float(key, value);
        else if (key == "w_mse") t.loss_weights.w_mse = to_float(key, value);
        else if (key == "w_mae") t.loss_weights.w_mae = to_float(key, value);
        else throw std::runtime_error("config: unknown key '" + key + "' in " + path);
    }
    return t;
}

}  // namespace complexdec
