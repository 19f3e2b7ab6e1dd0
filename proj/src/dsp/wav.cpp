#include "complexdec/dsp/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace complexdec::dsp {

namespace {

uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

void write_u16(std::ostream& out, uint16_t v) {
    unsigned char b[2] = {uint8_t(v), uint8_t(v >> 8)};
    out.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

WaveSegment read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_wav: cannot open " + path);

    char tag[4];
    in.read(tag, 4);
    if (std::memcmp(tag, "RIFF", 4) != 0) throw std::runtime_error("read_wav: not a RIFF file: " + path);
    read_u32(in);  // riff size
    in.read(tag, 4);
    if (std::memcmp(tag, "WAVE", 4) != 0) throw std::runtime_error("read_wav: not a WAVE file: " + path);

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    std::vector<char> data;
    bool have_fmt = false, have_data = false;
    while (in.read(tag, 4)) {
        uint32_t chunk_size = read_u32(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = read_u16(in);
            channels = read_u16(in);
            sample_rate = read_u32(in);
            read_u32(in);  // byte rate
            read_u16(in);  // block align
            bits = read_u16(in);
            if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(chunk_size);
            in.read(data.data(), chunk_size);
            have_data = true;
        } else {
            in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
        }
        if (have_fmt && have_data) break;
    }
    if (!have_fmt || !have_data) throw std::runtime_error("read_wav: missing fmt/data chunk: " + path);
    if (format != 1) throw std::runtime_error("read_wav: only PCM supported: " + path);
    if (channels != 1) throw std::runtime_error("read_wav: only mono supported: " + path);
    if (bits != 16 && bits != 24) throw std::runtime_error("read_wav: only 16/24-bit PCM supported");
    if (sample_rate != 48000)
        std::cerr << "warning: " << path << " is " << sample_rate << " Hz, not 48000; stored as-is\n";

    WaveSegment wave;
    wave.sample_rate = int(sample_rate);
    const int bytes = bits / 8;
    const size_t n = data.size() / bytes;
    wave.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const unsigned char* p = reinterpret_cast<unsigned char*>(data.data()) + i * bytes;
        int32_t v;
        if (bits == 16) {
            v = int16_t(uint16_t(p[0]) | uint16_t(p[1]) << 8);
            wave.samples[i] = float(v) / 32768.0f;
        } else {
            v = int32_t((uint32_t(p[0]) << 8 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 24)) >> 8;
            wave.samples[i] = float(v) / 8388608.0f;
        }
    }
    return wave;
}

void write_wav(const std::string& path, const WaveSegment& wave, int bits_per_sample) {
    if (bits_per_sample != 16 && bits_per_sample != 24)
        throw std::invalid_argument("write_wav: only 16/24-bit PCM supported");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_wav: cannot open " + path);

    const int bytes = bits_per_sample / 8;
    const uint32_t data_size = uint32_t(wave.samples.size()) * bytes;
    out.write("RIFF", 4);
    write_u32(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1);  // PCM
    write_u16(out, 1);  // mono
    write_u32(out, uint32_t(wave.sample_rate));
    write_u32(out, uint32_t(wave.sample_rate) * bytes);
    write_u16(out, uint16_t(bytes));
    write_u16(out, uint16_t(bits_per_sample));
    out.write("data", 4);
    write_u32(out, data_size);

    for (float s : wave.samples) {
        const float clipped = std::clamp(s, -1.0f, 1.0f);
        if (bits_per_sample == 16) {
            const int32_t v = int32_t(
                std::clamp(std::lrint(double(clipped) * 32768.0), -32768l, 32767l));
            unsigned char b[2] = {uint8_t(v), uint8_t(v >> 8)};
            out.write(reinterpret_cast<char*>(b), 2);
        } else {
            const int32_t v = int32_t(
                std::clamp(std::lrint(double(clipped) * 8388608.0), -8388608l, 8388607l));
            unsigned char b[3] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16)};
            out.write(reinterpret_cast<char*>(b), 3);
        }
    }
}

}  // namespace complexdec::dsp
