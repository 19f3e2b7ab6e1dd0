// bitstream.hpp
// Bit-exact .cpxd serialization of RVQ code indices and the bitrate /
// compression-ratio arithmetic. Byte layout is documented in
// docs/bitstream.md; golden vectors live in tests/golden/.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace complexdec::bitstream {

struct BitstreamHeader {
    static constexpr char kMagic[4] = {'C', 'P', 'X', 'D'};
    static constexpr uint8_t kVersion = 1;

    uint8_t version = kVersion;
    uint32_t sample_rate = 48000;
    uint32_t hop = 320;
    uint32_t fft_size = 510;
    uint8_t n_stages_real = 8;
    uint8_t n_stages_imag = 8;
    uint8_t bits_per_index = 10;
    uint32_t n_frames = 0;
    uint32_t n_samples = 0;  // original waveform length; 0 = unknown

    int total_stages() const { return int(n_stages_real) + int(n_stages_imag); }
    int payload_bytes_per_frame() const { return (total_stages() * bits_per_index + 7) / 8; }

    void validate() const {
        if (bits_per_index < 1 || bits_per_index > 16)
            throw std::invalid_argument("BitstreamHeader: bits_per_index must be in [1,16]");
        if (n_stages_real == 0 && n_stages_imag == 0)
            throw std::invalid_argument("BitstreamHeader: no stages");
    }
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// indices: total_stages x n_frames, column = one frame, real-branch stage
// rows first. Bits are packed big-endian (MSB first) per frame; the stream
// ends with a CRC32 of the payload.
std::vector<uint8_t> pack(const Eigen::MatrixXi& indices, const BitstreamHeader& header);

struct Unpacked {
    BitstreamHeader header;
    Eigen::MatrixXi indices;  // total_stages x n_frames
};
Unpacked unpack(const std::vector<uint8_t>& bytes);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);

// 150 * 16 * 10 = 24000 bps at the default operating point.
double bitrate(double frame_rate, int n_codebooks, int bits_per_index);

// sample_rate / (frame_rate * code_dim).
double compression_ratio(double sample_rate, double frame_rate, int code_dim);

}  // namespace complexdec::bitstream
