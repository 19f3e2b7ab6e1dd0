#include "complexdec/bitstream/bitstream.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace complexdec::bitstream {

namespace {

constexpr size_t kHeaderBytes = 4 + 1 + 4 + 4 + 4 + 1 + 1 + 1 + 4 + 4;  // 28

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 24));
}

uint32_t get_u32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

class BitWriter {
public:
    explicit BitWriter(std::vector<uint8_t>& out) : out_(out) {}
    void put(uint32_t value, int bits) {
        for (int b = bits - 1; b >= 0; --b) {
            cur_ = uint8_t(cur_ << 1 | (value >> b & 1u));
            if (++filled_ == 8) {
                out_.push_back(cur_);
                cur_ = 0;
                filled_ = 0;
            }
        }
    }
    void flush() {
        if (filled_ > 0) {
            out_.push_back(uint8_t(cur_ << (8 - filled_)));
            cur_ = 0;
            filled_ = 0;
        }
    }

private:
    std::vector<uint8_t>& out_;
    uint8_t cur_ = 0;
    int filled_ = 0;
};

class BitReader {
public:
    BitReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}
    uint32_t get(int bits) {
        uint32_t v = 0;
        for (int b = 0; b < bits; ++b) {
            const size_t byte = pos_ >> 3;
            if (byte >= len_) throw TruncationError("bitstream: payload ran out of bits");
            v = v << 1 | uint32_t(data_[byte] >> (7 - (pos_ & 7)) & 1u);
            ++pos_;
        }
        return v;
    }
    void align_byte() { pos_ = (pos_ + 7) & ~size_t(7); }

private:
    const uint8_t* data_;
    size_t len_;
    size_t pos_ = 0;
};

}  // namespace

std::vector<uint8_t> pack(const Eigen::MatrixXi& indices, const BitstreamHeader& header) {
    header.validate();
    if (indices.rows() != header.total_stages())
        throw std::invalid_argument("pack: index rows != total stages");
    if (uint32_t(indices.cols()) != header.n_frames)
        throw std::invalid_argument("pack: index cols != n_frames");
    const int limit = 1 << header.bits_per_index;
    for (Eigen::Index j = 0; j < indices.cols(); ++j)
        for (Eigen::Index i = 0; i < indices.rows(); ++i)
            if (indices(i, j) < 0 || indices(i, j) >= limit)
                throw std::invalid_argument("pack: index out of range for bits_per_index");

    std::vector<uint8_t> out;
    out.reserve(kHeaderBytes + size_t(header.n_frames) * header.payload_bytes_per_frame() + 4);
    out.insert(out.end(), header.kMagic, header.kMagic + 4);
    out.push_back(header.version);
    put_u32(out, header.sample_rate);
    put_u32(out, header.hop);
    put_u32(out, header.fft_size);
    out.push_back(header.n_stages_real);
    out.push_back(header.n_stages_imag);
    out.push_back(header.bits_per_index);
    put_u32(out, header.n_frames);
    put_u32(out, header.n_samples);

    const size_t payload_start = out.size();
    BitWriter writer(out);
    for (Eigen::Index j = 0; j < indices.cols(); ++j) {
        for (Eigen::Index i = 0; i < indices.rows(); ++i)
            writer.put(uint32_t(indices(i, j)), header.bits_per_index);
        writer.flush();  // frames are byte-aligned
    }

    uint32_t crc = uint32_t(
        crc32(0L, out.data() + payload_start, uInt(out.size() - payload_start)));
    put_u32(out, crc);
    return out;
}

Unpacked unpack(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < kHeaderBytes) throw TruncationError("bitstream: shorter than the header");
    if (std::memcmp(bytes.data(), BitstreamHeader::kMagic, 4) != 0)
        throw FormatError("bitstream: bad magic");

    BitstreamHeader h;
    h.version = bytes[4];
    if (h.version != BitstreamHeader::kVersion)
        throw VersionError("bitstream: unsupported version " + std::to_string(h.version));
    h.sample_rate = get_u32(bytes.data() + 5);
    h.hop = get_u32(bytes.data() + 9);
    h.fft_size = get_u32(bytes.data() + 13);
    h.n_stages_real = bytes[17];
    h.n_stages_imag = bytes[18];
    h.bits_per_index = bytes[19];
    h.n_frames = get_u32(bytes.data() + 20);
    h.n_samples = get_u32(bytes.data() + 24);
    h.validate();

    const size_t payload_bytes = size_t(h.n_frames) * h.payload_bytes_per_frame();
    const size_t expected = kHeaderBytes + payload_bytes + 4;
    if (bytes.size() < expected)
        throw TruncationError("bitstream: truncated, expected " + std::to_string(expected) +
                              " bytes, got " + std::to_string(bytes.size()));

    const uint8_t* payload = bytes.data() + kHeaderBytes;
    const uint32_t stored_crc = get_u32(payload + payload_bytes);
    const uint32_t actual_crc = uint32_t(crc32(0L, payload, uInt(payload_bytes)));
    if (stored_crc != actual_crc) throw FormatError("bitstream: CRC mismatch");

    Unpacked result;
    result.header = h;
    result.indices.resize(h.total_stages(), h.n_frames);
    BitReader reader(payload, payload_bytes);
    for (uint32_t j = 0; j < h.n_frames; ++j) {
        for (int i = 0; i < h.total_stages(); ++i)
            result.indices(i, Eigen::Index(j)) = int(reader.get(h.bits_per_index));
        reader.align_byte();
    }
    return result;
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

double bitrate(double frame_rate, int n_codebooks, int bits_per_index) {
    if (frame_rate <= 0 || n_codebooks <= 0 || bits_per_index <= 0)
        throw std::invalid_argument("bitrate: arguments must be positive");
    return frame_rate * n_codebooks * bits_per_index;
}

double compression_ratio(double sample_rate, double frame_rate, int code_dim) {
    if (sample_rate <= 0 || frame_rate <= 0 || code_dim <= 0)
        throw std::invalid_argument("compression_ratio: arguments must be positive");
    return sample_rate / (frame_rate * code_dim);
}

}  // namespace complexdec::bitstream
