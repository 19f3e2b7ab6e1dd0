#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "complexdec/bitstream/bitstream.hpp"

using namespace complexdec;
using bitstream::BitstreamHeader;

namespace {

const std::string kGoldenDir = std::string(COMPLEXDEC_SOURCE_DIR) + "/tests/golden/";

constexpr size_t kHeaderBytes = 28;
constexpr size_t kCrcBytes = 4;

Eigen::MatrixXi random_indices(const BitstreamHeader& h, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(0, (1 << h.bits_per_index) - 1);
    Eigen::MatrixXi m(h.total_stages(), int(h.n_frames));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    return m;
}

}  // namespace

TEST_CASE("one all-zero frame packs to twenty zero payload bytes") {
    BitstreamHeader h;  // 8+8 stages x 10 bits = 160 bits = 20 bytes per frame
    h.n_frames = 1;
    h.n_samples = 320;
    const Eigen::MatrixXi indices = Eigen::MatrixXi::Zero(16, 1);
    const std::vector<uint8_t> bytes = bitstream::pack(indices, h);

    CHECK(h.payload_bytes_per_frame() == 20);
    REQUIRE(bytes.size() == kHeaderBytes + 20 + kCrcBytes);
    for (size_t i = 0; i < 20; ++i) CHECK(bytes[kHeaderBytes + i] == 0);
}

TEST_CASE("one all-max frame packs to twenty 0xff payload bytes") {
    BitstreamHeader h;
    h.n_frames = 1;
    const Eigen::MatrixXi indices = Eigen::MatrixXi::Constant(16, 1, 1023);
    const std::vector<uint8_t> bytes = bitstream::pack(indices, h);
    REQUIRE(bytes.size() == kHeaderBytes + 20 + kCrcBytes);
    for (size_t i = 0; i < 20; ++i) CHECK(bytes[kHeaderBytes + i] == 0xff);
}

TEST_CASE("a random ten-second stream round-trips bit-exactly") {
    BitstreamHeader h;
    h.n_frames = 1500;  // 10 s at 150 frames/s
    h.n_samples = 480000;
    const Eigen::MatrixXi indices = random_indices(h, 1);
    const std::vector<uint8_t> bytes = bitstream::pack(indices, h);

    const bitstream::Unpacked u = bitstream::unpack(bytes);
    CHECK(u.header.sample_rate == 48000);
    CHECK(u.header.hop == 320);
    CHECK(u.header.fft_size == 510);
    CHECK(u.header.n_frames == 1500);
    CHECK(u.header.n_samples == 480000);
    CHECK((u.indices - indices).cwiseAbs().maxCoeff() == 0);

    // re-packing the decoded stream reproduces the bytes exactly
    CHECK(bitstream::pack(u.indices, u.header) == bytes);
}

TEST_CASE("random configurations round-trip: 1000-case property test") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> stages(0, 16);
    std::uniform_int_distribution<int> bits(1, 16);
    std::uniform_int_distribution<int> frames(0, 24);
    std::uniform_int_distribution<uint32_t> rate(8000, 96000);

    for (int trial = 0; trial < 1000; ++trial) {
        BitstreamHeader h;
        h.n_stages_real = uint8_t(stages(rng));
        h.n_stages_imag = uint8_t(stages(rng));
        if (h.n_stages_real == 0 && h.n_stages_imag == 0) h.n_stages_real = 1;
        h.bits_per_index = uint8_t(bits(rng));
        h.n_frames = uint32_t(frames(rng));
        h.sample_rate = rate(rng);
        h.hop = 1 + uint32_t(trial);
        h.fft_size = 2 * h.hop;
        h.n_samples = h.n_frames * h.hop;
        const Eigen::MatrixXi indices = random_indices(h, uint64_t(trial) + 100);

        const std::vector<uint8_t> bytes = bitstream::pack(indices, h);
        CHECK(bytes.size() ==
              kHeaderBytes + size_t(h.n_frames) * size_t(h.payload_bytes_per_frame()) + kCrcBytes);

        const bitstream::Unpacked u = bitstream::unpack(bytes);
        CHECK(u.header.n_stages_real == h.n_stages_real);
        CHECK(u.header.n_stages_imag == h.n_stages_imag);
        CHECK(u.header.bits_per_index == h.bits_per_index);
        CHECK(u.header.n_frames == h.n_frames);
        CHECK(u.header.n_samples == h.n_samples);
        CHECK(u.header.sample_rate == h.sample_rate);
        CHECK(u.header.hop == h.hop);
        CHECK(u.header.fft_size == h.fft_size);
        if (indices.size() > 0)
            CHECK((u.indices - indices).cwiseAbs().maxCoeff() == 0);
    }
}

TEST_CASE("pack rejects malformed input") {
    BitstreamHeader h;
    h.n_frames = 2;
    CHECK_THROWS(bitstream::pack(Eigen::MatrixXi::Zero(15, 2), h));  // wrong stage count
    CHECK_THROWS(bitstream::pack(Eigen::MatrixXi::Zero(16, 3), h));  // wrong frame count
    CHECK_THROWS(bitstream::pack(Eigen::MatrixXi::Constant(16, 2, 1024), h));  // over range
    CHECK_THROWS(bitstream::pack(Eigen::MatrixXi::Constant(16, 2, -1), h));

    BitstreamHeader bad = h;
    bad.bits_per_index = 17;
    CHECK_THROWS(bitstream::pack(Eigen::MatrixXi::Zero(16, 2), bad));
}

TEST_CASE("corruption and truncation are detected with specific errors") {
    BitstreamHeader h;
    h.n_frames = 4;
    const std::vector<uint8_t> bytes = bitstream::pack(random_indices(h, 3), h);

    // truncation names the expected byte count
    std::vector<uint8_t> cut(bytes.begin(), bytes.end() - 10);
    const std::string expected = std::to_string(bytes.size());
    CHECK_THROWS_WITH_AS(bitstream::unpack(cut), doctest::Contains(expected.c_str()),
                         bitstream::TruncationError);
    CHECK_THROWS_AS(bitstream::unpack(std::vector<uint8_t>(8, 0x43)),
                    bitstream::TruncationError);  // shorter than a header

    std::vector<uint8_t> wrong_magic = bytes;
    wrong_magic[0] = 'X';
    CHECK_THROWS_AS(bitstream::unpack(wrong_magic), bitstream::FormatError);

    std::vector<uint8_t> wrong_version = bytes;
    wrong_version[4] = 99;
    CHECK_THROWS_AS(bitstream::unpack(wrong_version), bitstream::VersionError);

    std::vector<uint8_t> flipped = bytes;
    flipped[kHeaderBytes + 5] ^= 0x10;  // payload bit flip -> CRC mismatch
    CHECK_THROWS_WITH_AS(bitstream::unpack(flipped), doctest::Contains("CRC"),
                         bitstream::FormatError);
}

TEST_CASE("bitrate and compression arithmetic") {
    // default operating point: 150 frames/s, 16 codebooks, 10 bits
    CHECK(bitstream::bitrate(150.0, 16, 10) == doctest::Approx(24000.0));
    // 48000 samples/s carried by 150 frames/s of 64-dim codes
    CHECK(bitstream::compression_ratio(48000.0, 150.0, 64) == doctest::Approx(5.0));
    CHECK_THROWS(bitstream::bitrate(0.0, 16, 10));
    CHECK_THROWS(bitstream::compression_ratio(48000.0, -1.0, 64));
}

TEST_CASE("golden vectors decode byte-for-byte") {
    SUBCASE("single zero frame") {
        const std::vector<uint8_t> golden = bitstream::read_file(kGoldenDir + "one_frame_zeros.cpxd");
        BitstreamHeader h;
        h.n_frames = 1;
        h.n_samples = 320;
        CHECK(bitstream::pack(Eigen::MatrixXi::Zero(16, 1), h) == golden);
        const bitstream::Unpacked u = bitstream::unpack(golden);
        CHECK(u.indices.cwiseAbs().maxCoeff() == 0);
        CHECK(u.header.n_samples == 320);
    }
    SUBCASE("three-frame counting pattern") {
        const std::vector<uint8_t> golden = bitstream::read_file(kGoldenDir + "pattern.cpxd");
        BitstreamHeader h;
        h.n_stages_real = 2;
        h.n_stages_imag = 2;
        h.bits_per_index = 4;
        h.n_frames = 3;
        h.n_samples = 960;
        Eigen::MatrixXi indices(4, 3);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 4; ++i) indices(i, j) = (i + 5 * j) % 16;
        CHECK(bitstream::pack(indices, h) == golden);
        const bitstream::Unpacked u = bitstream::unpack(golden);
        CHECK((u.indices - indices).cwiseAbs().maxCoeff() == 0);
    }
}

TEST_CASE("file io round-trips and reports missing files") {
    BitstreamHeader h;
    h.n_frames = 7;
    const std::vector<uint8_t> bytes = bitstream::pack(random_indices(h, 4), h);
    const std::string path = "test_bitstream_tmp.cpxd";
    bitstream::write_file(path, bytes);
    CHECK(bitstream::read_file(path) == bytes);
    std::remove(path.c_str());
    CHECK_THROWS(bitstream::read_file("no_such_file.cpxd"));
}
