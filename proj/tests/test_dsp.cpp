#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "complexdec/dsp/compand.hpp"
#include "complexdec/dsp/fft.hpp"
#include "complexdec/dsp/mel.hpp"
#include "complexdec/dsp/stft.hpp"
#include "complexdec/dsp/wav.hpp"

using namespace complexdec;

namespace {

// Brute-force half-spectrum DFT, the independent oracle for the FFT wrapper.
std::vector<std::complex<double>> dft_oracle(const std::vector<float>& x) {
    const int n = int(x.size());
    std::vector<std::complex<double>> out(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) {
            const double ang = -2.0 * M_PI * double(k) * double(i) / double(n);
            acc += double(x[i]) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

std::vector<float> random_wave(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-1.f, 1.f);
    std::vector<float> x(n);
    for (float& v : x) v = dist(rng);
    return x;
}

// Real pairing over the complex plane used by all gradient conventions here.
double pair_real(const Eigen::MatrixXcf& a, const Eigen::MatrixXcf& b) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            acc += double(a(i, j).real()) * double(b(i, j).real()) +
                   double(a(i, j).imag()) * double(b(i, j).imag());
    return acc;
}

double snr_db(const std::vector<float>& ref, const std::vector<float>& est, int lo, int hi) {
    double sig = 0.0, err = 0.0;
    for (int i = lo; i < hi; ++i) {
        sig += double(ref[i]) * double(ref[i]);
        const double d = double(ref[i]) - double(est[i]);
        err += d * d;
    }
    return 10.0 * std::log10(sig / err);
}

}  // namespace

TEST_CASE("fft matches the brute-force DFT at the non-power-of-two size") {
    const int n = 510;
    const std::vector<float> x = random_wave(n, 1);
    dsp::Fft fft(n);
    CHECK(fft.bins() == 256);
    std::vector<std::complex<float>> out(fft.bins());
    fft.forward(x.data(), out.data());
    const auto oracle = dft_oracle(x);
    for (int k = 0; k < fft.bins(); ++k) {
        CHECK(out[k].real() == doctest::Approx(oracle[k].real()).epsilon(1e-3));
        CHECK(out[k].imag() == doctest::Approx(oracle[k].imag()).epsilon(1e-3));
    }
}

TEST_CASE("fft inverse undoes forward after 1/N normalization") {
    for (int n : {8, 510, 512}) {
        const std::vector<float> x = random_wave(n, 2 + n);
        dsp::Fft fft(n);
        std::vector<std::complex<float>> spec(fft.bins());
        std::vector<float> back(n);
        fft.forward(x.data(), spec.data());
        fft.inverse(spec.data(), back.data());
        for (int i = 0; i < n; ++i) CHECK(back[i] / float(n) == doctest::Approx(x[i]).epsilon(1e-4));
    }
}

TEST_CASE("fft adjoints satisfy the dot-product identity") {
    const int n = 510;
    dsp::Fft fft(n);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> dist(-1.f, 1.f);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<float> x(n), xadj(n);
        std::vector<std::complex<float>> y(fft.bins()), yfwd(fft.bins());
        for (float& v : x) v = dist(rng);
        for (auto& v : y) v = {dist(rng), dist(rng)};

        // <y, F x> = <F* y, x>
        fft.forward(x.data(), yfwd.data());
        fft.forward_adjoint(y.data(), xadj.data());
        double lhs = 0.0;
        for (int k = 0; k < fft.bins(); ++k)
            lhs += double(y[k].real()) * double(yfwd[k].real()) +
                   double(y[k].imag()) * double(yfwd[k].imag());
        double rhs = 0.0;
        for (int i = 0; i < n; ++i) rhs += double(x[i]) * double(xadj[i]);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));

        // <x, F^{-1} y / N> = <(F^{-1}/N)* x, y>
        std::vector<float> inv(n);
        fft.inverse(y.data(), inv.data());
        std::vector<std::complex<float>> yadj(fft.bins());
        fft.inverse_adjoint(x.data(), yadj.data());
        double lhs2 = 0.0;
        for (int i = 0; i < n; ++i) lhs2 += double(x[i]) * double(inv[i]) / double(n);
        double rhs2 = 0.0;
        for (int k = 0; k < fft.bins(); ++k)
            rhs2 += double(yadj[k].real()) * double(y[k].real()) +
                    double(yadj[k].imag()) * double(y[k].imag());
        CHECK(lhs2 == doctest::Approx(rhs2).epsilon(1e-4));
    }
}

TEST_CASE("stft geometry: one second at 48 kHz gives 150 frames of 256 bins") {
    dsp::WaveSegment wave;
    wave.samples = random_wave(48000, 4);
    const dsp::ComplexSpectrogram spec = dsp::stft(wave, 320, 510);
    CHECK(spec.frames() == 150);
    CHECK(spec.bins() == 256);

    wave.samples = random_wave(480000, 5);
    CHECK(dsp::stft(wave, 320, 510).frames() == 1500);

    wave.samples = random_wave(48001, 6);  // one extra sample adds one frame
    CHECK(dsp::stft(wave, 320, 510).frames() == 151);
}

TEST_CASE("stft of silence is zero and stft is linear") {
    dsp::WaveSegment zero;
    zero.samples.assign(9600, 0.f);
    CHECK(dsp::stft(zero, 320, 510).data.cwiseAbs().maxCoeff() == 0.f);

    dsp::WaveSegment a, b, mix;
    a.samples = random_wave(9600, 7);
    b.samples = random_wave(9600, 8);
    mix.samples.resize(9600);
    for (int i = 0; i < 9600; ++i) mix.samples[i] = 2.f * a.samples[i] - 3.f * b.samples[i];
    const Eigen::MatrixXcf combined =
        2.f * dsp::stft(a, 320, 510).data - 3.f * dsp::stft(b, 320, 510).data;
    const Eigen::MatrixXcf direct = dsp::stft(mix, 320, 510).data;
    CHECK((combined - direct).cwiseAbs().maxCoeff() < 1e-3f);
}

TEST_CASE("stft rejects empty and non-finite input") {
    dsp::WaveSegment empty;
    CHECK_THROWS(dsp::stft(empty, 320, 510));
    dsp::WaveSegment bad;
    bad.samples = {0.f, std::nanf(""), 0.f};
    CHECK_THROWS(dsp::stft(bad, 320, 510));
}

TEST_CASE("a pure tone lands in the bin predicted by a brute-force DFT") {
    const int sr = 48000, n = 48000;
    dsp::WaveSegment wave;
    wave.samples.resize(n);
    for (int i = 0; i < n; ++i)
        wave.samples[i] = std::sin(2.0 * M_PI * 750.0 * double(i) / double(sr));
    const dsp::ComplexSpectrogram spec = dsp::stft(wave, 320, 510);

    // middle frame, away from boundary effects
    const Eigen::VectorXf mags = spec.data.col(75).cwiseAbs();
    int peak = 0;
    mags.maxCoeff(&peak);
    CHECK(peak == 8);  // round(750 * 510 / 48000)

    // oracle: window a frame by hand and run the brute-force DFT
    const std::vector<float> win = dsp::hann_window(510);
    std::vector<float> frame(510);
    const int start = 75 * 320 - 255;  // centered frame offset in the signal
    for (int i = 0; i < 510; ++i) frame[i] = wave.samples[start + i] * win[i];
    const auto oracle = dft_oracle(frame);
    int opeak = 0;
    double omax = 0.0;
    for (int k = 0; k < int(oracle.size()); ++k)
        if (std::abs(oracle[k]) > omax) omax = std::abs(oracle[k]), opeak = k;
    CHECK(opeak == peak);
    CHECK(mags[peak] == doctest::Approx(omax).epsilon(1e-3));
}

TEST_CASE("istft round-trip reconstructs interior samples above 60 dB") {
    dsp::WaveSegment wave;
    wave.samples = random_wave(96000, 9);
    const dsp::ComplexSpectrogram spec = dsp::stft(wave, 320, 510);
    const dsp::WaveSegment back = dsp::istft(spec, wave.length());
    REQUIRE(back.length() == wave.length());

    const int margin = 510;
    CHECK(snr_db(wave.samples, back.samples, margin, wave.length() - margin) > 60.0);

    float peak = 0.f, max_err = 0.f;
    for (int i = margin; i < wave.length() - margin; ++i) {
        peak = std::max(peak, std::abs(wave.samples[i]));
        max_err = std::max(max_err, std::abs(wave.samples[i] - back.samples[i]));
    }
    CHECK(max_err < 1e-4f * peak);
}

TEST_CASE("istft of a zero spectrogram is silence, and lengths are honored") {
    dsp::WaveSegment wave;
    wave.samples = random_wave(16000, 10);
    dsp::ComplexSpectrogram spec = dsp::stft(wave, 320, 510);
    spec.data.setZero();
    const dsp::WaveSegment out = dsp::istft(spec, 20000);
    CHECK(out.length() == 20000);
    for (float v : out.samples) CHECK(v == 0.f);
}

TEST_CASE("istft rejects window/hop pairs with coverage gaps") {
    dsp::WaveSegment wave;
    wave.samples = random_wave(4096, 11);
    dsp::ComplexSpectrogram spec = dsp::stft(wave, 512, 512);
    CHECK_THROWS_WITH_AS(dsp::istft(spec, wave.length()), doctest::Contains("overlap-add"),
                         std::runtime_error);
}

TEST_CASE("stft and istft adjoints satisfy the dot-product identity") {
    const int len = 3200, hop = 320, fft_size = 510;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<float> dist(-1.f, 1.f);

    dsp::WaveSegment wave;
    wave.samples = random_wave(len, 13);
    const dsp::ComplexSpectrogram spec = dsp::stft(wave, hop, fft_size);

    Eigen::MatrixXcf dspec(spec.bins(), spec.frames());
    for (Eigen::Index j = 0; j < dspec.cols(); ++j)
        for (Eigen::Index i = 0; i < dspec.rows(); ++i) dspec(i, j) = {dist(rng), dist(rng)};

    // <dS, stft(x)> = <stft_adjoint(dS), x>
    const std::vector<float> dx = dsp::stft_adjoint(dspec, len, hop, fft_size);
    double rhs = 0.0;
    for (int i = 0; i < len; ++i) rhs += double(dx[i]) * double(wave.samples[i]);
    CHECK(pair_real(dspec, spec.data) == doctest::Approx(rhs).epsilon(1e-3));

    // <dw, istft(S)> = <istft_adjoint(dw), S>
    std::vector<float> dwave(len);
    for (float& v : dwave) v = dist(rng);
    const dsp::WaveSegment recon = dsp::istft(spec, len);
    double lhs2 = 0.0;
    for (int i = 0; i < len; ++i) lhs2 += double(dwave[i]) * double(recon.samples[i]);
    const Eigen::MatrixXcf dspec2 =
        dsp::istft_adjoint(dwave, spec.frames(), hop, fft_size, len);
    CHECK(lhs2 == doctest::Approx(pair_real(dspec2, spec.data)).epsilon(1e-3));
}

TEST_CASE("companding remaps magnitudes and preserves phase") {
    const CompandingParams params{0.5f, 0.15f};
    Eigen::MatrixXcf m(1, 3);
    m << std::complex<float>(1.f, 0.f), std::complex<float>(-4.f, 0.f),
        std::complex<float>(0.f, 0.f);
    const Eigen::MatrixXcf c = dsp::compand(m, params);
    CHECK(c(0, 0).real() == doctest::Approx(0.15f));
    CHECK(c(0, 0).imag() == doctest::Approx(0.f));
    CHECK(c(0, 1).real() == doctest::Approx(-0.3f));
    CHECK(c(0, 2) == std::complex<float>(0.f, 0.f));

    const Eigen::MatrixXcf back = dsp::decompand(c, params);
    CHECK(back(0, 0).real() == doctest::Approx(1.f));
    CHECK(back(0, 1).real() == doctest::Approx(-4.f));

    Eigen::MatrixXcf d(1, 1);
    d << std::complex<float>(-0.3f, 0.f);
    CHECK(dsp::decompand(d, params)(0, 0).real() == doctest::Approx(-4.f));
}

TEST_CASE("companding with alpha=1 beta=1 is the identity") {
    const CompandingParams params{1.f, 1.f};
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<float> dist(-2.f, 2.f);
    Eigen::MatrixXcf m(8, 8);
    for (Eigen::Index j = 0; j < 8; ++j)
        for (Eigen::Index i = 0; i < 8; ++i) m(i, j) = {dist(rng), dist(rng)};
    CHECK((dsp::compand(m, params) - m).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("double-precision companding round-trips below 1e-10 relative error") {
    const CompandingParams params{0.5f, 0.15f};
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    Eigen::MatrixXcd m(32, 32);
    for (Eigen::Index j = 0; j < 32; ++j)
        for (Eigen::Index i = 0; i < 32; ++i) m(i, j) = {dist(rng), dist(rng)};
    const Eigen::MatrixXcd back = dsp::decompand(dsp::compand(m, params), params);
    double max_rel = 0.0;
    for (Eigen::Index j = 0; j < 32; ++j)
        for (Eigen::Index i = 0; i < 32; ++i)
            max_rel = std::max(max_rel, std::abs(back(i, j) - m(i, j)) / std::abs(m(i, j)));
    CHECK(max_rel < 1e-10);
}

TEST_CASE("mel filterbank follows the HTK scale with unit-peak triangles") {
    dsp::MelConfig cfg;
    cfg.n_mels = 80;
    cfg.hop = 240;
    cfg.fft_size = 2048;
    const Eigen::MatrixXf fb = dsp::mel_filterbank(cfg);
    REQUIRE(fb.rows() == 80);
    REQUIRE(fb.cols() == 1025);
    CHECK(fb.minCoeff() >= 0.f);
    CHECK(fb.maxCoeff() <= 1.f + 1e-6f);

    // oracle: band edges from the HTK forward/backward mel map
    auto hz_to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto mel_to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    const double mel_max = hz_to_mel(24000.0);
    // filter 0 peaks at the first interior mel point
    const double peak_hz = mel_to_hz(mel_max / 81.0);
    int peak_bin = 0;
    fb.row(0).maxCoeff(&peak_bin);
    const double bin_hz = double(peak_bin) * 48000.0 / 2048.0;
    CHECK(std::abs(bin_hz - peak_hz) < 48000.0 / 2048.0);  // within one bin

    // every filter has positive mass
    for (int i = 0; i < 80; ++i) CHECK(fb.row(i).sum() > 0.f);
}

TEST_CASE("mel spectrogram shape and energy bound") {
    dsp::WaveSegment wave;
    wave.samples = random_wave(48000, 16);
    dsp::MelConfig cfg;
    cfg.hop = 50;
    cfg.fft_size = 512;
    const Eigen::MatrixXf mel = dsp::mel_spectrogram(wave, cfg);
    CHECK(mel.rows() == 80);
    CHECK(mel.cols() == 960);
    CHECK(mel.minCoeff() >= 0.f);

    // filter peaks are 1 and triangles overlap at most pairwise, so the
    // total mel magnitude cannot exceed the total spectral magnitude
    const dsp::ComplexSpectrogram spec = dsp::stft(wave, cfg.hop, cfg.fft_size);
    CHECK(mel.sum() <= spec.data.cwiseAbs().sum() * (1.f + 1e-5f));

    dsp::WaveSegment zero;
    zero.samples.assign(4800, 0.f);
    CHECK(dsp::mel_spectrogram(zero, cfg).maxCoeff() == 0.f);

    dsp::WaveSegment tiny;
    tiny.samples.assign(10, 0.f);
    CHECK_THROWS(dsp::mel_spectrogram(tiny, cfg));
}

TEST_CASE("wav files round-trip through the reader and writer") {
    dsp::WaveSegment wave;
    wave.sample_rate = 48000;
    wave.samples = random_wave(4800, 17);
    for (float& v : wave.samples) v *= 0.9f;

    for (int bits : {16, 24}) {
        const std::string path = "/tmp/complexdec_wavtest_" + std::to_string(bits) + ".wav";
        dsp::write_wav(path, wave, bits);
        const dsp::WaveSegment back = dsp::read_wav(path);
        REQUIRE(back.length() == wave.length());
        CHECK(back.sample_rate == wave.sample_rate);
        const float step = bits == 16 ? 1.f / 32768.f : 1.f / 8388608.f;
        for (int i = 0; i < wave.length(); ++i)
            CHECK(std::abs(back.samples[i] - wave.samples[i]) <= 0.6f * step);
    }
}
