#include "complexdec/dsp/stft.hpp"

#include <cmath>
#include <stdexcept>

#include "complexdec/dsp/fft.hpp"

namespace complexdec::dsp {

namespace {

constexpr float kNolaEps = 1e-8f;
// Below this coverage a sample sits in the OLA boundary taper; normalizing
// there would amplify noise, so those samples are emitted as zero.
constexpr double kCoverageEps = 1e-3;

// Steady-state overlap-add coverage must be bounded away from zero at every
// phase of the hop grid, otherwise the window/hop pair leaves periodic gaps.
void check_overlap_add(const std::vector<float>& win, int hop) {
    const int n = int(win.size());
    for (int o = 0; o < hop; ++o) {
        double s = 0.0;
        for (int i = o; i < n; i += hop) s += double(win[i]) * double(win[i]);
        if (s < kNolaEps)
            throw std::runtime_error("istft: window/hop pair violates the overlap-add condition");
    }
}

// Reflect (no edge repeat) with bouncing, valid for any signal length.
int reflect_index(int i, int len) {
    if (len == 1) return 0;
    const int period = 2 * (len - 1);
    i = std::abs(i) % period;
    return i < len ? i : period - i;
}

std::vector<float> padded_frames_source(const std::vector<float>& x, int pad) {
    const int len = int(x.size());
    std::vector<float> padded(len + 2 * pad);
    for (int p = 0; p < int(padded.size()); ++p) padded[p] = x[reflect_index(p - pad, len)];
    return padded;
}

}  // namespace

std::vector<float> hann_window(int n) {
    std::vector<float> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = 0.5f * (1.0f - std::cos(2.0 * M_PI * double(i) / double(n)));
    return w;
}

ComplexSpectrogram stft(const WaveSegment& wave, int hop, int fft_size, WindowType window) {
    if (wave.samples.empty()) throw std::invalid_argument("stft: empty input");
    if (hop <= 0 || hop > fft_size) throw std::invalid_argument("stft: require 0 < hop <= fft_size");
    for (float s : wave.samples)
        if (!std::isfinite(s)) throw std::invalid_argument("stft: non-finite sample");

    const int len = wave.length();
    const int pad = fft_size / 2;
    const int frames = (len + hop - 1) / hop;
    const std::vector<float> win = hann_window(fft_size);
    const std::vector<float> padded = padded_frames_source(wave.samples, pad);

    Fft fft(fft_size);
    ComplexSpectrogram spec;
    spec.data.resize(fft.bins(), frames);
    spec.hop = hop;
    spec.fft_size = fft_size;
    spec.window = window;
    spec.sample_rate = wave.sample_rate;

    std::vector<float> frame(fft_size);
    for (int t = 0; t < frames; ++t) {
        const float* src = padded.data() + t * hop;
        for (int i = 0; i < fft_size; ++i) frame[i] = src[i] * win[i];
        fft.forward(frame.data(), spec.data.col(t).data());
    }
    return spec;
}

WaveSegment istft(const ComplexSpectrogram& spec, int target_length) {
    const int fft_size = spec.fft_size;
    const int hop = spec.hop;
    const int frames = spec.frames();
    const int pad = fft_size / 2;
    if (spec.bins() != fft_size / 2 + 1)
        throw std::invalid_argument("istft: bin count inconsistent with fft_size");
    if (target_length < 0) throw std::invalid_argument("istft: negative target length");

    const std::vector<float> win = hann_window(fft_size);
    check_overlap_add(win, hop);
    const int buf_len = (frames - 1) * hop + fft_size;
    std::vector<double> acc(buf_len, 0.0), wsum2(buf_len, 0.0);

    Fft fft(fft_size);
    std::vector<float> frame(fft_size);
    const float inv_n = 1.0f / float(fft_size);
    for (int t = 0; t < frames; ++t) {
        fft.inverse(spec.data.col(t).data(), frame.data());
        const int off = t * hop;
        for (int i = 0; i < fft_size; ++i) {
            acc[off + i] += double(frame[i] * inv_n * win[i]);
            wsum2[off + i] += double(win[i]) * double(win[i]);
        }
    }

    WaveSegment out;
    out.sample_rate = spec.sample_rate;
    out.samples.assign(target_length, 0.0f);
    const int covered = std::min(target_length, buf_len - pad);
    for (int i = 0; i < covered; ++i)
        if (wsum2[pad + i] >= kCoverageEps)
            out.samples[i] = float(acc[pad + i] / wsum2[pad + i]);
    return out;
}

std::vector<float> stft_adjoint(const Eigen::MatrixXcf& dspec, int input_length, int hop,
                                int fft_size) {
    const int pad = fft_size / 2;
    const int frames = int(dspec.cols());
    const std::vector<float> win = hann_window(fft_size);
    std::vector<float> dpadded(input_length + 2 * pad, 0.0f);

    Fft fft(fft_size);
    std::vector<float> dframe(fft_size);
    for (int t = 0; t < frames; ++t) {
        fft.forward_adjoint(dspec.col(t).data(), dframe.data());
        const int off = t * hop;
        for (int i = 0; i < fft_size; ++i) dpadded[off + i] += dframe[i] * win[i];
    }

    // Fold the reflect padding back onto the source samples.
    std::vector<float> dx(input_length, 0.0f);
    for (int p = 0; p < int(dpadded.size()); ++p)
        dx[reflect_index(p - pad, input_length)] += dpadded[p];
    return dx;
}

Eigen::MatrixXcf istft_adjoint(const std::vector<float>& dwave, int frames, int hop, int fft_size,
                               int target_length) {
    const int pad = fft_size / 2;
    const std::vector<float> win = hann_window(fft_size);
    const int buf_len = (frames - 1) * hop + fft_size;

    std::vector<double> wsum2(buf_len, 0.0);
    for (int t = 0; t < frames; ++t)
        for (int i = 0; i < fft_size; ++i)
            wsum2[t * hop + i] += double(win[i]) * double(win[i]);

    std::vector<float> dbuf(buf_len, 0.0f);
    const int covered = std::min(target_length, buf_len - pad);
    for (int i = 0; i < covered; ++i)
        if (wsum2[pad + i] >= kCoverageEps) dbuf[pad + i] = dwave[i] / float(wsum2[pad + i]);

    Fft fft(fft_size);
    Eigen::MatrixXcf dspec(fft.bins(), frames);
    std::vector<float> dframe(fft_size);
    for (int t = 0; t < frames; ++t) {
        const int off = t * hop;
        for (int i = 0; i < fft_size; ++i) dframe[i] = dbuf[off + i] * win[i];
        fft.inverse_adjoint(dframe.data(), dspec.col(t).data());
    }
    return dspec;
}

}  // namespace complexdec::dsp
