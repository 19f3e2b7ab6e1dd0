#include "complexdec/losses/losses.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace complexdec::losses {

namespace {

void check_shapes(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat, const char* who) {
    if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols())
        throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

constexpr float kLn10 = 2.302585092994046f;

}  // namespace

std::string LossReport::to_json_line(int step) const {
    std::ostringstream os;
    os << "{\"step\":" << step << ",\"vq\":" << vq << ",\"mel\":" << mel << ",\"mse\":" << mse
       << ",\"mae\":" << mae << ",\"total\":" << total << "}";
    return os.str();
}

float complex_mse(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat) {
    check_shapes(x, x_hat, "complex_mse");
    const Eigen::MatrixXcf d = x - x_hat;
    const double n = double(x.size());
    const double re = d.real().cast<double>().array().square().sum() / n;
    const double im = d.imag().cast<double>().array().square().sum() / n;
    return float((re + im) / 2.0);
}

Eigen::MatrixXcf complex_mse_backward(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat) {
    check_shapes(x, x_hat, "complex_mse");
    // d/dRe = (rhat - r)/N per branch; the /2 and the squared-term factor 2
    // cancel.
    return (x_hat - x) / float(x.size());
}

float complex_mae(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat) {
    check_shapes(x, x_hat, "complex_mae");
    return float((x - x_hat).cast<std::complex<double>>().cwiseAbs().sum() / double(x.size()));
}

Eigen::MatrixXcf complex_mae_backward(const Eigen::MatrixXcf& x, const Eigen::MatrixXcf& x_hat) {
    check_shapes(x, x_hat, "complex_mae");
    Eigen::MatrixXcf grad(x.rows(), x.cols());
    const float inv_n = 1.0f / float(x.size());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const std::complex<float> d = x_hat(i, j) - x(i, j);
            const float mag = std::abs(d);
            grad(i, j) = mag > 0.f ? d * (inv_n / mag) : std::complex<float>(0.f, 0.f);
        }
    }
    return grad;
}

std::vector<dsp::MelConfig> MelLossConfig::resolutions(int sample_rate) const {
    if (hops.size() != fft_sizes.size())
        throw std::invalid_argument("MelLossConfig: hops/fft_sizes length mismatch");
    std::vector<dsp::MelConfig> out;
    for (size_t i = 0; i < hops.size(); ++i) {
        dsp::MelConfig mc;
        mc.n_mels = n_mels;
        mc.hop = hops[i];
        mc.fft_size = fft_sizes[i];
        mc.fmin = fmin;
        mc.fmax = fmax;
        mc.sample_rate = sample_rate;
        out.push_back(mc);
    }
    return out;
}

float multires_mel_loss(const dsp::WaveSegment& wave, const dsp::WaveSegment& wave_hat,
                        const MelLossConfig& cfg) {
    if (wave.length() != wave_hat.length())
        throw std::invalid_argument("multires_mel_loss: length mismatch");
    const auto resolutions = cfg.resolutions(wave.sample_rate);
    double total = 0.0;
    for (const dsp::MelConfig& mc : resolutions) {
        const Eigen::MatrixXf mel_x = dsp::mel_spectrogram(wave, mc).cwiseMax(cfg.log_floor);
        const Eigen::MatrixXf mel_h = dsp::mel_spectrogram(wave_hat, mc).cwiseMax(cfg.log_floor);
        const Eigen::ArrayXXf diff =
            (mel_x.array().log10() - mel_h.array().log10()).abs();
        total += double(diff.sum()) / double(diff.size());
    }
    return float(total / double(resolutions.size()));
}

std::vector<float> multires_mel_loss_backward(const dsp::WaveSegment& wave,
                                              const dsp::WaveSegment& wave_hat,
                                              const MelLossConfig& cfg) {
    if (wave.length() != wave_hat.length())
        throw std::invalid_argument("multires_mel_loss: length mismatch");
    const auto resolutions = cfg.resolutions(wave.sample_rate);
    std::vector<float> dwave(size_t(wave_hat.length()), 0.0f);

    for (const dsp::MelConfig& mc : resolutions) {
        const Eigen::MatrixXf fb = dsp::mel_filterbank(mc);
        const dsp::ComplexSpectrogram spec_h = dsp::stft(wave_hat, mc.hop, mc.fft_size);
        const Eigen::MatrixXf mag_h = spec_h.data.cwiseAbs();
        const Eigen::MatrixXf mel_x_raw = dsp::mel_spectrogram(wave, mc);
        const Eigen::MatrixXf mel_h_raw = fb * mag_h;
        const Eigen::MatrixXf mel_x = mel_x_raw.cwiseMax(cfg.log_floor);
        const Eigen::MatrixXf mel_h = mel_h_raw.cwiseMax(cfg.log_floor);

        const float scale = 1.0f / (float(mel_h.size()) * float(resolutions.size()));
        // d|log10 a - log10 b|/db = -sign(log a - log b) / (b ln10), clamped
        // region contributes nothing.
        Eigen::MatrixXf dmel(mel_h.rows(), mel_h.cols());
        for (Eigen::Index j = 0; j < mel_h.cols(); ++j) {
            for (Eigen::Index i = 0; i < mel_h.rows(); ++i) {
                if (mel_h_raw(i, j) <= cfg.log_floor) {
                    dmel(i, j) = 0.f;
                    continue;
                }
                const float s = mel_x(i, j) >= mel_h(i, j) ? 1.f : -1.f;
                dmel(i, j) = -s * scale / (mel_h(i, j) * kLn10);
            }
        }

        const Eigen::MatrixXf dmag = fb.transpose() * dmel;
        Eigen::MatrixXcf dspec(spec_h.data.rows(), spec_h.data.cols());
        for (Eigen::Index j = 0; j < dspec.cols(); ++j) {
            for (Eigen::Index i = 0; i < dspec.rows(); ++i) {
                const float mag = mag_h(i, j);
                dspec(i, j) = mag > 0.f ? spec_h.data(i, j) * (dmag(i, j) / mag)
                                        : std::complex<float>(0.f, 0.f);
            }
        }

        const std::vector<float> dw =
            dsp::stft_adjoint(dspec, wave_hat.length(), mc.hop, mc.fft_size);
        for (size_t i = 0; i < dwave.size(); ++i) dwave[i] += dw[i];
    }
    return dwave;
}

LossReport total_loss(float vq, float mel, float mse, float mae, const LossWeights& weights) {
    const struct {
        const char* name;
        float value;
    } terms[] = {{"vq", vq}, {"mel", mel}, {"mse", mse}, {"mae", mae}};
    for (const auto& t : terms)
        if (!std::isfinite(t.value))
            throw std::runtime_error(std::string("total_loss: non-finite term ") + t.name);

    LossReport r;
    r.vq = vq;
    r.mel = mel;
    r.mse = mse;
    r.mae = mae;
    r.total = weights.w_vq * vq + weights.w_mel * mel + weights.w_mse * mse + weights.w_mae * mae;
    return r;
}

}  // namespace complexdec::losses
