#include "complexdec/dsp/compand.hpp"

#include <cmath>
#include <stdexcept>

namespace complexdec::dsp {

namespace {

// Both directions are a real magnitude remap; multiplying by a real factor
// keeps the phase untouched.
template <typename Scalar, typename MagMap>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> remap_magnitude(
    const Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>& spec, MagMap map) {
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> out(spec.rows(),
                                                                            spec.cols());
    for (Eigen::Index j = 0; j < spec.cols(); ++j) {
        for (Eigen::Index i = 0; i < spec.rows(); ++i) {
            const std::complex<Scalar> v = spec(i, j);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("compand: non-finite spectrogram entry");
            const Scalar mag = std::abs(v);
            out(i, j) = mag == Scalar(0) ? std::complex<Scalar>(0, 0) : v * (map(mag) / mag);
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXcf compand(const Eigen::MatrixXcf& spec, const CompandingParams& params) {
    params.validate();
    return remap_magnitude<float>(
        spec, [&](float m) { return params.beta * std::pow(m, params.alpha); });
}

Eigen::MatrixXcf decompand(const Eigen::MatrixXcf& spec, const CompandingParams& params) {
    params.validate();
    return remap_magnitude<float>(
        spec, [&](float m) { return std::pow(m / params.beta, 1.0f / params.alpha); });
}

Eigen::MatrixXcd compand(const Eigen::MatrixXcd& spec, const CompandingParams& params) {
    params.validate();
    const double alpha = params.alpha, beta = params.beta;
    return remap_magnitude<double>(spec, [=](double m) { return beta * std::pow(m, alpha); });
}

Eigen::MatrixXcd decompand(const Eigen::MatrixXcd& spec, const CompandingParams& params) {
    params.validate();
    const double alpha = params.alpha, beta = params.beta;
    return remap_magnitude<double>(spec,
                                   [=](double m) { return std::pow(m / beta, 1.0 / alpha); });
}

ComplexSpectrogram compand(const ComplexSpectrogram& spec, const CompandingParams& params) {
    ComplexSpectrogram out = spec;
    out.data = compand(spec.data, params);
    return out;
}

ComplexSpectrogram decompand(const ComplexSpectrogram& spec, const CompandingParams& params) {
    ComplexSpectrogram out = spec;
    out.data = decompand(spec.data, params);
    return out;
}

}  // namespace complexdec::dsp
