// compand.hpp
// Amplitude companding of complex spectra: x' = beta |x|^alpha e^{i angle(x)}.
// Phase is preserved exactly; zero maps to zero.

#pragma once

#include <Eigen/Dense>

#include "complexdec/config.hpp"
#include "complexdec/dsp/stft.hpp"

namespace complexdec::dsp {

Eigen::MatrixXcf compand(const Eigen::MatrixXcf& spec, const CompandingParams& params);
Eigen::MatrixXcf decompand(const Eigen::MatrixXcf& spec, const CompandingParams& params);

// Double-precision variants; the round-trip identity holds to ~1e-12
// relative here, versus float rounding (~1e-7) above.
Eigen::MatrixXcd compand(const Eigen::MatrixXcd& spec, const CompandingParams& params);
Eigen::MatrixXcd decompand(const Eigen::MatrixXcd& spec, const CompandingParams& params);

ComplexSpectrogram compand(const ComplexSpectrogram& spec, const CompandingParams& params);
ComplexSpectrogram decompand(const ComplexSpectrogram& spec, const CompandingParams& params);

}  // namespace complexdec::dsp
