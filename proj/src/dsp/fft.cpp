#include "complexdec/dsp/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace complexdec::dsp {

namespace {
// FFTW plan creation is not thread-safe.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft::Fft(int n) : n_(n), real_buf_(n), cplx_buf_(n / 2 + 1) {
    if (n <= 0 || n % 2 != 0) throw std::invalid_argument("Fft: size must be positive and even");
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_fwd_ = fftwf_plan_dft_r2c_1d(n_, real_buf_.data(),
                                      reinterpret_cast<fftwf_complex*>(cplx_buf_.data()),
                                      FFTW_ESTIMATE);
    plan_inv_ = fftwf_plan_dft_c2r_1d(n_, reinterpret_cast<fftwf_complex*>(cplx_buf_.data()),
                                      real_buf_.data(), FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_inv_) throw std::runtime_error("Fft: plan creation failed");
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftwf_destroy_plan(static_cast<fftwf_plan>(plan_fwd_));
    fftwf_destroy_plan(static_cast<fftwf_plan>(plan_inv_));
}

void Fft::forward(const float* in, std::complex<float>* out) const {
    std::memcpy(real_buf_.data(), in, sizeof(float) * n_);
    fftwf_execute_dft_r2c(static_cast<fftwf_plan>(plan_fwd_), real_buf_.data(),
                          reinterpret_cast<fftwf_complex*>(cplx_buf_.data()));
    std::memcpy(out, cplx_buf_.data(), sizeof(std::complex<float>) * bins());
}

void Fft::inverse(const std::complex<float>* in, float* out) const {
    // c2r destroys its input, so always go through the scratch buffer.
    std::memcpy(cplx_buf_.data(), in, sizeof(std::complex<float>) * bins());
    fftwf_execute_dft_c2r(static_cast<fftwf_plan>(plan_inv_),
                          reinterpret_cast<fftwf_complex*>(cplx_buf_.data()), real_buf_.data());
    std::memcpy(out, real_buf_.data(), sizeof(float) * n_);
}

void Fft::forward_adjoint(const std::complex<float>* din, float* dout) const {
    // d/dx of a loss through X = r2c(x): dout_n = sum_k Re(dX_k e^{i theta}),
    // which is c2r with the hermitian doubling of interior bins undone.
    const int nb = bins();
    std::memcpy(cplx_buf_.data(), din, sizeof(std::complex<float>) * nb);
    for (int k = 1; k + 1 < nb; ++k) cplx_buf_[k] *= 0.5f;
    fftwf_execute_dft_c2r(static_cast<fftwf_plan>(plan_inv_),
                          reinterpret_cast<fftwf_complex*>(cplx_buf_.data()), real_buf_.data());
    std::memcpy(dout, real_buf_.data(), sizeof(float) * n_);
}

void Fft::inverse_adjoint(const float* din, std::complex<float>* dout) const {
    // Adjoint of x = c2r(X)/N: dX = r2c(dx) with interior bins doubled, /N.
    std::memcpy(real_buf_.data(), din, sizeof(float) * n_);
    fftwf_execute_dft_r2c(static_cast<fftwf_plan>(plan_fwd_), real_buf_.data(),
                          reinterpret_cast<fftwf_complex*>(cplx_buf_.data()));
    const int nb = bins();
    const float inv_n = 1.0f / float(n_);
    for (int k = 0; k < nb; ++k) {
        float scale = (k == 0 || k == nb - 1) ? inv_n : 2.0f * inv_n;
        dout[k] = cplx_buf_[k] * scale;
    }
}

}  // namespace complexdec::dsp
