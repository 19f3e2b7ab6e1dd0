// fft.hpp
// Thin RAII wrapper around FFTW single-precision real transforms.
// Supports arbitrary even sizes (the codec uses 510, not a power of two).

#pragma once

#include <complex>
#include <vector>

namespace complexdec::dsp {

// One forward (r2c) + inverse (c2r) plan pair for a fixed size n.
// forward(): X_k = sum_n x_n e^{-i 2 pi k n / N}, k = 0..N/2 (unnormalized).
// inverse(): unnormalized hermitian sum; caller divides by N.
// Plan creation is serialized internally; execution is thread-safe on
// distinct Fft instances.
class Fft {
public:
    explicit Fft(int n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int size() const { return n_; }
    int bins() const { return n_ / 2 + 1; }

    void forward(const float* in, std::complex<float>* out) const;
    void inverse(const std::complex<float>* in, float* out) const;

    // Adjoint of forward(): gradients wrt a half-spectrum back to the
    // time domain (interior bins contribute twice via hermitian symmetry).
    void forward_adjoint(const std::complex<float>* din, float* dout) const;

    // Adjoint of (inverse()/N): time-domain gradients back to the
    // half-spectrum.
    void inverse_adjoint(const float* din, std::complex<float>* dout) const;

private:
    int n_;
    void* plan_fwd_;
    void* plan_inv_;
    mutable std::vector<float> real_buf_;
    mutable std::vector<std::complex<float>> cplx_buf_;
};

}  // namespace complexdec::dsp
