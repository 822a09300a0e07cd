#pragma once

#include <complex>

namespace sqgforge {

/// Cached FFTW c2c plans per grid size. Plans are created with
/// FFTW_ESTIMATE so the chosen algorithm depends only on n, keeping
/// results bitwise reproducible across runs. Execution is reentrant.
class Fft {
  public:
    /// Unnormalized forward DFT (exponent -i), n x n row-major, out-of-place
    /// allowed with in == out.
    static void forward(int n, std::complex<double>* in, std::complex<double>* out);

    /// Unnormalized backward DFT (exponent +i).
    static void backward(int n, std::complex<double>* in, std::complex<double>* out);
};

}  // namespace sqgforge
