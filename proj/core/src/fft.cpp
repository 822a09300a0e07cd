#include "sqgforge/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace sqgforge {

namespace {

std::mutex g_plan_mutex;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

PlanPair& plans_for(int n) {
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    // Scratch buffer only for planning; FFTW_UNALIGNED lets the plan run on
    // any array the caller owns.
    fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n) * n);
    PlanPair p;
    p.fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    return cache.emplace(n, p).first->second;
}

}  // namespace

void Fft::forward(int n, std::complex<double>* in, std::complex<double>* out) {
    fftw_execute_dft(plans_for(n).fwd, reinterpret_cast<fftw_complex*>(in),
                     reinterpret_cast<fftw_complex*>(out));
}

void Fft::backward(int n, std::complex<double>* in, std::complex<double>* out) {
    fftw_execute_dft(plans_for(n).bwd, reinterpret_cast<fftw_complex*>(in),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace sqgforge
