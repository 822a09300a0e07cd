#include "sqgforge/field.hpp"

#include <algorithm>
#include <cmath>

#include "sqgforge/fft.hpp"

namespace sqgforge {

void fft_phys_to_spec(const Grid& g, Complex* data) {
    const int n = g.n();
    Fft::forward(n, data, data);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (int my = 0; my < n; ++my) {
        Complex* row = data + static_cast<size_t>(my) * n;
        for (int mx = 0; mx < n; ++mx) {
            double s = ((mx + my) & 1) ? -scale : scale;
            row[mx] *= s;
        }
    }
}

void fft_spec_to_phys(const Grid& g, Complex* data) {
    const int n = g.n();
    for (int my = 0; my < n; ++my) {
        Complex* row = data + static_cast<size_t>(my) * n;
        for (int mx = 0; mx < n; ++mx) {
            if ((mx + my) & 1) row[mx] = -row[mx];
        }
    }
    Fft::backward(n, data, data);
}

ScalarField::ScalarField(const Grid& g)
    : grid_(g), phys_(g.size(), 0.0), spec_(g.size(), Complex(0.0, 0.0)) {}

void ScalarField::ensure_phys() const {
    if (has_phys_) return;
    std::vector<Complex> buf = spec_;
    fft_spec_to_phys(grid_, buf.data());
    phys_.resize(grid_.size());
    for (std::size_t i = 0; i < phys_.size(); ++i) phys_[i] = buf[i].real();
    has_phys_ = true;
}

void ScalarField::ensure_spec() const {
    if (has_spec_) return;
    spec_.resize(grid_.size());
    for (std::size_t i = 0; i < spec_.size(); ++i) spec_[i] = Complex(phys_[i], 0.0);
    fft_phys_to_spec(grid_, spec_.data());
    has_spec_ = true;
}

const std::vector<double>& ScalarField::cphys() const {
    ensure_phys();
    return phys_;
}

const std::vector<Complex>& ScalarField::cspec() const {
    ensure_spec();
    return spec_;
}

std::vector<double>& ScalarField::mutable_phys() {
    ensure_phys();
    has_spec_ = false;
    return phys_;
}

std::vector<Complex>& ScalarField::mutable_spec() {
    ensure_spec();
    has_phys_ = false;
    return spec_;
}

double ScalarField::mean() const {
    if (has_spec_) return spec_[0].real();
    double s = 0.0;
    for (double v : phys_) s += v;
    return s / static_cast<double>(phys_.size());
}

int ScalarField::band_inf(double rel_tol) const {
    const auto& sp = cspec();
    const int n = grid_.n();
    double peak = 0.0;
    for (const auto& c : sp) peak = std::max(peak, std::abs(c));
    if (peak == 0.0) return 0;
    const double thr = rel_tol * peak;
    int band = 0;
    for (int my = 0; my < n; ++my) {
        int ky = std::abs(grid_.wrap(my));
        for (int mx = 0; mx < n; ++mx) {
            if (std::abs(sp[static_cast<size_t>(my) * n + mx]) > thr) {
                int k = std::max(std::abs(grid_.wrap(mx)), ky);
                band = std::max(band, k);
            }
        }
    }
    return band;
}

namespace {

template <typename T, typename Op>
void combine(std::vector<T>& a, const std::vector<T>& b, Op op) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = op(a[i], b[i]);
}

}  // namespace

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    if (grid_ != o.grid_) throw ValidationError("field grids differ");
    // Prefer combining in whichever representation both sides already have.
    if (has_spec_ && o.has_spec_) {
        combine(spec_, o.spec_, [](Complex a, Complex b) { return a + b; });
        if (has_phys_ && o.has_phys_)
            combine(phys_, o.phys_, [](double a, double b) { return a + b; });
        else
            has_phys_ = false;
    } else {
        ensure_phys();
        combine(phys_, o.cphys(), [](double a, double b) { return a + b; });
        has_spec_ = false;
    }
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    if (grid_ != o.grid_) throw ValidationError("field grids differ");
    if (has_spec_ && o.has_spec_) {
        combine(spec_, o.spec_, [](Complex a, Complex b) { return a - b; });
        if (has_phys_ && o.has_phys_)
            combine(phys_, o.phys_, [](double a, double b) { return a - b; });
        else
            has_phys_ = false;
    } else {
        ensure_phys();
        combine(phys_, o.cphys(), [](double a, double b) { return a - b; });
        has_spec_ = false;
    }
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    if (has_spec_)
        for (auto& c : spec_) c *= s;
    if (has_phys_)
        for (auto& v : phys_) v *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

SymTensorField operator+(SymTensorField a, const SymTensorField& b) { return a += b; }
SymTensorField operator-(SymTensorField a, const SymTensorField& b) { return a -= b; }
SymTensorField operator*(double s, SymTensorField a) { return a *= s; }

}  // namespace sqgforge
