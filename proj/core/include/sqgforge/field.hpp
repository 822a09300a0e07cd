#pragma once

#include <complex>
#include <vector>

#include "sqgforge/grid.hpp"

namespace sqgforge {

using Complex = std::complex<double>;

/// In-place transforms between physical samples and mathematical Fourier
/// coefficients f(x) = sum_k fhat(k) exp(i k.x) on [-pi,pi)^2. The
/// quadrant phase (-1)^(mx+my) accounts for the grid origin at -pi.
void fft_phys_to_spec(const Grid& g, Complex* data);
void fft_spec_to_phys(const Grid& g, Complex* data);

/// Real scalar field with paired physical/spectral representations kept
/// lazily consistent through dirty flags. Reads materialize; writers must
/// use the mutable_* accessors, which invalidate the other representation.
class ScalarField {
  public:
    explicit ScalarField(const Grid& g);

    const Grid& grid() const { return grid_; }
    int n() const { return grid_.n(); }
    std::size_t size() const { return grid_.size(); }

    const std::vector<double>& cphys() const;
    const std::vector<Complex>& cspec() const;
    std::vector<double>& mutable_phys();
    std::vector<Complex>& mutable_spec();

    bool has_phys() const { return has_phys_; }
    bool has_spec() const { return has_spec_; }

    double mean() const;

    /// Largest |k|_inf carrying more than rel_tol of the peak magnitude.
    int band_inf(double rel_tol = 1e-13) const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);

  private:
    void ensure_phys() const;
    void ensure_spec() const;

    Grid grid_;
    mutable std::vector<double> phys_;
    mutable std::vector<Complex> spec_;
    mutable bool has_phys_ = true;
    mutable bool has_spec_ = true;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

struct VectorField {
    explicit VectorField(const Grid& g) : x(g), y(g) {}
    ScalarField x, y;

    const Grid& grid() const { return x.grid(); }
    VectorField& operator+=(const VectorField& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    VectorField& operator*=(double s) {
        x *= s;
        y *= s;
        return *this;
    }
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Symmetric 2x2 tensor field; xy = yx by storage.
struct SymTensorField {
    explicit SymTensorField(const Grid& g) : xx(g), xy(g), yy(g) {}
    ScalarField xx, xy, yy;

    const Grid& grid() const { return xx.grid(); }
    SymTensorField& operator+=(const SymTensorField& o) {
        xx += o.xx;
        xy += o.xy;
        yy += o.yy;
        return *this;
    }
    SymTensorField& operator-=(const SymTensorField& o) {
        xx -= o.xx;
        xy -= o.xy;
        yy -= o.yy;
        return *this;
    }
    SymTensorField& operator*=(double s) {
        xx *= s;
        xy *= s;
        yy *= s;
        return *this;
    }
};

SymTensorField operator+(SymTensorField a, const SymTensorField& b);
SymTensorField operator-(SymTensorField a, const SymTensorField& b);
SymTensorField operator*(double s, SymTensorField a);

}  // namespace sqgforge
