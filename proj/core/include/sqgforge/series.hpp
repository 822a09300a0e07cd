#pragma once

#include <cstdint>
#include <vector>

#include "sqgforge/field.hpp"

namespace sqgforge {

/// Uniform time samples t(s) = t0 + s dt.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    int nt = 0;

    double t(int s) const { return t0 + dt * s; }
    double t_end() const { return t(nt - 1); }
    bool contains_index(int s) const { return s >= 0 && s < nt; }
    /// Nearest sample index, clamped into range.
    int nearest(double time) const;
    void validate() const;
};

/// Sparse spectral snapshot: sorted linear mode indices plus coefficients.
/// Exact zeros are dropped; an optional relative threshold also drops the
/// roundoff sea left by physical-space products.
class CompactScalar {
  public:
    CompactScalar() = default;

    static CompactScalar compact(const ScalarField& f, double rel_tol = 0.0);
    ScalarField expand(const Grid& g) const;

    int n = 0;  // grid size the indices refer to
    std::vector<std::uint32_t> idx;
    std::vector<Complex> val;

    std::size_t nnz() const { return idx.size(); }
    bool empty() const { return idx.empty(); }

    CompactScalar scaled(double s) const;
    friend CompactScalar add(const CompactScalar& a, const CompactScalar& b,
                             double ca, double cb);
    bool operator==(const CompactScalar& o) const {
        return n == o.n && idx == o.idx && val == o.val;
    }

    /// sqrt(sum |val|^2): spectral l2, equals the field's rms.
    double l2() const;
    /// sum |val|: an upper bound for the sup norm.
    double l1() const;
};

struct CompactVector {
    CompactScalar x, y;

    static CompactVector compact(const VectorField& f, double rel_tol = 0.0);
    VectorField expand(const Grid& g) const;
    CompactVector scaled(double s) const;
    bool operator==(const CompactVector& o) const { return x == o.x && y == o.y; }
    std::size_t nnz() const { return x.nnz() + y.nnz(); }
};

CompactVector add(const CompactVector& a, const CompactVector& b, double ca, double cb);

struct CompactSym {
    CompactScalar xx, xy, yy;

    static CompactSym compact(const SymTensorField& f, double rel_tol = 0.0);
    SymTensorField expand(const Grid& g) const;
    CompactSym scaled(double s) const;
    bool operator==(const CompactSym& o) const {
        return xx == o.xx && xy == o.xy && yy == o.yy;
    }
    std::size_t nnz() const { return xx.nnz() + xy.nnz() + yy.nnz(); }
};

CompactSym add(const CompactSym& a, const CompactSym& b, double ca, double cb);

template <typename C>
struct Series {
    TimeGrid tg;
    std::vector<C> samples;

    const C& at(int s) const { return samples[static_cast<std::size_t>(s)]; }
    C& at(int s) { return samples[static_cast<std::size_t>(s)]; }
    /// Zero-extension outside the window.
    C at_extended(int s) const {
        if (s < 0 || s >= tg.nt) return C{};
        return samples[static_cast<std::size_t>(s)];
    }
};

using ScalarSeries = Series<CompactScalar>;
using VectorSeries = Series<CompactVector>;
using SymSeries = Series<CompactSym>;

/// Cubic Lagrange interpolation in time of the spectral coefficients,
/// zero-extended beyond the window.
CompactVector interp_cubic(const VectorSeries& series, double time);
CompactSym interp_cubic(const SymSeries& series, double time);

/// Centered difference (s+1 minus s-1) / (2 dt), zero-extended.
CompactVector time_derivative(const VectorSeries& series, int s);
CompactSym time_derivative(const SymSeries& series, int s);

}  // namespace sqgforge
