#include "sqgforge/series.hpp"

#include <algorithm>
#include <cmath>

#include "sqgforge/error.hpp"

namespace sqgforge {

int TimeGrid::nearest(double time) const {
    int s = static_cast<int>(std::lround((time - t0) / dt));
    return std::clamp(s, 0, nt - 1);
}

void TimeGrid::validate() const {
    if (nt < 1 || !(dt > 0.0)) throw ValidationError("invalid time grid");
}

CompactScalar CompactScalar::compact(const ScalarField& f, double rel_tol) {
    const auto& sp = f.cspec();
    CompactScalar c;
    c.n = f.n();
    double thr = 0.0;
    if (rel_tol > 0.0) {
        double peak = 0.0;
        for (const auto& z : sp) peak = std::max(peak, std::abs(z));
        thr = rel_tol * peak;
    }
    for (std::uint32_t i = 0; i < sp.size(); ++i) {
        const Complex z = sp[i];
        if (z == Complex(0.0, 0.0)) continue;
        if (thr > 0.0 && std::abs(z) <= thr) continue;
        c.idx.push_back(i);
        c.val.push_back(z);
    }
    return c;
}

ScalarField CompactScalar::expand(const Grid& g) const {
    if (n != 0 && g.n() != n) throw ValidationError("compact/grid size mismatch");
    ScalarField f(g);
    auto& sp = f.mutable_spec();
    for (std::size_t i = 0; i < idx.size(); ++i) sp[idx[i]] = val[i];
    return f;
}

CompactScalar CompactScalar::scaled(double s) const {
    CompactScalar out = *this;
    for (auto& v : out.val) v *= s;
    return out;
}

CompactScalar add(const CompactScalar& a, const CompactScalar& b, double ca,
                  double cb) {
    CompactScalar out;
    out.n = a.n != 0 ? a.n : b.n;
    if (a.n != 0 && b.n != 0 && a.n != b.n)
        throw ValidationError("compact sizes differ");
    out.idx.reserve(a.idx.size() + b.idx.size());
    out.val.reserve(a.idx.size() + b.idx.size());
    std::size_t i = 0, j = 0;
    while (i < a.idx.size() || j < b.idx.size()) {
        bool ta = i < a.idx.size();
        bool tb = j < b.idx.size();
        if (ta && (!tb || a.idx[i] < b.idx[j])) {
            out.idx.push_back(a.idx[i]);
            out.val.push_back(ca * a.val[i]);
            ++i;
        } else if (tb && (!ta || b.idx[j] < a.idx[i])) {
            out.idx.push_back(b.idx[j]);
            out.val.push_back(cb * b.val[j]);
            ++j;
        } else {
            Complex v = ca * a.val[i] + cb * b.val[j];
            if (v != Complex(0.0, 0.0)) {
                out.idx.push_back(a.idx[i]);
                out.val.push_back(v);
            }
            ++i;
            ++j;
        }
    }
    return out;
}

double CompactScalar::l2() const {
    double s = 0.0;
    for (const auto& v : val) s += std::norm(v);
    return std::sqrt(s);
}

double CompactScalar::l1() const {
    double s = 0.0;
    for (const auto& v : val) s += std::abs(v);
    return s;
}

CompactVector CompactVector::compact(const VectorField& f, double rel_tol) {
    return {CompactScalar::compact(f.x, rel_tol), CompactScalar::compact(f.y, rel_tol)};
}

VectorField CompactVector::expand(const Grid& g) const {
    VectorField f(g);
    f.x = x.expand(g);
    f.y = y.expand(g);
    return f;
}

CompactVector CompactVector::scaled(double s) const { return {x.scaled(s), y.scaled(s)}; }

CompactVector add(const CompactVector& a, const CompactVector& b, double ca, double cb) {
    return {add(a.x, b.x, ca, cb), add(a.y, b.y, ca, cb)};
}

CompactSym CompactSym::compact(const SymTensorField& f, double rel_tol) {
    return {CompactScalar::compact(f.xx, rel_tol), CompactScalar::compact(f.xy, rel_tol),
            CompactScalar::compact(f.yy, rel_tol)};
}

SymTensorField CompactSym::expand(const Grid& g) const {
    SymTensorField f(g);
    f.xx = xx.expand(g);
    f.xy = xy.expand(g);
    f.yy = yy.expand(g);
    return f;
}

CompactSym CompactSym::scaled(double s) const {
    return {xx.scaled(s), xy.scaled(s), yy.scaled(s)};
}

CompactSym add(const CompactSym& a, const CompactSym& b, double ca, double cb) {
    return {add(a.xx, b.xx, ca, cb), add(a.xy, b.xy, ca, cb), add(a.yy, b.yy, ca, cb)};
}

namespace {

struct CubicStencil {
    int base;  // sample index of weight w[1]
    double w[4];
};

CubicStencil cubic_weights(const TimeGrid& tg, double time) {
    double u = (time - tg.t0) / tg.dt;
    int j = static_cast<int>(std::floor(u));
    double s = u - j;
    CubicStencil st;
    st.base = j;
    // Lagrange weights on nodes -1, 0, 1, 2.
    st.w[0] = -s * (s - 1.0) * (s - 2.0) / 6.0;
    st.w[1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    st.w[2] = -(s + 1.0) * s * (s - 2.0) / 2.0;
    st.w[3] = (s + 1.0) * s * (s - 1.0) / 6.0;
    return st;
}

}  // namespace

CompactVector interp_cubic(const VectorSeries& series, double time) {
    CubicStencil st = cubic_weights(series.tg, time);
    CompactVector acc;
    bool first = true;
    for (int m = 0; m < 4; ++m) {
        int s = st.base - 1 + m;
        if (st.w[m] == 0.0) continue;
        CompactVector term = series.at_extended(s);
        if (first) {
            acc = term.scaled(st.w[m]);
            first = false;
        } else {
            acc = add(acc, term, 1.0, st.w[m]);
        }
    }
    return acc;
}

CompactSym interp_cubic(const SymSeries& series, double time) {
    CubicStencil st = cubic_weights(series.tg, time);
    CompactSym acc;
    bool first = true;
    for (int m = 0; m < 4; ++m) {
        int s = st.base - 1 + m;
        if (st.w[m] == 0.0) continue;
        CompactSym term = series.at_extended(s);
        if (first) {
            acc = term.scaled(st.w[m]);
            first = false;
        } else {
            acc = add(acc, term, 1.0, st.w[m]);
        }
    }
    return acc;
}

CompactVector time_derivative(const VectorSeries& series, int s) {
    double c = 1.0 / (2.0 * series.tg.dt);
    return add(series.at_extended(s + 1), series.at_extended(s - 1), c, -c);
}

CompactSym time_derivative(const SymSeries& series, int s) {
    double c = 1.0 / (2.0 * series.tg.dt);
    return add(series.at_extended(s + 1), series.at_extended(s - 1), c, -c);
}

}  // namespace sqgforge
