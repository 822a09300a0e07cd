#include "sqgforge/flowtime.hpp"

#include <algorithm>
#include <cmath>

#include "sqgforge/spectral.hpp"

namespace sqgforge {

// ---- Mollifier ------------------------------------------------------------

std::vector<double> mollifier_weights(double tau, double dt) {
    if (!(tau > 0.0) || !(dt > 0.0)) throw ValidationError("mollifier needs tau, dt > 0");
    if (dt > tau / 8.0 * (1.0 + 1e-12))
        throw ValidationError("time step too coarse for the mollifier stencil: need dt <= tau/8");
    const double half = tau / 2.0;
    const int m = static_cast<int>(std::floor(half / dt * (1.0 - 1e-15)));
    std::vector<double> w(static_cast<std::size_t>(2 * m + 1), 0.0);
    double sum = 0.0;
    for (int j = 0; j <= m; ++j) {
        double s = (j * dt) / half;
        double v = s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
        w[static_cast<std::size_t>(m + j)] = v;
        w[static_cast<std::size_t>(m - j)] = v;  // identical double: exact symmetry
        sum += j == 0 ? v : 2.0 * v;
    }
    for (auto& v : w) v /= sum;
    return w;
}

double mollifier_first_moment(double tau, double dt) {
    auto w = mollifier_weights(tau, dt);
    const int m = (static_cast<int>(w.size()) - 1) / 2;
    double s = 0.0;
    for (int j = -m; j <= m; ++j)
        s += std::abs(j * dt) * w[static_cast<std::size_t>(m + j)];
    return s / tau;
}

SymSeries mollify_time(const SymSeries& series, double tau) {
    series.tg.validate();
    auto w = mollifier_weights(tau, series.tg.dt);
    const int m = (static_cast<int>(w.size()) - 1) / 2;
    SymSeries out;
    out.tg = series.tg;
    out.samples.resize(static_cast<std::size_t>(series.tg.nt));
    for (int s = 0; s < series.tg.nt; ++s) {
        CompactSym acc;
        bool first = true;
        for (int j = -m; j <= m; ++j) {
            double wj = w[static_cast<std::size_t>(m + j)];
            CompactSym term = series.at_extended(s - j);
            if (term.nnz() == 0) continue;
            if (first) {
                acc = term.scaled(wj);
                first = false;
            } else {
                acc = add(acc, term, 1.0, wj);
            }
        }
        out.samples[static_cast<std::size_t>(s)] = acc;
    }
    return out;
}

// ---- Partition -------------------------------------------------------------

namespace {

double glue(double s) {  // exp(-1/s), flushed to an exact 0 at s <= 0
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

double glue_prime(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }

double sigma(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double a = glue(s), b = glue(1.0 - s);
    return a / (a + b);
}

double sigma_prime(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    double a = glue(s), b = glue(1.0 - s);
    double ap = glue_prime(s), bp = glue_prime(1.0 - s);
    double d = a + b;
    return (ap * b + a * bp) / (d * d);
}

}  // namespace

TimePartition::TimePartition(double tau_c, double support_lo, double support_hi,
                             double hard_lo)
    : tau_c_(tau_c) {
    if (!(tau_c > 0.0)) throw ValidationError("tau_c must be positive");
    if (!(support_hi >= support_lo)) throw ValidationError("empty partition support");
    i_lo_ = static_cast<long long>(std::floor(support_lo / tau_c));
    i_hi_ = static_cast<long long>(std::ceil(support_hi / tau_c));
    if (active_lo() < hard_lo)
        throw ValidationError(
            "partition bumps would reach into the zero region: support starts too "
            "close to the hard boundary");
}

double TimePartition::chi(long long i, double t) const {
    if (i < i_lo_ || i > i_hi_) return 0.0;
    double u = (t - t_cut(i - 1)) / tau_c_;
    if (u <= 0.0 || u >= 2.0) return 0.0;
    double s = u <= 1.0 ? u : u - 1.0;
    double sg = sigma(s);
    return u <= 1.0 ? std::sin(M_PI_2 * sg) : std::cos(M_PI_2 * sg);
}

double TimePartition::dchi(long long i, double t) const {
    if (i < i_lo_ || i > i_hi_) return 0.0;
    double u = (t - t_cut(i - 1)) / tau_c_;
    if (u <= 0.0 || u >= 2.0) return 0.0;
    double s = u <= 1.0 ? u : u - 1.0;
    double sg = sigma(s), sp = sigma_prime(s);
    double amp = M_PI_2 * sp / tau_c_;
    return u <= 1.0 ? amp * std::cos(M_PI_2 * sg) : -amp * std::sin(M_PI_2 * sg);
}

double TimePartition::sum_sq(double t) const {
    long long i0 = static_cast<long long>(std::floor(t / tau_c_));
    double s = 0.0;
    for (long long i = i0 - 1; i <= i0 + 2; ++i) {
        double c = chi(i, t);
        s += c * c;
    }
    return s;
}

double TimePartition::measured_derivative_constant() const {
    // One bump suffices; the profile repeats.
    long long i = i_lo_ + 1 <= i_hi_ ? i_lo_ + 1 : i_lo_;
    double best = 0.0;
    const int probes = 20001;
    for (int p = 0; p < probes; ++p) {
        double t = t_cut(i - 1) + 2.0 * tau_c_ * p / (probes - 1);
        best = std::max(best, std::abs(dchi(i, t)) * tau_c_);
    }
    return best;
}

TimePartition build_partition(const ParameterTable& table, int q, double support_lo,
                              double support_hi, double hard_lo) {
    long double tc = table.tau_c(q + 1);
    return TimePartition(static_cast<double>(tc), support_lo, support_hi, hard_lo);
}

// ---- ModeSum ---------------------------------------------------------------

ModeSum::ModeSum(const CompactVector& field, int n) {
    Grid g(std::max(4, n), std::max(1, n / 3));
    // Merge the two sparsity patterns.
    std::size_t ix = 0, iy = 0;
    auto push = [&](std::uint32_t idx, Complex cx, Complex cy) {
        int mx = static_cast<int>(idx) % n;
        int my = static_cast<int>(idx) / n;
        int kx = g.wrap(mx), ky = g.wrap(my);
        if (kx == 0 && ky == 0) {
            mean_[0] += cx.real();
            mean_[1] += cy.real();
            return;
        }
        // Real field: keep the half plane, double the contribution.
        if (ky < 0 || (ky == 0 && kx < 0)) return;
        modes_.push_back({static_cast<double>(kx), static_cast<double>(ky), cx, cy, 2.0});
    };
    const auto& X = field.x;
    const auto& Y = field.y;
    while (ix < X.idx.size() || iy < Y.idx.size()) {
        bool tx = ix < X.idx.size();
        bool ty = iy < Y.idx.size();
        if (tx && (!ty || X.idx[ix] < Y.idx[iy])) {
            push(X.idx[ix], X.val[ix], 0.0);
            ++ix;
        } else if (ty && (!tx || Y.idx[iy] < X.idx[ix])) {
            push(Y.idx[iy], 0.0, Y.val[iy]);
            ++iy;
        } else {
            push(X.idx[ix], X.val[ix], Y.val[iy]);
            ++ix;
            ++iy;
        }
    }
}

void ModeSum::eval(double x, double y, double out[2]) const {
    double ax = mean_[0], ay = mean_[1];
    for (const auto& m : modes_) {
        double phase = m.kx * x + m.ky * y;
        double c = std::cos(phase), s = std::sin(phase);
        ax += m.weight * (m.cx.real() * c - m.cx.imag() * s);
        ay += m.weight * (m.cy.real() * c - m.cy.imag() * s);
    }
    out[0] = ax;
    out[1] = ay;
}

double ModeSum::sup_bound() const {
    double bx = std::abs(mean_[0]), by = std::abs(mean_[1]);
    for (const auto& m : modes_) {
        bx += m.weight * std::abs(m.cx);
        by += m.weight * std::abs(m.cy);
    }
    return std::max(bx, by);
}

// ---- Flow maps -------------------------------------------------------------

namespace {

CompactVector lambda_multiplier(const CompactVector& v, int n) {
    Grid g(std::max(4, n), std::max(1, n / 3));
    CompactVector out = v;
    auto apply = [&](CompactScalar& c) {
        for (std::size_t i = 0; i < c.idx.size(); ++i) {
            int mx = static_cast<int>(c.idx[i]) % n;
            int my = static_cast<int>(c.idx[i]) / n;
            double kx = g.wrap(mx), ky = g.wrap(my);
            c.val[i] *= std::sqrt(kx * kx + ky * ky);
        }
    };
    apply(out.x);
    apply(out.y);
    return out;
}

constexpr std::size_t kMaxDirectModes = 65536;

/// Shared staged velocity evaluators for one RK4 sweep.
struct StageEvals {
    std::vector<ModeSum> at;      // times t0 + j h, j = 0..nsteps
    std::vector<ModeSum> at_mid;  // midpoints
};

StageEvals build_stages(const VectorSeries& v, int n, double t_from, double h,
                        int nsteps) {
    StageEvals se;
    se.at.reserve(static_cast<std::size_t>(nsteps) + 1);
    se.at_mid.reserve(static_cast<std::size_t>(nsteps));
    for (int j = 0; j <= nsteps; ++j) {
        CompactVector lam = lambda_multiplier(interp_cubic(v, t_from + j * h), n);
        if (lam.nnz() > kMaxDirectModes)
            throw ValidationError("transport field too dense for direct evaluation");
        se.at.emplace_back(lam, n);
        if (j < nsteps) {
            CompactVector lm =
                lambda_multiplier(interp_cubic(v, t_from + (j + 0.5) * h), n);
            se.at_mid.emplace_back(lm, n);
        }
    }
    return se;
}

inline void rk4_step(const ModeSum& f0, const ModeSum& fm, const ModeSum& f1, double h,
                     double& x, double& y) {
    double k1[2], k2[2], k3[2], k4[2];
    f0.eval(x, y, k1);
    fm.eval(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], k2);
    fm.eval(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], k3);
    f1.eval(x + h * k3[0], y + h * k3[1], k4);
    x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
}

}  // namespace

FlowMap solve_flow(const VectorSeries& v_series, const Grid& grid, long long interval,
                   const TimePartition& partition, const FlowOptions& options) {
    v_series.tg.validate();
    const double t_i = partition.t_cut(interval);
    const TimeGrid& rg = v_series.tg;

    // Slab: run samples intersecting supp chi_i.
    const double lo = partition.t_cut(interval - 1);
    const double hi = partition.t_cut(interval + 1);
    int s_first = std::max(0, static_cast<int>(std::ceil((lo - rg.t0) / rg.dt - 1e-9)));
    int s_last =
        std::min(rg.nt - 1, static_cast<int>(std::floor((hi - rg.t0) / rg.dt + 1e-9)));
    if (s_first > s_last) throw ValidationError("slab does not intersect the run window");

    FlowMap fm;
    fm.interval = interval;
    fm.t_anchor = t_i;
    fm.slab = TimeGrid{rg.t(s_first), rg.dt, s_last - s_first + 1};
    fm.displacement.resize(static_cast<std::size_t>(fm.slab.nt));

    // Velocity magnitude over the slab, for the CFL bound.
    double vmax = 0.0;
    for (int s = s_first; s <= s_last; ++s) {
        CompactVector lam = lambda_multiplier(v_series.at_extended(s), grid.n());
        vmax = std::max(vmax, std::max(lam.x.l1(), lam.y.l1()));
    }
    const double dx = 2.0 * M_PI / grid.n();
    double h = options.substep;
    const double cfl_limit =
        vmax > 0.0 ? options.cfl_fraction * dx / vmax
                   : std::numeric_limits<double>::infinity();
    if (h <= 0.0) {
        h = partition.tau_c() / 8.0;
        if (h > cfl_limit) h = cfl_limit;
    } else if (h > cfl_limit) {
        double span = std::max(std::abs(fm.slab.t(0) - t_i),
                               std::abs(fm.slab.t_end() - t_i));
        throw ValidationError(
            "flow substep violates the CFL bound; need at least " +
            std::to_string(static_cast<long long>(std::ceil(span / cfl_limit))) +
            " substeps across the slab");
    }

    const int n = grid.n();
    for (int s = 0; s < fm.slab.nt; ++s) {
        const double t_s = fm.slab.t(s);
        if (std::abs(t_s - t_i) < 0.25 * rg.dt) {
            // Anchor sample: the map is the identity by definition.
            fm.anchor_sample = s;
            CompactVector zero;
            zero.x.n = zero.y.n = n;
            fm.displacement[static_cast<std::size_t>(s)] = zero;
            continue;
        }
        const double span = t_i - t_s;
        const int nsteps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / h)));
        const double hs = span / nsteps;
        StageEvals se = build_stages(v_series, n, t_s, hs, nsteps);

        std::vector<double> dxs(grid.size()), dys(grid.size());
#pragma omp parallel for schedule(static)
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                double X = grid.x(ix), Y = grid.x(iy);
                for (int j = 0; j < nsteps; ++j)
                    rk4_step(se.at[static_cast<std::size_t>(j)],
                             se.at_mid[static_cast<std::size_t>(j)],
                             se.at[static_cast<std::size_t>(j) + 1], hs, X, Y);
                const std::size_t p = static_cast<std::size_t>(iy) * n + ix;
                dxs[p] = X - grid.x(ix);
                dys[p] = Y - grid.x(iy);
            }
        }
        VectorField d(grid);
        d.x.mutable_phys() = std::move(dxs);
        d.y.mutable_phys() = std::move(dys);
        fm.displacement[static_cast<std::size_t>(s)] =
            CompactVector::compact(d, options.compact_tol);
    }
    return fm;
}

std::array<ScalarField, 4> FlowMap::deformation_minus_id(int s, const Grid& g) const {
    VectorField d = displacement_at(s, g);
    VectorField gx = grad(d.x);
    VectorField gy = grad(d.y);
    return {gx.x, gx.y, gy.x, gy.y};
}

void trace_points(const VectorSeries& v_series, double t_from, double t_to,
                  std::vector<double>& xs, std::vector<double>& ys, double substep) {
    if (xs.size() != ys.size()) throw ValidationError("point arrays differ in size");
    if (!(substep > 0.0)) throw ValidationError("substep must be positive");
    const double span = t_to - t_from;
    const int nsteps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / substep)));
    const double hs = span / nsteps;
    int n = 0;
    for (const auto& smp : v_series.samples) {
        if (smp.x.n != 0) {
            n = smp.x.n;
            break;
        }
    }
    if (n == 0) return;  // zero velocity: nothing moves
    StageEvals se = build_stages(v_series, n, t_from, hs, nsteps);
#pragma omp parallel for schedule(static)
    for (long long p = 0; p < static_cast<long long>(xs.size()); ++p) {
        double X = xs[static_cast<std::size_t>(p)], Y = ys[static_cast<std::size_t>(p)];
        for (int j = 0; j < nsteps; ++j)
            rk4_step(se.at[static_cast<std::size_t>(j)],
                     se.at_mid[static_cast<std::size_t>(j)],
                     se.at[static_cast<std::size_t>(j) + 1], hs, X, Y);
        xs[static_cast<std::size_t>(p)] = X;
        ys[static_cast<std::size_t>(p)] = Y;
    }
}

}  // namespace sqgforge
