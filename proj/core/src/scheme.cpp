#include "sqgforge/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace sqgforge {

// ---- Force series -----------------------------------------------------------

CompactSym ForceSeries::sample(int s) const {
    CompactSym acc;
    bool first = true;
    for (const auto& t : terms) {
        CompactSym part = t.sample(s);
        if (first) {
            acc = part;
            first = false;
        } else {
            acc = add(acc, part, 1.0, 1.0);
        }
    }
    return acc;
}

void ForceSeries::absorb(const SignedSymSeries& t) {
    if (!terms.empty() && terms.back().series == t.series &&
        terms.back().sign == -t.sign) {
        terms.pop_back();  // exact cancellation of the previous absorption
        return;
    }
    terms.push_back(t);
}

// ---- Initial data ------------------------------------------------------------

namespace {

double bump01(double s) {  // C-infinity bump on (0,1), peak value 1 at s = 1/2
    if (s <= 0.0 || s >= 1.0) return 0.0;
    double u = 4.0 * s * (1.0 - s);  // in (0,1], equals 1 at the midpoint
    return std::exp(1.0 - 1.0 / u);
}

}  // namespace

double InitialData::eta(double t) const { return bump01((t - t_start) / width); }

void InitialData::validate() const {
    if (!(t_start > 1.0))
        throw ValidationError("initial datum must be supported inside (1, infinity)");
    if (!(width > 0.0)) throw ValidationError("initial datum needs positive width");
    if (std::abs(c10) + std::abs(c01) == 0.0)
        throw ValidationError("initial datum must be nonzero");
}

// ---- Compact-mode operator helpers -------------------------------------------

namespace {

struct ModeOf {
    int n;
    int kx(std::uint32_t idx) const {
        int m = static_cast<int>(idx) % n;
        return m <= n / 2 - 1 ? m : m - n;
    }
    int ky(std::uint32_t idx) const {
        int m = static_cast<int>(idx) / n;
        return m <= n / 2 - 1 ? m : m - n;
    }
};

template <typename F>
CompactScalar map_compact(const CompactScalar& c, F factor) {
    ModeOf mode{c.n};
    CompactScalar out;
    out.n = c.n;
    out.idx.reserve(c.idx.size());
    out.val.reserve(c.idx.size());
    for (std::size_t i = 0; i < c.idx.size(); ++i) {
        Complex v = factor(mode.kx(c.idx[i]), mode.ky(c.idx[i])) * c.val[i];
        if (v == Complex(0.0, 0.0)) continue;
        out.idx.push_back(c.idx[i]);
        out.val.push_back(v);
    }
    return out;
}

CompactScalar compact_curl_perp(const CompactVector& v) {
    CompactScalar a = map_compact(v.x, [](int, int ky) { return Complex(0.0, -ky); });
    CompactScalar b = map_compact(v.y, [](int kx, int) { return Complex(0.0, kx); });
    return add(a, b, 1.0, 1.0);
}

CompactVector compact_div_sym(const CompactSym& t) {
    CompactVector out;
    out.x = add(map_compact(t.xx, [](int kx, int) { return Complex(0.0, kx); }),
                map_compact(t.xy, [](int, int ky) { return Complex(0.0, ky); }), 1.0,
                1.0);
    out.y = add(map_compact(t.xy, [](int kx, int) { return Complex(0.0, kx); }),
                map_compact(t.yy, [](int, int ky) { return Complex(0.0, ky); }), 1.0,
                1.0);
    return out;
}

/// B = B0 . Leray on compact data; drops the mean mode.
CompactSym compact_antidiv(const CompactVector& f) {
    ModeOf mode{f.x.n != 0 ? f.x.n : f.y.n};
    // Merge sparsity of both components.
    CompactSym out;
    out.xx.n = out.xy.n = out.yy.n = mode.n;
    std::size_t ix = 0, iy = 0;
    auto emit = [&](std::uint32_t idx, Complex vx, Complex vy) {
        int kx = mode.kx(idx), ky = mode.ky(idx);
        if (kx == 0 && ky == 0) return;
        double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
        Complex kv = (static_cast<double>(kx) * vx + static_cast<double>(ky) * vy) / k2;
        Complex px = vx - static_cast<double>(kx) * kv;
        Complex py = vy - static_cast<double>(ky) * kv;
        Complex ikx(0.0, kx / k2), iky(0.0, ky / k2);
        Complex txx = -(ikx * px + ikx * px);
        Complex txy = -(ikx * py + iky * px);
        Complex tyy = -(iky * py + iky * py);
        if (txx != Complex(0.0, 0.0)) {
            out.xx.idx.push_back(idx);
            out.xx.val.push_back(txx);
        }
        if (txy != Complex(0.0, 0.0)) {
            out.xy.idx.push_back(idx);
            out.xy.val.push_back(txy);
        }
        if (tyy != Complex(0.0, 0.0)) {
            out.yy.idx.push_back(idx);
            out.yy.val.push_back(tyy);
        }
    };
    while (ix < f.x.idx.size() || iy < f.y.idx.size()) {
        bool tx = ix < f.x.idx.size();
        bool ty = iy < f.y.idx.size();
        if (tx && (!ty || f.x.idx[ix] < f.y.idx[iy])) {
            emit(f.x.idx[ix], f.x.val[ix], 0.0);
            ++ix;
        } else if (ty && (!tx || f.y.idx[iy] < f.x.idx[ix])) {
            emit(f.y.idx[iy], 0.0, f.y.val[iy]);
            ++iy;
        } else {
            emit(f.x.idx[ix], f.x.val[ix], f.y.val[iy]);
            ++ix;
            ++iy;
        }
    }
    return out;
}

CompactVector compact_velocity_from_theta(const CompactScalar& theta) {
    // u = Lambda^{-1} grad_perp theta.
    CompactVector out;
    out.x = map_compact(theta, [](int kx, int ky) {
        if (kx == 0 && ky == 0) return Complex(0.0, 0.0);
        double k = std::sqrt(static_cast<double>(kx) * kx + static_cast<double>(ky) * ky);
        return Complex(0.0, -ky / k);
    });
    out.y = map_compact(theta, [](int kx, int ky) {
        if (kx == 0 && ky == 0) return Complex(0.0, 0.0);
        double k = std::sqrt(static_cast<double>(kx) * kx + static_cast<double>(ky) * ky);
        return Complex(0.0, kx / k);
    });
    return out;
}

std::uint32_t regrid_index(std::uint32_t idx, int n_from, int n_to) {
    ModeOf mode{n_from};
    int kx = mode.kx(idx), ky = mode.ky(idx);
    if (std::max(std::abs(kx), std::abs(ky)) >= n_to / 2)
        throw ValidationError("regrid: mode outside the target grid");
    auto unwrap = [n_to](int k) { return k >= 0 ? k : k + n_to; };
    return static_cast<std::uint32_t>(unwrap(ky)) * static_cast<std::uint32_t>(n_to) +
           static_cast<std::uint32_t>(unwrap(kx));
}

}  // namespace

CompactScalar regrid(const CompactScalar& c, int n_from, int n_to) {
    if (n_from == n_to) return c;
    CompactScalar out;
    out.n = n_to;
    std::vector<std::pair<std::uint32_t, Complex>> entries;
    entries.reserve(c.idx.size());
    for (std::size_t i = 0; i < c.idx.size(); ++i)
        entries.emplace_back(regrid_index(c.idx[i], n_from, n_to), c.val[i]);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [idx, val] : entries) {
        out.idx.push_back(idx);
        out.val.push_back(val);
    }
    return out;
}

CompactVector regrid(const CompactVector& c, int n_from, int n_to) {
    return {regrid(c.x, n_from, n_to), regrid(c.y, n_from, n_to)};
}

CompactSym regrid(const CompactSym& c, int n_from, int n_to) {
    return {regrid(c.xx, n_from, n_to), regrid(c.xy, n_from, n_to),
            regrid(c.yy, n_from, n_to)};
}

// ---- Initialization -----------------------------------------------------------

namespace {

struct SpatialParts {
    CompactVector v_space;   // grad_perp psi, on the run grid
    CompactSym b_v;          // B(v_space)
    CompactSym b_n;          // B(N(v_space))
};

SpatialParts build_spatial_parts(const InitialData& d, int run_n) {
    // The quadratic part is evaluated exactly on a small auxiliary grid.
    const int n_small = 64;
    Grid gs(n_small);
    ScalarField psi(gs);
    auto& sp = psi.mutable_spec();
    auto put = [&](int kx, int ky, Complex c) {
        sp[static_cast<std::size_t>(gs.unwrap(ky)) * n_small + gs.unwrap(kx)] += c;
        sp[static_cast<std::size_t>(gs.unwrap(-ky)) * n_small + gs.unwrap(-kx)] +=
            std::conj(c);
    };
    put(1, 0, d.c10);
    put(0, 1, d.c01);
    VectorField v = grad_perp(psi);
    VectorField nv = sqg_nonlinearity(v);
    SpatialParts parts;
    CompactVector v_small = CompactVector::compact(v, 0.0);
    CompactVector n_small_c = CompactVector::compact(nv, 1e-14);
    parts.v_space = regrid(v_small, n_small, run_n);
    parts.b_v = regrid(compact_antidiv(v_small), n_small, run_n);
    parts.b_n = regrid(compact_antidiv(n_small_c), n_small, run_n);
    return parts;
}

struct ProfileSeries {
    std::vector<double> p;       // zeta * eta(zeta t_s)
    std::vector<double> p_fd;    // centered difference of p
    std::vector<double> p_sq;    // p^2
};

ProfileSeries profiles(const InitialData& d, double zeta, const TimeGrid& tg) {
    ProfileSeries pr;
    pr.p.resize(static_cast<std::size_t>(tg.nt));
    for (int s = 0; s < tg.nt; ++s) pr.p[static_cast<std::size_t>(s)] = zeta * d.eta(zeta * tg.t(s));
    pr.p_fd.resize(pr.p.size(), 0.0);
    for (int s = 0; s < tg.nt; ++s) {
        double next = s + 1 < tg.nt ? pr.p[static_cast<std::size_t>(s) + 1] : 0.0;
        double prev = s >= 1 ? pr.p[static_cast<std::size_t>(s) - 1] : 0.0;
        pr.p_fd[static_cast<std::size_t>(s)] = (next - prev) / (2.0 * tg.dt);
    }
    pr.p_sq.resize(pr.p.size());
    for (std::size_t i = 0; i < pr.p.size(); ++i) pr.p_sq[i] = pr.p[i] * pr.p[i];
    return pr;
}

struct MeasuredNorms {
    double v_c1_lambda;  // ||v||_1 + ||Lambda v||_0, scales like zeta
    double stress_mix;   // lambda_0^{-1}||F||_1 + ||R||_0 + lambda_0^{-1}||R||_1, zeta^2
    double stress_time;  // ||d_t F||_0 + ||d_t R||_0, zeta^3
};

/// Norms of the unrescaled system (zeta = 1) on an audit grid.
MeasuredNorms measure_unit_norms(const InitialData& d, double lambda0) {
    const int n_audit = 128;
    Grid ga(n_audit);
    SpatialParts parts = build_spatial_parts(d, n_audit);
    TimeGrid tg{d.t_start - 3.0 * d.width / 64.0, d.width / 64.0, 70};
    ProfileSeries pr = profiles(d, 1.0, tg);

    VectorField v_sp = parts.v_space.expand(ga);
    SymTensorField bv = parts.b_v.expand(ga);
    SymTensorField bn = parts.b_n.expand(ga);

    double v_c1 = 0.0, s_mix = 0.0, s_time = 0.0;
    auto lam_v = lambda_pow(v_sp, 1.0);
    double v_spatial = c1_norm(v_sp) + sup_norm(lam_v);
    double bv0 = sup_norm(bv), bv1 = c1_norm(bv);
    double bn0 = sup_norm(bn), bn1 = c1_norm(bn);
    for (int s = 0; s < tg.nt; ++s) {
        const std::size_t i = static_cast<std::size_t>(s);
        v_c1 = std::max(v_c1, std::abs(pr.p[i]) * v_spatial);
        // F = -p' B v + p^2 B N ; R = 2 p' B v (triangle bound per sample)
        double f1 = std::abs(pr.p_fd[i]) * bv1 + pr.p_sq[i] * bn1;
        double r0 = 2.0 * std::abs(pr.p_fd[i]) * bv0;
        double r1 = 2.0 * std::abs(pr.p_fd[i]) * bv1;
        s_mix = std::max(s_mix, f1 / lambda0 + r0 + r1 / lambda0);
    }
    // d_t norms from finite differences of the profiles themselves.
    for (int s = 1; s + 1 < tg.nt; ++s) {
        const std::size_t i = static_cast<std::size_t>(s);
        double dpfd = (pr.p_fd[i + 1] - pr.p_fd[i - 1]) / (2.0 * tg.dt);
        double dpsq = (pr.p_sq[i + 1] - pr.p_sq[i - 1]) / (2.0 * tg.dt);
        double df = std::abs(dpfd) * bv0 + std::abs(dpsq) * bn0;
        double dr = 2.0 * std::abs(dpfd) * bv0;
        s_time = std::max(s_time, df + dr);
    }
    return {v_c1, s_mix, s_time};
}

}  // namespace

SystemState initialize(const InitialData& data, const ParameterConfig& pconfig,
                       const ParameterTable& table, const SchemeConfig& sconfig,
                       InitReport* report) {
    data.validate();
    pconfig.validate();
    InitialData d = data;

    const double tau_c1 = static_cast<double>(table.tau_c(1));
    const double tau_m1 = static_cast<double>(table.tau_m(1));
    const double lambda0 = static_cast<double>(table.lambda(0));

    // Allowed sizes from the inductive estimates at q = 0.
    const double allow_v = static_cast<double>(pconfig.M * table.lambda(-1) *
                                               sqrtl(table.delta(-1)));
    const double allow_u =
        static_cast<double>(pconfig.M * table.lambda(0) * sqrtl(table.delta(0)));
    const double allow_mix =
        static_cast<double>(pconfig.eps * table.lambda(1) * table.delta(1));
    const double allow_time =
        static_cast<double>(table.lambda(1) * table.delta(1) / table.tau_m(0));

    double zeta = sconfig.zeta_override;
    if (zeta <= 0.0) {
        for (int pass = 0; pass < 8; ++pass) {
            MeasuredNorms m = measure_unit_norms(d, lambda0);
            auto admissible = [&](double z) {
                return z * m.v_c1_lambda <= allow_v && z * m.v_c1_lambda <= allow_u &&
                       z * z * m.stress_mix <= allow_mix &&
                       z * z * z * m.stress_time <= allow_time;
            };
            double lo = 0.0, hi = 1.0;
            if (admissible(1.0)) {
                zeta = 1.0;
            } else {
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (admissible(mid) ? lo : hi) = mid;
                }
                zeta = lo;
            }
            if (!sconfig.auto_width) break;
            double target_native = sconfig.target_slabs * tau_c1 *
                                   (sconfig.zeta_safety * zeta);
            if (std::abs(target_native - d.width) <= 0.02 * d.width) break;
            d.width = target_native;
        }
        if (report != nullptr) report->zeta_bisect = zeta;
        zeta *= sconfig.zeta_safety;
    } else if (report != nullptr) {
        report->zeta_bisect = zeta;
    }

    // Run window aligned to the cutoff lattice, dt commensurate with tau_c.
    const double support_lo = d.t_start / zeta;
    const double support_hi = (d.t_start + d.width) / zeta;
    const int per_slab = 8 * std::max(1, static_cast<int>(std::ceil(tau_c1 / tau_m1)));
    const double dt = tau_c1 / per_slab;
    const long long i_first = static_cast<long long>(std::floor(support_lo / tau_c1)) - 3;
    const long long i_last = static_cast<long long>(std::ceil(support_hi / tau_c1)) + 3;
    TimeGrid tg;
    tg.t0 = tau_c1 * static_cast<double>(i_first);
    tg.dt = dt;
    tg.nt = static_cast<int>((i_last - i_first)) * per_slab + 1;
    tg.validate();

    SystemState st;
    st.q = 0;
    st.role = ActiveRole::v_active;
    st.grid = Grid(sconfig.grid_n);
    st.tg = tg;
    st.pconfig = pconfig;
    st.table = table;
    st.sconfig = sconfig;
    st.zeta = zeta;
    st.support_lo = support_lo;
    st.support_hi = support_hi;

    SpatialParts parts = build_spatial_parts(d, sconfig.grid_n);
    ProfileSeries pr = profiles(d, zeta, tg);

    st.v.tg = tg;
    st.u.tg = tg;
    st.v.samples.resize(static_cast<std::size_t>(tg.nt));
    st.u.samples.resize(static_cast<std::size_t>(tg.nt));
    auto F_series = std::make_shared<SymSeries>();
    auto R_series = std::make_shared<SymSeries>();
    F_series->tg = tg;
    R_series->tg = tg;
    F_series->samples.resize(static_cast<std::size_t>(tg.nt));
    R_series->samples.resize(static_cast<std::size_t>(tg.nt));

    for (int s = 0; s < tg.nt; ++s) {
        const std::size_t i = static_cast<std::size_t>(s);
        st.v.samples[i] = parts.v_space.scaled(pr.p[i]);
        st.u.samples[i] = parts.v_space.scaled(-pr.p[i]);
        // F = B(d_t u + N(u)) = -p' B v + p^2 B N  (N is even in the field)
        CompactSym F_s =
            add(parts.b_v.scaled(-pr.p_fd[i]), parts.b_n.scaled(pr.p_sq[i]), 1.0, 1.0);
        // R = B(d_t v + N(v)) - F
        CompactSym BvN =
            add(parts.b_v.scaled(pr.p_fd[i]), parts.b_n.scaled(pr.p_sq[i]), 1.0, 1.0);
        R_series->samples[i] = add(BvN, F_s, 1.0, -1.0);
        F_series->samples[i] = F_s;
    }
    st.F.tg = tg;
    st.F.terms.push_back(SignedSymSeries{1.0, F_series});
    st.R = SignedSymSeries{1.0, R_series};

    if (report != nullptr) {
        report->zeta_used = zeta;
        ResidualReport ra = residual(st, WhichSystem::active);
        ResidualReport ri = residual(st, WhichSystem::inactive);
        report->active_residual = ra.sup;
        report->inactive_residual = ri.sup;
        report->residual_scale = std::max(ra.scale, ri.scale);
        // Measured/allowed ratios on the run grid.
        double mv = 0.0, mmix = 0.0, mtime = 0.0;
        for (int s = 0; s < tg.nt; s += 8) {
            VectorField vf = st.v.samples[static_cast<std::size_t>(s)].expand(st.grid);
            mv = std::max(mv, c1_norm(vf) + sup_norm(lambda_pow(vf, 1.0)));
            SymTensorField Ff = F_series->at(s).expand(st.grid);
            SymTensorField Rf = R_series->at(s).expand(st.grid);
            mmix = std::max(mmix, c1_norm(Ff) / lambda0 + sup_norm(Rf) +
                                      c1_norm(Rf) / lambda0);
        }
        for (int s = 1; s + 1 < tg.nt; s += 8) {
            CompactSym dF = time_derivative(*F_series, s);
            CompactSym dR = time_derivative(*R_series, s);
            mtime = std::max(mtime, sup_norm(dF.expand(st.grid)) +
                                        sup_norm(dR.expand(st.grid)));
        }
        report->estimate_ratios = {mv / allow_v, mv / allow_u, mmix / allow_mix,
                                   mtime / allow_time};
    }
    return st;
}

// ---- Iteration ----------------------------------------------------------------

namespace {

const std::array<DirectionSet, 4>& direction_sets() {
    static const std::array<DirectionSet, 4> sets = build_direction_sets();
    return sets;
}

const std::array<GammaSolver, 4>& gamma_solvers() {
    static const std::array<GammaSolver, 4> solvers = {
        GammaSolver(direction_sets()[0]), GammaSolver(direction_sets()[1]),
        GammaSolver(direction_sets()[2]), GammaSolver(direction_sets()[3])};
    return solvers;
}

std::pair<double, double> series_support(const TimeGrid& tg,
                                         const std::function<bool(int)>& nonzero) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < tg.nt; ++s) {
        if (!nonzero(s)) continue;
        lo = std::min(lo, tg.t(s));
        hi = std::max(hi, tg.t(s));
    }
    return {lo, hi};
}

}  // namespace

std::pair<double, double> data_support(const SystemState& st) {
    auto nz = [&](int s) {
        if (st.v.at_extended(s).nnz() > 0) return true;
        if (st.u.at_extended(s).nnz() > 0) return true;
        if (st.R.series && st.R.series->at_extended(s).nnz() > 0) return true;
        for (const auto& t : st.F.terms)
            if (t.series->at_extended(s).nnz() > 0) return true;
        return false;
    };
    return series_support(st.tg, nz);
}

SystemState iterate_once(const SystemState& state, IterationReport* report) {
    const int q = state.q;
    const Grid& grid = state.grid;
    const TimeGrid& tg = state.tg;
    const ParameterTable& table = state.table;
    if (state.R.series == nullptr) throw ValidationError("state has no stress series");
    if (state.R.series->tg.nt != tg.nt)
        throw ValidationError("stress series resolution differs from the run grid");

    const double lam1 = static_cast<double>(table.lambda(q + 1));
    const double del1 = static_cast<double>(table.delta(q + 1));
    const double tau_m_next = static_cast<double>(table.tau_m(q + 1));
    const double lamq_delq1 = static_cast<double>(table.lambda(q) * table.delta(q + 1));

    IterationReport rep;
    rep.q = q;

    // Mollified stress.
    SymSeries R_mat;
    R_mat.tg = tg;
    R_mat.samples.resize(static_cast<std::size_t>(tg.nt));
    for (int s = 0; s < tg.nt; ++s)
        R_mat.samples[static_cast<std::size_t>(s)] = state.R.sample(s);
    SymSeries R_ell = mollify_time(R_mat, tau_m_next);
    rep.moll_first_moment = mollifier_first_moment(tau_m_next, tg.dt);

    // Partition over the joint support; nothing may reach the zero region.
    auto [supp_lo, supp_hi] = data_support(state);
    if (!(supp_lo < supp_hi)) throw ValidationError("state carries no data to perturb");
    rep.temporal_bound = 1.0 - static_cast<double>(table.tau_m_partial_sum(q + 1));
    TimePartition partition = build_partition(table, q, supp_lo, supp_hi,
                                              std::max(0.0, rep.temporal_bound));
    rep.partition_dchi_const = partition.measured_derivative_constant();
    for (int p = 0; p <= 200; ++p) {
        double t = partition.cover_lo() +
                   (partition.cover_hi() - partition.cover_lo()) * p / 200.0;
        rep.partition_sum_err =
            std::max(rep.partition_sum_err, std::abs(partition.sum_sq(t) - 1.0));
    }

    // Flow maps per interval of the active transport field.
    const VectorSeries& conv = state.active();
    std::unordered_map<long long, FlowMap> flows;
    for (long long i = partition.i_lo(); i <= partition.i_hi(); ++i)
        flows.emplace(i, solve_flow(conv, grid, i, partition));
    for (auto& [i, fm] : flows) {
        int probe = fm.slab.nt / 2;
        auto G = fm.deformation_minus_id(probe, grid);
        const auto& axx = G[0].cphys();
        const auto& axy = G[1].cphys();
        const auto& ayx = G[2].cphys();
        const auto& ayy = G[3].cphys();
        double worst = 0.0;
        for (std::size_t p = 0; p < grid.size(); ++p) {
            double det = (1.0 + axx[p]) * (1.0 + ayy[p]) - axy[p] * ayx[p];
            worst = std::max(worst, std::abs(det - 1.0));
        }
        rep.flow_det_deviation = std::max(rep.flow_det_deviation, worst);
    }
    auto flow_lookup = [&flows](long long i) -> const FlowMap* {
        auto it = flows.find(i);
        return it == flows.end() ? nullptr : &it->second;
    };

    // Perturbation series.
    VectorSeries w;
    w.tg = tg;
    w.samples.resize(static_cast<std::size_t>(tg.nt));
    PerturbOptions popt;
    popt.shell_width = state.sconfig.shell_width;
    bool divfree_checked = false;
    for (int s = 0; s < tg.nt; ++s) {
        const double t = tg.t(s);
        if (t <= partition.active_lo() || t >= partition.active_hi()) {
            CompactVector zero;
            zero.x.n = zero.y.n = grid.n();
            w.samples[static_cast<std::size_t>(s)] = zero;
            continue;
        }
        SymTensorField R_ell_t = R_ell.at(s).expand(grid);
        PerturbationSample ps =
            build_perturbation_sample(grid, t, R_ell_t, partition, flow_lookup,
                                      direction_sets(), gamma_solvers(), table, q, popt);
        rep.w_sup = std::max(rep.w_sup, ps.sup_w);
        rep.cancellation_max = std::max(rep.cancellation_max, ps.cancellation);
        rep.mass_outside_shells = std::max(rep.mass_outside_shells, ps.mass_outside_shells);
        rep.hermitian_defect = std::max(rep.hermitian_defect, ps.hermitian_defect);
        if (!divfree_checked && ps.sup_w > 0.0) {
            rep.w_divfree_defect = divfree_defect(ps.w);
            divfree_checked = true;
        }
        w.samples[static_cast<std::size_t>(s)] = CompactVector::compact(ps.w, 0.0);
    }
    rep.measured_M = del1 > 0.0 ? rep.w_sup / std::sqrt(del1) : 0.0;

    // FD convergence of the w series (l2-based Richardson at mid-support).
    {
        int s_mid = tg.nearest(0.5 * (supp_lo + supp_hi));
        auto fd = [&](int h) {
            double c = 1.0 / (2.0 * h * tg.dt);
            return add(w.at_extended(s_mid + h), w.at_extended(s_mid - h), c, -c);
        };
        CompactVector d1 = fd(1), d2 = fd(2), d4 = fd(4);
        CompactVector num = add(d4, d2, 1.0, -1.0);
        CompactVector den = add(d2, d1, 1.0, -1.0);
        double nn = std::hypot(num.x.l2(), num.y.l2());
        double dn = std::hypot(den.x.l2(), den.y.l2());
        rep.richardson_w = dn > 0.0 ? nn / dn : 0.0;
    }

    // Stress components, streamed sample by sample.
    StressAssembler assembler(grid, tg, state.sconfig.stress_store_stride,
                              state.sconfig.compact_tol);
    for (int s = 0; s < tg.nt; ++s) {
        SymTensorField moll =
            add(R_mat.at(s), R_ell.at(s), 1.0, -1.0).expand(grid);
        VectorField dtw = time_derivative(w, s).expand(grid);
        VectorField v_t = conv.at(s).expand(grid);
        VectorField w_t = w.at(s).expand(grid);
        SymTensorField tran = transport_error_sample(dtw, v_t, w_t);
        double disc = 0.0;
        SymTensorField nash = nash_error_sample(w_t, v_t, &disc);
        rep.nash_scalar_discrepancy = std::max(rep.nash_scalar_discrepancy, disc);
        HighLowDiagnostic diag;
        SymTensorField osc = oscillation_error_sample(w_t, R_ell.at(s).expand(grid),
                                                      lam1, lamq_delq1, &diag);
        if (diag.low_sup >= rep.osc.low_sup) rep.osc = diag;
        assembler.add_sample(s, moll, tran, nash, osc);
    }
    rep.breakdown = assembler.finish(table, state.pconfig, q);

    // New state: active field perturbed, everything else carried over.
    SystemState out = state;
    out.q = q + 1;
    VectorSeries& act = out.active();
    for (int s = 0; s < tg.nt; ++s)
        act.samples[static_cast<std::size_t>(s)] =
            add(act.at(s), w.at(s), 1.0, 1.0);
    auto R_new = std::make_shared<SymSeries>(std::move(rep.breakdown.total));
    rep.breakdown.total.samples.clear();  // owned by the new state now
    rep.breakdown.total.tg = R_new->tg;
    out.R = SignedSymSeries{1.0, R_new};
    auto [lo2, hi2] = data_support(out);
    out.support_lo = lo2;
    out.support_hi = hi2;
    rep.support_lo = lo2;
    rep.support_hi = hi2;
    if (report != nullptr) *report = std::move(rep);
    return out;
}

SystemState swap_roles(const SystemState& state) {
    SystemState out = state;
    out.F.absorb(state.R);
    out.R = state.R;
    out.R.sign = -state.R.sign;
    out.role = state.role == ActiveRole::v_active ? ActiveRole::u_active
                                                  : ActiveRole::v_active;
    return out;
}

ResidualReport residual(const SystemState& state, WhichSystem which) {
    const Grid& grid = state.grid;
    const TimeGrid& tg = state.tg;
    const bool active = which == WhichSystem::active;
    const VectorSeries& X = active ? state.active() : state.inactive();

    ResidualReport out;
    const int stride = std::max(1, state.sconfig.residual_probe_stride);
    for (int s = stride; s + stride < tg.nt; s += stride) {
        VectorField Xdot = time_derivative(X, s).expand(grid);
        VectorField X_t = X.at(s).expand(grid);
        VectorField N = sqg_nonlinearity(X_t);
        CompactSym Fs = state.F.sample(s);
        CompactVector rhs_c = compact_div_sym(Fs);
        if (active && state.R.series != nullptr) {
            int rs = state.R.series->tg.nearest(tg.t(s));
            if (std::abs(state.R.series->tg.t(rs) - tg.t(s)) > 0.25 * tg.dt)
                continue;  // stress stored at a coarser stride
            CompactSym Rs = state.R.series->at_extended(rs).scaled(state.R.sign);
            rhs_c = add(rhs_c, compact_div_sym(Rs), 1.0, 1.0);
        }
        VectorField rhs = rhs_c.expand(grid);
        VectorField res = leray(Xdot + N - rhs);
        out.sup = std::max(out.sup, sup_norm(res));
        out.scale = std::max({out.scale, sup_norm(Xdot), sup_norm(N), sup_norm(rhs)});
    }
    return out;
}

ScalarRecovery scalar_recover(const SystemState& state) {
    const Grid& grid = state.grid;
    const TimeGrid& tg = state.tg;
    ScalarRecovery out;
    out.theta_v.tg = out.theta_u.tg = out.f.tg = tg;
    out.theta_v.samples.resize(static_cast<std::size_t>(tg.nt));
    out.theta_u.samples.resize(static_cast<std::size_t>(tg.nt));
    out.f.samples.resize(static_cast<std::size_t>(tg.nt));
    for (int s = 0; s < tg.nt; ++s) {
        out.theta_v.samples[static_cast<std::size_t>(s)] =
            compact_curl_perp(state.v.at(s)).scaled(-1.0);
        out.theta_u.samples[static_cast<std::size_t>(s)] =
            compact_curl_perp(state.u.at(s)).scaled(-1.0);
        out.f.samples[static_cast<std::size_t>(s)] =
            compact_curl_perp(compact_div_sym(state.F.sample(s))).scaled(-1.0);
        const CompactScalar& th = out.theta_v.samples[static_cast<std::size_t>(s)];
        for (std::size_t j = 0; j < th.idx.size(); ++j)
            if (th.idx[j] == 0)
                out.theta_mean_max =
                    std::max(out.theta_mean_max, std::abs(th.val[j]));
    }

    // Residual of the scalar equation for the active field, and its
    // agreement with -grad_perp . (momentum residual).
    const bool v_is_active = state.role == ActiveRole::v_active;
    const ScalarSeries& th_series = v_is_active ? out.theta_v : out.theta_u;
    const VectorSeries& X = state.active();
    const int stride = std::max(1, state.sconfig.residual_probe_stride);
    for (int s = stride; s + stride < tg.nt; s += stride) {
        // Scalar route.
        ScalarField theta = th_series.at(s).expand(grid);
        CompactScalar dth_c = add(th_series.at_extended(s + 1),
                                  th_series.at_extended(s - 1), 1.0 / (2.0 * tg.dt),
                                  -1.0 / (2.0 * tg.dt));
        ScalarField dtheta = dth_c.expand(grid);
        VectorField u_vel = compact_velocity_from_theta(th_series.at(s)).expand(grid);
        VectorField gth = grad(theta);
        ScalarField advect = multiply(u_vel.x, gth.x) + multiply(u_vel.y, gth.y);
        CompactSym Fs = state.F.sample(s);
        CompactVector divF = compact_div_sym(Fs);
        if (state.R.series != nullptr) {
            int rs = state.R.series->tg.nearest(tg.t(s));
            if (std::abs(state.R.series->tg.t(rs) - tg.t(s)) > 0.25 * tg.dt) continue;
            CompactSym Rs = state.R.series->at_extended(rs).scaled(state.R.sign);
            divF = add(divF, compact_div_sym(Rs), 1.0, 1.0);
        }
        ScalarField f_tot = compact_curl_perp(divF).scaled(-1.0).expand(grid);
        ScalarField scalar_res = dtheta + advect - f_tot;
        out.scalar_residual = std::max(out.scalar_residual, sup_norm(scalar_res));

        // Momentum route, un-projected; gradients die under -grad_perp.
        VectorField Xdot = time_derivative(X, s).expand(grid);
        VectorField X_t = X.at(s).expand(grid);
        VectorField N = sqg_nonlinearity(X_t);
        VectorField mr = Xdot + N - divF.expand(grid);
        ScalarField curl_route = curl_perp(mr);
        ScalarField diff = scalar_res + curl_route;  // theta-res = -curl(mr)
        out.curl_consistency = std::max(out.curl_consistency, sup_norm(diff));
    }
    return out;
}

}  // namespace sqgforge
