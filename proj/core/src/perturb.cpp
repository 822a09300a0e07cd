#include "sqgforge/perturb.hpp"

#include <algorithm>
#include <cmath>

namespace sqgforge {

VectorField real_beltrami_pair(const Grid& g, const RationalVec& k, long long lambda,
                               Complex amp) {
    const int n = g.n();
    double kx = k.x.to_double(), ky = k.y.to_double();
    long long mx = std::llround(lambda * kx);
    long long my = std::llround(lambda * ky);
    if (std::abs(lambda * kx - mx) > 1e-9 || std::abs(lambda * ky - my) > 1e-9)
        throw ValidationError("lambda*k is not an integer mode; lambda must be a multiple of 85");
    if (std::max(std::llabs(mx), std::llabs(my)) > g.cutoff())
        throw ValidationError("beltrami mode outside the dealias cutoff");
    VectorField w(g);
    auto& sx = w.x.mutable_spec();
    auto& sy = w.y.mutable_spec();
    // b_k = i k_perp e^{i k.xi}; conjugate mirror keeps the field real.
    Complex bx = amp * Complex(0.0, 1.0) * (-ky);
    Complex by = amp * Complex(0.0, 1.0) * kx;
    std::size_t ip = static_cast<std::size_t>(g.unwrap(static_cast<int>(my))) * n +
                     g.unwrap(static_cast<int>(mx));
    std::size_t im = static_cast<std::size_t>(g.unwrap(static_cast<int>(-my))) * n +
                     g.unwrap(static_cast<int>(-mx));
    sx[ip] += bx;
    sy[ip] += by;
    sx[im] += std::conj(bx);
    sy[im] += std::conj(by);
    return w;
}

CompactVector beltrami_mode_coeff(const Grid& g, const RationalVec& k, long long lambda,
                                  Complex amp) {
    const int n = g.n();
    double kx = k.x.to_double(), ky = k.y.to_double();
    int mx = static_cast<int>(std::llround(lambda * kx));
    int my = static_cast<int>(std::llround(lambda * ky));
    CompactVector out;
    out.x.n = out.y.n = n;
    std::uint32_t idx = static_cast<std::uint32_t>(g.unwrap(my)) * n + g.unwrap(mx);
    out.x.idx.push_back(idx);
    out.x.val.push_back(amp * Complex(0.0, -ky));
    out.y.idx.push_back(idx);
    out.y.val.push_back(amp * Complex(0.0, kx));
    return out;
}

AmplitudeSet amplitudes(const SymTensorField& R_ell_t, const GammaSolver& solver,
                        double lambda_q1, double delta_q1) {
    const Grid& g = R_ell_t.grid();
    AmplitudeSet out;
    out.family = &solver.set();
    out.lambda = lambda_q1;
    out.delta = delta_q1;
    out.a.reserve(3);
    for (int p = 0; p < 3; ++p) out.a.emplace_back(g);

    const auto& rxx = R_ell_t.xx.cphys();
    const auto& rxy = R_ell_t.xy.cphys();
    const auto& ryy = R_ell_t.yy.cphys();
    std::array<std::vector<double>*, 3> aph = {&out.a[0].mutable_phys(),
                                               &out.a[1].mutable_phys(),
                                               &out.a[2].mutable_phys()};

    const double inv_ld = 1.0 / (lambda_q1 * delta_q1);
    const double sq_delta = std::sqrt(delta_q1);
    const auto& inv = solver.base_inverse();
    double m00 = inv[0][0].to_double(), m01 = inv[0][1].to_double(),
           m02 = inv[0][2].to_double();
    double m10 = inv[1][0].to_double(), m11 = inv[1][1].to_double(),
           m12 = inv[1][2].to_double();
    double m20 = inv[2][0].to_double(), m21 = inv[2][1].to_double(),
           m22 = inv[2][2].to_double();

    double worst_c = 1.0;
    long long worst_idx = -1;
    int worst_p = -1;
    double sup_dist = 0.0;
    const std::size_t npts = g.size();
    for (std::size_t i = 0; i < npts; ++i) {
        Sym2 arg{1.0 - inv_ld * rxx[i], -inv_ld * rxy[i], 1.0 - inv_ld * ryy[i]};
        Sym2 dist{arg.xx - 1.0, arg.xy, arg.yy - 1.0};
        sup_dist = std::max(sup_dist, dist.op_norm());
        double c0 = m00 * arg.xx + m01 * arg.xy + m02 * arg.yy;
        double c1 = m10 * arg.xx + m11 * arg.xy + m12 * arg.yy;
        double c2 = m20 * arg.xx + m21 * arg.xy + m22 * arg.yy;
        double cmin = std::min({c0, c1, c2});
        if (cmin < worst_c) {
            worst_c = cmin;
            worst_idx = static_cast<long long>(i);
            worst_p = c0 <= c1 && c0 <= c2 ? 0 : (c1 <= c2 ? 1 : 2);
        }
        if (c0 > 0.0 && c1 > 0.0 && c2 > 0.0) {
            (*aph[0])[i] = sq_delta * std::sqrt(c0);
            (*aph[1])[i] = sq_delta * std::sqrt(c1);
            (*aph[2])[i] = sq_delta * std::sqrt(c2);
        }
    }
    if (worst_c <= 0.0)
        throw OutOfBallError("amplitude argument left the admissible ball of " +
                                 solver.set().name() + " (worst coefficient " +
                                 std::to_string(worst_c) + " at grid index " +
                                 std::to_string(worst_idx) + ")",
                             worst_p, worst_c, worst_idx);
    out.sup_argument_dist = sup_dist;
    return out;
}

double cancellation_residual(const AmplitudeSet& amps, const SymTensorField& R_ell_t) {
    const Grid& g = R_ell_t.grid();
    const auto& rxx = R_ell_t.xx.cphys();
    const auto& rxy = R_ell_t.xy.cphys();
    const auto& ryy = R_ell_t.yy.cphys();
    std::array<const std::vector<double>*, 3> a = {&amps.a[0].cphys(), &amps.a[1].cphys(),
                                                   &amps.a[2].cphys()};
    // Perp tensors of the three representatives.
    double txx[3], txy[3], tyy[3];
    for (int p = 0; p < 3; ++p) {
        RationalVec kp = amps.family->rep(p).perp();
        double x = kp.x.to_double(), y = kp.y.to_double();
        txx[p] = x * x;
        txy[p] = x * y;
        tyy[p] = y * y;
    }
    const double inv_lam = 1.0 / amps.lambda;
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (int p = 0; p < 3; ++p) {
            double c = (*a[p])[i] * (*a[p])[i];
            sxx += c * txx[p];
            sxy += c * txy[p];
            syy += c * tyy[p];
        }
        Sym2 res{rxx[i] * inv_lam + sxx - amps.delta, rxy[i] * inv_lam + sxy,
                 ryy[i] * inv_lam + syy - amps.delta};
        worst = std::max(worst, res.op_norm());
    }
    return worst;
}

WavePiece build_wave_piece(const Grid& g, double chi, const ScalarField& a_field,
                           const VectorField* displacement, const DirectionSet& family,
                           int rep, long long interval, double lambda, double width) {
    const int n = g.n();
    const RationalVec& k = family.rep(rep);
    const double kx = k.x.to_double(), ky = k.y.to_double();
    const double lkx = lambda * kx, lky = lambda * ky;
    if ((1.0 + width) * lambda > static_cast<double>(g.cutoff()))
        throw ValidationError("wave shell overflows the dealias cutoff");

    WavePiece piece;
    piece.interval = interval;
    piece.rep = rep;
    piece.family = &family;
    piece.chi = chi;

    const auto& a = a_field.cphys();
    const double* dxp = nullptr;
    const double* dyp = nullptr;
    if (displacement != nullptr) {
        dxp = displacement->x.cphys().data();
        dyp = displacement->y.cphys().data();
    }

    // s = chi a psi c_k(lambda x), psi = exp(i lambda (Phi - x).k); the
    // combined phase is lambda k.(x + d).
    std::vector<Complex> buf(g.size());
    double sup_unproj = 0.0;
#pragma omp parallel for schedule(static) reduction(max : sup_unproj)
    for (int iy = 0; iy < n; ++iy) {
        const double y = g.x(iy);
        for (int ix = 0; ix < n; ++ix) {
            const std::size_t p = static_cast<std::size_t>(iy) * n + ix;
            double phase = lkx * g.x(ix) + lky * y;
            if (dxp != nullptr) phase += lambda * (kx * dxp[p] + ky * dyp[p]);
            const double amp = chi * a[p];
            sup_unproj = std::max(sup_unproj, std::abs(amp));
            buf[p] = Complex(amp * std::cos(phase), amp * std::sin(phase));
        }
    }
    piece.sup_unprojected = sup_unproj;

    fft_phys_to_spec(g, buf.data());

    // Mask to the +k shell, apply Leray per mode, collect sparsely.
    piece.cx.n = piece.cy.n = n;
    const double r2 = width * lambda * width * lambda;
    const Complex bx(0.0, -ky), by(0.0, kx);  // i k_perp
    for (int my = 0; my < n; ++my) {
        const int qy = g.wrap(my);
        const double dy = qy - lky;
        if (std::abs(dy) > width * lambda) continue;
        for (int mx = 0; mx < n; ++mx) {
            const int qx = g.wrap(mx);
            const double dx = qx - lkx;
            if (dx * dx + dy * dy > r2) continue;
            const std::size_t i = static_cast<std::size_t>(my) * n + mx;
            Complex s = buf[i];
            Complex vx = s * bx, vy = s * by;
            // Leray projection at mode (qx, qy).
            if (qx != 0 || qy != 0) {
                const double k2 = static_cast<double>(qx) * qx + static_cast<double>(qy) * qy;
                Complex kv = (static_cast<double>(qx) * vx + static_cast<double>(qy) * vy) / k2;
                vx -= static_cast<double>(qx) * kv;
                vy -= static_cast<double>(qy) * kv;
            }
            if (vx == Complex(0.0, 0.0) && vy == Complex(0.0, 0.0)) continue;
            piece.cx.idx.push_back(static_cast<std::uint32_t>(i));
            piece.cx.val.push_back(vx);
            piece.cy.idx.push_back(static_cast<std::uint32_t>(i));
            piece.cy.val.push_back(vy);
        }
    }
    return piece;
}

void accumulate_pair(VectorField& w, const WavePiece& piece) {
    const Grid& g = w.grid();
    const int n = g.n();
    auto& sx = w.x.mutable_spec();
    auto& sy = w.y.mutable_spec();
    for (std::size_t j = 0; j < piece.cx.idx.size(); ++j) {
        const std::uint32_t i = piece.cx.idx[j];
        const int mx = static_cast<int>(i) % n;
        const int my = static_cast<int>(i) / n;
        const std::uint32_t im =
            static_cast<std::uint32_t>(g.unwrap(-g.wrap(my))) * n + g.unwrap(-g.wrap(mx));
        sx[i] += piece.cx.val[j];
        sy[i] += piece.cy.val[j];
        sx[im] += std::conj(piece.cx.val[j]);
        sy[im] += std::conj(piece.cy.val[j]);
    }
}

PerturbationSample build_perturbation_sample(
    const Grid& g, double t, const SymTensorField& R_ell_t,
    const TimePartition& partition,
    const std::function<const FlowMap*(long long)>& flow_for_interval,
    const std::array<DirectionSet, 4>& sets, const std::array<GammaSolver, 4>& solvers,
    const ParameterTable& table, int q, const PerturbOptions& options) {
    PerturbationSample out{VectorField(g), {}, 0.0, 0.0, 0.0, 0.0};

    const double lambda = static_cast<double>(table.lambda(q + 1));
    const double delta = static_cast<double>(table.delta(q + 1));
    const int sys_parity = ((q % 2) + 2) % 2;

    // Amplitudes per family parity, shared by all intervals at this sample.
    std::array<std::optional<AmplitudeSet>, 2> amp_sets;
    auto amps_for = [&](int j) -> const AmplitudeSet& {
        if (!amp_sets[static_cast<std::size_t>(j)]) {
            const auto& solver = solvers[static_cast<std::size_t>(2 * sys_parity + j)];
            amp_sets[static_cast<std::size_t>(j)] =
                amplitudes(R_ell_t, solver, lambda, delta);
        }
        return *amp_sets[static_cast<std::size_t>(j)];
    };

    long long i0 = static_cast<long long>(std::floor(t / partition.tau_c()));
    for (long long i = i0 - 1; i <= i0 + 2; ++i) {
        if (i < partition.i_lo() || i > partition.i_hi()) continue;
        const double chi = partition.chi(i, t);
        if (chi == 0.0) continue;
        const int j = partition.parity(i);
        const AmplitudeSet& amps = amps_for(j);
        const FlowMap* flow = flow_for_interval(i);
        const VectorField* disp = nullptr;
        VectorField disp_storage(g);
        if (flow != nullptr) {
            int s = flow->slab.nearest(t);
            if (std::abs(flow->slab.t(s) - t) > 0.25 * flow->slab.dt)
                throw ValidationError("flow slab does not contain the requested sample");
            if (s != flow->anchor_sample &&
                !flow->displacement[static_cast<std::size_t>(s)].x.empty()) {
                disp_storage = flow->displacement_at(s, g);
                disp = &disp_storage;
            }
        }
        for (int rep = 0; rep < 3; ++rep) {
            WavePiece piece =
                build_wave_piece(g, chi, amps.a[static_cast<std::size_t>(rep)], disp,
                                 *amps.family, rep, i, lambda, options.shell_width);
            accumulate_pair(out.w, piece);
            if (options.collect_pieces) out.pieces.push_back(std::move(piece));
        }
        out.cancellation =
            std::max(out.cancellation, cancellation_residual(amps, R_ell_t));
    }

    out.hermitian_defect = hermitian_defect(out.w);
    out.sup_w = sup_norm(out.w);

    // Frequency audit: mass escaping the union of active-family shells.
    const double width = options.shell_width;
    std::array<std::pair<double, double>, 12> centers;
    int nc = 0;
    for (int j = 0; j < 2; ++j) {
        const DirectionSet& fam = sets[static_cast<std::size_t>(2 * sys_parity + j)];
        for (const auto& m : fam.members)
            centers[static_cast<std::size_t>(nc++)] = {lambda * m.x.to_double(),
                                                       lambda * m.y.to_double()};
    }
    auto outside = [&](int kx, int ky) {
        if (kx == 0 && ky == 0) return false;
        for (int c = 0; c < nc; ++c) {
            double dx = kx - centers[static_cast<std::size_t>(c)].first;
            double dy = ky - centers[static_cast<std::size_t>(c)].second;
            if (dx * dx + dy * dy <= width * lambda * width * lambda) return false;
        }
        return true;
    };
    double total = spectral_mass(out.w, [](int, int) { return true; });
    double escaped = spectral_mass(out.w, outside);
    out.mass_outside_shells = total > 0.0 ? escaped / total : 0.0;
    return out;
}

double hermitian_defect(const ScalarField& f) {
    const Grid& g = f.grid();
    const int n = g.n();
    const auto& sp = f.cspec();
    double worst = 0.0;
    for (int my = 0; my < n; ++my) {
        for (int mx = 0; mx < n; ++mx) {
            int ky = g.wrap(my), kx = g.wrap(mx);
            if (kx == -n / 2 || ky == -n / 2) continue;  // no mirror on the grid
            std::size_t i = static_cast<std::size_t>(my) * n + mx;
            std::size_t im = static_cast<std::size_t>(g.unwrap(-ky)) * n + g.unwrap(-kx);
            worst = std::max(worst, std::abs(sp[i] - std::conj(sp[im])));
        }
    }
    return worst;
}

double hermitian_defect(const VectorField& f) {
    return std::max(hermitian_defect(f.x), hermitian_defect(f.y));
}

}  // namespace sqgforge
