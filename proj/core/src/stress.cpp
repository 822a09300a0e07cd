#include "sqgforge/stress.hpp"

#include <cmath>
#include <cstdio>

namespace sqgforge {

SymTensorField transport_error_sample(const VectorField& dtw, const VectorField& v_t,
                                      const VectorField& w_t) {
    VectorField lv = lambda_pow(v_t, 1.0);
    VectorField dwx = grad(w_t.x);
    VectorField dwy = grad(w_t.y);
    VectorField material(dtw.grid());
    material.x = dtw.x + multiply(lv.x, dwx.x) + multiply(lv.y, dwx.y);
    material.y = dtw.y + multiply(lv.x, dwy.x) + multiply(lv.y, dwy.y);
    return antidiv(material);
}

SymTensorField nash_error_sample(const VectorField& w_t, const VectorField& v_t,
                                 double* scalar_form_discrepancy) {
    const Grid& g = w_t.grid();
    VectorField first_two = nonlin_bracket(w_t, v_t);

    // (grad Lambda v)^T . w
    VectorField lv = lambda_pow(v_t, 1.0);
    VectorField dlvx = grad(lv.x);
    VectorField dlvy = grad(lv.y);
    VectorField third(g);
    third.x = multiply(dlvx.x, w_t.x) + multiply(dlvy.x, w_t.y);
    third.y = multiply(dlvx.y, w_t.x) + multiply(dlvy.y, w_t.y);

    if (scalar_form_discrepancy != nullptr) {
        // Independent route: Lambda w . grad v - (grad v)^T . Lambda w
        //                  = Lambda w^perp (grad_perp . v).
        VectorField lw_perp = rot_perp(lambda_pow(w_t, 1.0));
        ScalarField omega = curl_perp(v_t);
        VectorField alt(g);
        alt.x = multiply(lw_perp.x, omega);
        alt.y = multiply(lw_perp.y, omega);
        SymTensorField b1 = antidiv(first_two);
        SymTensorField b2 = antidiv(alt);
        *scalar_form_discrepancy = sup_norm(b1 - b2);
    }

    return antidiv(first_two + third);
}

SymTensorField oscillation_error_sample(const VectorField& w_t,
                                        const SymTensorField& R_ell_t, double lambda_q1,
                                        double lambda_q_delta_q1,
                                        HighLowDiagnostic* diag) {
    VectorField bracket = nonlin_bracket(w_t, w_t);
    VectorField rhs = div(R_ell_t) + bracket;
    if (diag != nullptr) {
        diag->low_cut = lambda_q1 / 3.0;
        diag->reference = lambda_q_delta_q1;
        VectorField low = lowpass(rhs, diag->low_cut);
        diag->low_sup = sup_norm(antidiv(low));
        double total = spectral_mass(bracket, [](int, int) { return true; });
        const double cut = diag->low_cut;
        double below = spectral_mass(bracket, [cut](int kx, int ky) {
            return std::sqrt(static_cast<double>(kx) * kx +
                             static_cast<double>(ky) * ky) <= cut;
        });
        diag->low_mass_fraction = total > 0.0 ? below / total : 0.0;
    }
    return antidiv(rhs);
}

StressAssembler::StressAssembler(const Grid& grid, const TimeGrid& run, int store_stride,
                                 double compact_tol)
    : grid_(grid), run_(run), stride_(store_stride < 1 ? 1 : store_stride),
      tol_(compact_tol) {
    const char* names[5] = {"mollification", "transport", "nash", "oscillation",
                            "total"};
    for (int c = 0; c < 5; ++c) {
        auto& slot = slots_[static_cast<std::size_t>(c)];
        slot.norms.name = names[c];
        int st = c == 4 ? 1 : stride_;  // the total keeps full resolution
        slot.series.tg = TimeGrid{run.t0, run.dt * st, (run.nt + st - 1) / st};
        slot.series.samples.resize(static_cast<std::size_t>(slot.series.tg.nt));
    }
}

void StressAssembler::track(Slot& slot, int s, const SymTensorField& f,
                            const CompactSym& compact) {
    slot.norms.sup0 = std::max(slot.norms.sup0, sup_norm(f));
    slot.norms.sup1 = std::max(slot.norms.sup1, c1_norm(f));
    int st = &slot == &slots_[4] ? 1 : stride_;
    if (s % st == 0) slot.series.samples[static_cast<std::size_t>(s / st)] = compact;

    // Rolling window of the last nine compacts for d_t and Richardson.
    slot.window.push_back(compact);
    if (slot.window.size() > 9) slot.window.pop_front();
    const std::size_t w = slot.window.size();
    if (w >= 3) {
        // centered difference at the middle-back position
        const CompactSym& fwd = slot.window[w - 1];
        const CompactSym& bwd = slot.window[w - 3];
        CompactSym d = add(fwd, bwd, 1.0 / (2.0 * run_.dt), -1.0 / (2.0 * run_.dt));
        SymTensorField dd = d.expand(grid_);
        slot.norms.dt_sup = std::max(slot.norms.dt_sup, sup_norm(dd));
    }
    if (w == 9) {
        // l2-based FD convergence ratio at the window center.
        auto fd = [&](int h) {
            return add(slot.window[4 + static_cast<std::size_t>(h)],
                       slot.window[4 - static_cast<std::size_t>(h)],
                       1.0 / (2.0 * h * run_.dt), -1.0 / (2.0 * h * run_.dt));
        };
        CompactSym d1 = fd(1), d2 = fd(2), d4 = fd(4);
        CompactSym num = add(d4, d2, 1.0, -1.0);
        CompactSym den = add(d2, d1, 1.0, -1.0);
        double nn = std::sqrt(num.xx.l2() * num.xx.l2() + num.xy.l2() * num.xy.l2() +
                              num.yy.l2() * num.yy.l2());
        double dn = std::sqrt(den.xx.l2() * den.xx.l2() + den.xy.l2() * den.xy.l2() +
                              den.yy.l2() * den.yy.l2());
        if (dn > 0.0 && nn > 0.0) {
            double r = nn / dn;
            // keep the ratio measured mid-window with the largest signal
            if (slot.norms.richardson == 0.0 || dn > 0.0)
                slot.norms.richardson = r;
        }
    }
}

void StressAssembler::add_sample(int s, const SymTensorField& moll,
                                 const SymTensorField& tran, const SymTensorField& nash,
                                 const SymTensorField& osc) {
    // Fixed assembly order so the stored total is the components' sum bitwise.
    SymTensorField total = moll + osc;
    total += tran;
    total += nash;

    CompactSym cm = CompactSym::compact(moll, tol_);
    CompactSym ct = CompactSym::compact(tran, tol_);
    CompactSym cn = CompactSym::compact(nash, tol_);
    CompactSym co = CompactSym::compact(osc, tol_);
    // The stored total mirrors the same fixed order on compacted parts.
    CompactSym csum = add(add(add(cm, co, 1.0, 1.0), ct, 1.0, 1.0), cn, 1.0, 1.0);

    track(slots_[0], s, moll, cm);
    track(slots_[1], s, tran, ct);
    track(slots_[2], s, nash, cn);
    track(slots_[3], s, osc, co);
    track(slots_[4], s, total, csum);
    ++samples_seen_;
}

StressBreakdown StressAssembler::finish(const ParameterTable& table,
                                        const ParameterConfig& config, int q) {
    StressBreakdown out;
    out.mollification = std::move(slots_[0].series);
    out.transport = std::move(slots_[1].series);
    out.nash = std::move(slots_[2].series);
    out.oscillation = std::move(slots_[3].series);
    out.total = std::move(slots_[4].series);
    out.desk_mode = table.mode() == TableMode::desk;

    const double lam_q1 = static_cast<double>(table.lambda(q + 1));
    out.threshold_size = static_cast<double>(
        config.eps * table.lambda(q + 2) * table.delta(q + 2));
    out.threshold_time = static_cast<double>(table.lambda(q + 2) * table.delta(q + 2) /
                                             table.tau_m(q + 1));

    for (auto& slot : slots_) {
        auto& nm = slot.norms;
        nm.richardson_ok = nm.richardson == 0.0 || (nm.richardson >= 3.0 && nm.richardson <= 5.0);
        out.norms.push_back(nm);
        out.table.push_back({nm.name, "C0", nm.sup0, out.threshold_size,
                             nm.sup0 <= out.threshold_size});
        double scaled_c1 = nm.sup1 / lam_q1;
        out.table.push_back({nm.name, "C1_over_lambda", scaled_c1, out.threshold_size,
                             scaled_c1 <= out.threshold_size});
        out.table.push_back({nm.name, "dt_C0", nm.dt_sup, out.threshold_time,
                             nm.dt_sup <= out.threshold_time});
    }
    return out;
}

void write_csv(const StressBreakdown& b, std::ostream& os) {
    os << "component,norm,value,threshold,pass\n";
    char buf[256];
    for (const auto& row : b.table) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%d\n", row.component.c_str(),
                      row.norm.c_str(), row.value, row.threshold, row.pass ? 1 : 0);
        os << buf;
    }
}

}  // namespace sqgforge
