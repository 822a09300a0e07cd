#include "sqgforge/identity_suite.hpp"

#include <cmath>

#include "sqgforge/perturb.hpp"

namespace sqgforge {

namespace {

double rel(double resid, double scale) { return resid / (scale + 1e-300); }

}  // namespace

std::vector<IdentityCheck> run_identity_suite(int n, unsigned long long seed,
                                              int trials) {
    Grid g(n);
    std::mt19937_64 rng(seed);
    const int band = std::max(2, n / 8);

    struct Acc {
        double worst = 0.0;
        void feed(double r) { worst = std::max(worst, r); }
    };
    Acc proj_grad, anti_grad, div_anti, leray_idem, product_rule, nash_form, zero_mean,
        roundtrip, parseval, commute, cancel;

    auto sets = build_direction_sets();
    GammaSolver solver0(sets[0]);
    GammaSolver solver2(sets[2]);

    for (int trial = 0; trial < trials; ++trial) {
        ScalarField f = random_scalar(g, band, rng);
        VectorField v = random_divfree(g, band, rng);
        VectorField w = random_divfree(g, band, rng);

        // P grad f = 0 and B grad f = 0.
        VectorField gf = grad(f);
        proj_grad.feed(rel(sup_norm(leray(gf)), sup_norm(gf)));
        anti_grad.feed(rel(sup_norm(antidiv(gf)), sup_norm(gf)));

        // div B u = P u - mean(u) for a generic (not divergence-free) field.
        VectorField u(g);
        u.x = random_scalar(g, band, rng);
        u.y = random_scalar(g, band, rng);
        VectorField lhs = div(antidiv(u));
        VectorField rhs = leray(u);  // random_scalar is mean-free already
        div_anti.feed(rel(sup_norm(lhs - rhs), sup_norm(rhs)));

        // P^2 = P.
        VectorField pu = leray(u);
        leray_idem.feed(rel(sup_norm(leray(pu) - pu), sup_norm(pu)));

        // (grad w)^T Lv + (grad Lv)^T w = grad(w . Lv).
        {
            VectorField lv = lambda_pow(v, 1.0);
            VectorField dwx = grad(w.x), dwy = grad(w.y);
            VectorField dlx = grad(lv.x), dly = grad(lv.y);
            VectorField left(g);
            left.x = multiply(dwx.x, lv.x) + multiply(dwy.x, lv.y) +
                     multiply(dlx.x, w.x) + multiply(dly.x, w.y);
            left.y = multiply(dwx.y, lv.x) + multiply(dwy.y, lv.y) +
                     multiply(dlx.y, w.x) + multiply(dly.y, w.y);
            ScalarField dot = multiply(w.x, lv.x) + multiply(w.y, lv.y);
            VectorField right = grad(dot);
            product_rule.feed(rel(sup_norm(left - right), sup_norm(right)));
        }

        // B(Lw . grad v - (grad v)^T Lw) = B(Lw^perp (grad_perp . v)).
        {
            SymTensorField b1 = antidiv(nonlin_bracket(w, v));
            VectorField lwp = rot_perp(lambda_pow(w, 1.0));
            ScalarField om = curl_perp(v);
            VectorField alt(g);
            alt.x = multiply(lwp.x, om);
            alt.y = multiply(lwp.y, om);
            SymTensorField b2 = antidiv(alt);
            nash_form.feed(rel(sup_norm(b1 - b2), sup_norm(b1)));
        }

        // The nonlinearity of a divergence-free field has zero mean.
        {
            VectorField nv = sqg_nonlinearity(v);
            double scale = sup_norm(nv);
            zero_mean.feed(rel(std::max(std::abs(nv.x.mean()), std::abs(nv.y.mean())),
                               scale));
        }

        // Physical <-> spectral round trip and Parseval.
        {
            ScalarField copy = f;
            const auto& phys0 = f.cphys();
            copy.mutable_spec();  // force a transform cycle
            const auto& phys1 = copy.cphys();
            double worst = 0.0, scale = sup_norm(f);
            for (std::size_t i = 0; i < phys0.size(); ++i)
                worst = std::max(worst, std::abs(phys0[i] - phys1[i]));
            roundtrip.feed(rel(worst, scale));
            parseval.feed(rel(std::abs(l2_norm(f) - spec_l2_norm(f)), spec_l2_norm(f)));
        }

        // Fourier-diagonal operators commute: [Lambda, P] = 0.
        {
            VectorField a = lambda_pow(leray(u), 1.0);
            VectorField b = leray(lambda_pow(u, 1.0));
            commute.feed(rel(sup_norm(a - b), sup_norm(a)));
        }

        // Coefficient cancellation at a random admissible mollified stress.
        {
            const GammaSolver& solver = (trial % 2 == 0) ? solver0 : solver2;
            double lam = 170.0, del = 0.3;
            double eps_star = solver.admissible_radius();
            SymTensorField E = random_sym(g, std::max(1, band / 2), rng);
            double scale = 0.0;
            {
                const auto& xx = E.xx.cphys();
                const auto& xy = E.xy.cphys();
                const auto& yy = E.yy.cphys();
                for (std::size_t i = 0; i < g.size(); ++i)
                    scale = std::max(scale,
                                     Sym2{xx[i], xy[i], yy[i]}.op_norm());
            }
            double target = 0.9 * eps_star * lam * del / (scale + 1e-300);
            SymTensorField R_ell = target * E;
            AmplitudeSet amps = amplitudes(R_ell, solver, lam, del);
            cancel.feed(cancellation_residual(amps, R_ell) / del);
        }
    }

    auto mk = [](const std::string& name, const Acc& acc, double tol) {
        return IdentityCheck{name, acc.worst, tol, acc.worst < tol};
    };
    std::vector<IdentityCheck> out;
    out.push_back(mk("leray_kills_gradients", proj_grad, 1e-11));
    out.push_back(mk("antidiv_kills_gradients", anti_grad, 1e-11));
    out.push_back(mk("div_antidiv_is_leray_minus_mean", div_anti, 1e-11));
    out.push_back(mk("leray_idempotent", leray_idem, 1e-11));
    out.push_back(mk("gradient_product_rule", product_rule, 1e-11));
    out.push_back(mk("nash_scalar_form", nash_form, 1e-11));
    out.push_back(mk("nonlinearity_zero_mean", zero_mean, 1e-11));
    out.push_back(mk("transform_round_trip", roundtrip, 1e-12));
    out.push_back(mk("parseval", parseval, 1e-12));
    out.push_back(mk("multiplier_commutation", commute, 1e-13));
    out.push_back(mk("amplitude_cancellation", cancel, 1e-11));
    return out;
}

bool all_pass(const std::vector<IdentityCheck>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

}  // namespace sqgforge
