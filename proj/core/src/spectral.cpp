#include "sqgforge/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace sqgforge {

namespace {

/// Applies out(k) = factor(kx, ky) * in(k) over the full plane.
template <typename F>
ScalarField map_modes(const ScalarField& f, F factor) {
    const Grid& g = f.grid();
    const int n = g.n();
    ScalarField out(g);
    const auto& in = f.cspec();
    auto& sp = out.mutable_spec();
#pragma omp parallel for schedule(static)
    for (int my = 0; my < n; ++my) {
        const int ky = g.wrap(my);
        for (int mx = 0; mx < n; ++mx) {
            const int kx = g.wrap(mx);
            const std::size_t i = static_cast<std::size_t>(my) * n + mx;
            sp[i] = factor(kx, ky) * in[i];
        }
    }
    return out;
}

double knorm(int kx, int ky) {
    return std::sqrt(static_cast<double>(kx) * kx + static_cast<double>(ky) * ky);
}

}  // namespace

ScalarField lambda_pow(const ScalarField& f, double s) {
    if (s < 0.0) {
        double m = std::abs(f.mean());
        double scale = spec_l2_norm(f);
        if (m > 1e-12 * (scale + 1e-300))
            throw ValidationError("lambda_pow with s<0 requires zero-mean input");
    }
    return map_modes(f, [s](int kx, int ky) -> Complex {
        if (kx == 0 && ky == 0) return s == 0.0 ? 1.0 : 0.0;
        return std::pow(knorm(kx, ky), s);
    });
}

VectorField lambda_pow(const VectorField& f, double s) {
    VectorField out(f.grid());
    out.x = lambda_pow(f.x, s);
    out.y = lambda_pow(f.y, s);
    return out;
}

VectorField grad(const ScalarField& f) {
    VectorField out(f.grid());
    out.x = map_modes(f, [](int kx, int) { return Complex(0.0, kx); });
    out.y = map_modes(f, [](int, int ky) { return Complex(0.0, ky); });
    return out;
}

VectorField grad_perp(const ScalarField& f) {
    VectorField out(f.grid());
    out.x = map_modes(f, [](int, int ky) { return Complex(0.0, -ky); });
    out.y = map_modes(f, [](int kx, int) { return Complex(0.0, kx); });
    return out;
}

ScalarField div(const VectorField& v) {
    ScalarField dx = map_modes(v.x, [](int kx, int) { return Complex(0.0, kx); });
    ScalarField dy = map_modes(v.y, [](int, int ky) { return Complex(0.0, ky); });
    return dx + dy;
}

ScalarField curl_perp(const VectorField& v) {
    ScalarField a = map_modes(v.x, [](int, int ky) { return Complex(0.0, -ky); });
    ScalarField b = map_modes(v.y, [](int kx, int) { return Complex(0.0, kx); });
    return a + b;
}

VectorField div(const SymTensorField& t) {
    VectorField out(t.grid());
    ScalarField a = map_modes(t.xx, [](int kx, int) { return Complex(0.0, kx); });
    ScalarField b = map_modes(t.xy, [](int, int ky) { return Complex(0.0, ky); });
    out.x = a + b;
    ScalarField c = map_modes(t.xy, [](int kx, int) { return Complex(0.0, kx); });
    ScalarField d = map_modes(t.yy, [](int, int ky) { return Complex(0.0, ky); });
    out.y = c + d;
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    return map_modes(f, [](int kx, int ky) {
        return -(static_cast<double>(kx) * kx + static_cast<double>(ky) * ky);
    });
}

VectorField rot_perp(const VectorField& v) {
    VectorField out(v.grid());
    out.x = -1.0 * v.y;
    out.y = v.x;
    return out;
}

VectorField leray(const VectorField& v) {
    const Grid& g = v.grid();
    const int n = g.n();
    VectorField out(g);
    const auto& vx = v.x.cspec();
    const auto& vy = v.y.cspec();
    auto& ox = out.x.mutable_spec();
    auto& oy = out.y.mutable_spec();
#pragma omp parallel for schedule(static)
    for (int my = 0; my < n; ++my) {
        const int ky = g.wrap(my);
        for (int mx = 0; mx < n; ++mx) {
            const int kx = g.wrap(mx);
            const std::size_t i = static_cast<std::size_t>(my) * n + mx;
            if (kx == 0 && ky == 0) {
                ox[i] = vx[i];
                oy[i] = vy[i];
                continue;
            }
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
            const Complex kv = (static_cast<double>(kx) * vx[i] +
                                static_cast<double>(ky) * vy[i]) / k2;
            ox[i] = vx[i] - static_cast<double>(kx) * kv;
            oy[i] = vy[i] - static_cast<double>(ky) * kv;
        }
    }
    return out;
}

double divfree_defect(const VectorField& v) {
    const Grid& g = v.grid();
    const int n = g.n();
    const auto& vx = v.x.cspec();
    const auto& vy = v.y.cspec();
    double num = 0.0, den = 0.0;
    for (int my = 0; my < n; ++my) {
        const int ky = g.wrap(my);
        for (int mx = 0; mx < n; ++mx) {
            const int kx = g.wrap(mx);
            const std::size_t i = static_cast<std::size_t>(my) * n + mx;
            if (kx == 0 && ky == 0) continue;
            double kk = knorm(kx, ky);
            double vv = std::max(std::abs(vx[i]), std::abs(vy[i]));
            num = std::max(num, std::abs(kx * vx[i] + ky * vy[i]));
            den = std::max(den, kk * vv);
        }
    }
    return den == 0.0 ? 0.0 : num / den;
}

ScalarField lowpass(const ScalarField& f, double N) {
    return map_modes(f, [N](int kx, int ky) { return knorm(kx, ky) <= N ? 1.0 : 0.0; });
}

VectorField lowpass(const VectorField& f, double N) {
    VectorField out(f.grid());
    out.x = lowpass(f.x, N);
    out.y = lowpass(f.y, N);
    return out;
}

SymTensorField lowpass(const SymTensorField& f, double N) {
    SymTensorField out(f.grid());
    out.xx = lowpass(f.xx, N);
    out.xy = lowpass(f.xy, N);
    out.yy = lowpass(f.yy, N);
    return out;
}

ScalarField radial_shell(const ScalarField& f, double lam) {
    return map_modes(f, [lam](int kx, int ky) {
        double k = knorm(kx, ky);
        return (k > 0.5 * lam && k <= 2.0 * lam) ? 1.0 : 0.0;
    });
}

namespace {

void check_shell(const Grid& g, double lam, double width) {
    if (lam < 85.0) throw ValidationError("directional shell requires lam >= 85");
    if (!(width > 0.0) || (1.0 + width) * lam > static_cast<double>(g.cutoff()))
        throw ValidationError("directional shell pokes past the dealias cutoff");
}

}  // namespace

ScalarField directional_shell(const ScalarField& f, double kx, double ky, double lam,
                              double width) {
    check_shell(f.grid(), lam, width);
    const double cx = lam * kx, cy = lam * ky, r = width * lam;
    return map_modes(f, [cx, cy, r](int px, int py) {
        double dx = px - cx, dy = py - cy;
        return dx * dx + dy * dy <= r * r ? 1.0 : 0.0;
    });
}

VectorField directional_shell(const VectorField& f, double kx, double ky, double lam,
                              double width) {
    VectorField out(f.grid());
    out.x = directional_shell(f.x, kx, ky, lam, width);
    out.y = directional_shell(f.y, kx, ky, lam, width);
    return out;
}

VectorField proj_wave(const VectorField& f, const RationalVec& kdir, double lam,
                      double width) {
    return leray(directional_shell(f, kdir.x.to_double(), kdir.y.to_double(), lam,
                                   width));
}

double spectral_mass(const ScalarField& f, const std::function<bool(int, int)>& pred) {
    const Grid& g = f.grid();
    const int n = g.n();
    const auto& sp = f.cspec();
    double s = 0.0;
    for (int my = 0; my < n; ++my) {
        const int ky = g.wrap(my);
        for (int mx = 0; mx < n; ++mx) {
            const int kx = g.wrap(mx);
            const std::size_t i = static_cast<std::size_t>(my) * n + mx;
            if (pred(kx, ky)) s += std::norm(sp[i]);
        }
    }
    return std::sqrt(s);
}

double spectral_mass(const VectorField& f, const std::function<bool(int, int)>& pred) {
    double a = spectral_mass(f.x, pred);
    double b = spectral_mass(f.y, pred);
    return std::sqrt(a * a + b * b);
}

SymTensorField antidiv(const VectorField& f) {
    const Grid& g = f.grid();
    const int n = g.n();
    VectorField p = leray(f);
    SymTensorField out(g);
    const auto& px = p.x.cspec();
    const auto& py = p.y.cspec();
    auto& oxx = out.xx.mutable_spec();
    auto& oxy = out.xy.mutable_spec();
    auto& oyy = out.yy.mutable_spec();
#pragma omp parallel for schedule(static)
    for (int my = 0; my < n; ++my) {
        const int ky = g.wrap(my);
        for (int mx = 0; mx < n; ++mx) {
            const int kx = g.wrap(mx);
            const std::size_t i = static_cast<std::size_t>(my) * n + mx;
            if (kx == 0 && ky == 0) {
                oxx[i] = oxy[i] = oyy[i] = 0.0;
                continue;
            }
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
            const Complex ik_x(0.0, kx / k2), ik_y(0.0, ky / k2);
            oxx[i] = -(ik_x * px[i] + ik_x * px[i]);
            oxy[i] = -(ik_x * py[i] + ik_y * px[i]);
            oyy[i] = -(ik_y * py[i] + ik_y * py[i]);
        }
    }
    return out;
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
    if (a.grid() != b.grid()) throw ValidationError("product grids differ");
    const int n = a.grid().n();
    const int ba = a.band_inf();
    const int bb = b.band_inf();
    if (ba + bb > n / 2 - 1)
        throw ValidationError("insufficient dealias headroom: bands " +
                              std::to_string(ba) + "+" + std::to_string(bb) +
                              " exceed " + std::to_string(n / 2 - 1));
    ScalarField out(a.grid());
    const auto& pa = a.cphys();
    const auto& pb = b.cphys();
    auto& po = out.mutable_phys();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(po.size()); ++i)
        po[static_cast<std::size_t>(i)] =
            pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(i)];
    return out;
}

VectorField nonlin_bracket(const VectorField& a, const VectorField& b) {
    const Grid& g = a.grid();
    VectorField la = lambda_pow(a, 1.0);
    VectorField dbx = grad(b.x);
    VectorField dby = grad(b.y);
    VectorField out(g);
    // (La . grad) b_i - (d_i b_j) La_j
    out.x = multiply(la.x, dbx.x) + multiply(la.y, dbx.y) -
            (multiply(dbx.x, la.x) + multiply(dby.x, la.y));
    out.y = multiply(la.x, dby.x) + multiply(la.y, dby.y) -
            (multiply(dbx.y, la.x) + multiply(dby.y, la.y));
    return out;
}

VectorField sqg_nonlinearity(const VectorField& v) { return nonlin_bracket(v, v); }

double sup_norm(const ScalarField& f) {
    const auto& p = f.cphys();
    double m = 0.0;
    for (double v : p) m = std::max(m, std::abs(v));
    return m;
}

double sup_norm(const VectorField& f) { return std::max(sup_norm(f.x), sup_norm(f.y)); }

double sup_norm(const SymTensorField& f) {
    return std::max({sup_norm(f.xx), sup_norm(f.xy), sup_norm(f.yy)});
}

double grad_sup_norm(const ScalarField& f) { return sup_norm(grad(f)); }

double grad_sup_norm(const VectorField& f) {
    return std::max(grad_sup_norm(f.x), grad_sup_norm(f.y));
}

double grad_sup_norm(const SymTensorField& f) {
    return std::max({grad_sup_norm(f.xx), grad_sup_norm(f.xy), grad_sup_norm(f.yy)});
}

double l2_norm(const ScalarField& f) {
    const auto& p = f.cphys();
    double s = 0.0;
    for (double v : p) s += v * v;
    return std::sqrt(s / static_cast<double>(p.size()));
}

double spec_l2_norm(const ScalarField& f) {
    const auto& sp = f.cspec();
    double s = 0.0;
    for (const auto& c : sp) s += std::norm(c);
    return std::sqrt(s);
}

double holder_norm(const ScalarField& f, double alpha) {
    if (alpha < 0.0 || alpha > 2.0)
        throw ValidationError("holder_norm expects alpha in [0,2]");
    const int n = f.grid().n();
    const double kmax = static_cast<double>(n) / 2.0;
    double sup_blocks = 0.0;
    for (int j = 0; std::pow(2.0, j) <= kmax; ++j) {
        const double lo = std::pow(2.0, j), hi = std::pow(2.0, j + 1);
        ScalarField block = map_modes(f, [lo, hi](int kx, int ky) {
            double k = knorm(kx, ky);
            return (k >= lo && k < hi) ? 1.0 : 0.0;
        });
        sup_blocks = std::max(sup_blocks, sup_norm(block) * std::pow(2.0, j * alpha));
    }
    return sup_norm(f) + sup_blocks;
}

ScalarField random_scalar(const Grid& g, int band, std::mt19937_64& rng) {
    if (band < 1 || band > g.cutoff())
        throw ValidationError("random field band outside [1, cutoff]");
    const int n = g.n();
    ScalarField out(g);
    auto& sp = out.mutable_spec();
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int ky = 0; ky <= band; ++ky) {
        for (int kx = -band; kx <= band; ++kx) {
            if (ky == 0 && kx <= 0) continue;  // half plane; mean stays zero
            Complex c(gauss(rng), gauss(rng));
            sp[static_cast<std::size_t>(g.unwrap(ky)) * n + g.unwrap(kx)] = c;
            sp[static_cast<std::size_t>(g.unwrap(-ky)) * n + g.unwrap(-kx)] =
                std::conj(c);
        }
    }
    return out;
}

VectorField random_divfree(const Grid& g, int band, std::mt19937_64& rng) {
    ScalarField psi = random_scalar(g, band, rng);
    return grad_perp(psi);
}

SymTensorField random_sym(const Grid& g, int band, std::mt19937_64& rng) {
    SymTensorField out(g);
    out.xx = random_scalar(g, band, rng);
    out.xy = random_scalar(g, band, rng);
    out.yy = random_scalar(g, band, rng);
    return out;
}

}  // namespace sqgforge
