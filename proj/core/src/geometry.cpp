#include "sqgforge/geometry.hpp"

#include <cmath>
#include <sstream>

#include "sqgforge/error.hpp"

namespace sqgforge {

bool DirectionSet::contains(const RationalVec& v) const {
    for (const auto& m : members)
        if (m == v) return true;
    return false;
}

bool DirectionSet::negation_closed() const {
    for (const auto& m : members)
        if (!contains(-m)) return false;
    return true;
}

std::array<DirectionSet, 4> build_direction_sets() {
    const RationalVec k1{Rational(1), Rational(0)};
    const RationalVec k2{Rational(36, 85), Rational(77, 85)};
    const RationalVec k3{Rational(36, 85), Rational(-77, 85)};
    const RationalVec m1{Rational(13, 85), Rational(84, 85)};
    const RationalVec m2{Rational(4, 5), Rational(3, 5)};
    const RationalVec m3{Rational(4, 5), Rational(-3, 5)};

    auto family = [](int i, int j, RationalVec a, RationalVec b, RationalVec c) {
        DirectionSet s;
        s.i = i;
        s.j = j;
        s.members = {a, b, c, -a, -b, -c};
        return s;
    };

    std::array<DirectionSet, 4> sets = {
        family(0, 0, k1, k2, k3),
        family(0, 1, k1.perp(), k2.perp(), k3.perp()),
        family(1, 0, m1, m2, m3),
        family(1, 1, m1.perp(), m2.perp(), m3.perp()),
    };
    return sets;
}

Rational min_pair_norm_sq(const DirectionSet& set) {
    bool have = false;
    Rational best;
    for (const auto& a : set.members) {
        for (const auto& b : set.members) {
            RationalVec s{a.x + b.x, a.y + b.y};
            if (s.x.is_zero() && s.y.is_zero()) continue;  // k' = -k excluded
            Rational d = s.norm_sq();
            if (!have || d < best) {
                best = d;
                have = true;
            }
        }
    }
    return best;
}

Rational global_min_pair_norm_sq() {
    auto sets = build_direction_sets();
    Rational best = min_pair_norm_sq(sets[0]);
    for (int s = 1; s < 4; ++s) {
        Rational d = min_pair_norm_sq(sets[static_cast<size_t>(s)]);
        if (d < best) best = d;
    }
    return best;
}

bool sets_pairwise_disjoint(const std::array<DirectionSet, 4>& sets) {
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            for (const auto& v : sets[static_cast<size_t>(a)].members)
                if (sets[static_cast<size_t>(b)].contains(v)) return false;
    return true;
}

double Sym2::op_norm() const {
    // Eigenvalues of [[xx, xy], [xy, yy]].
    double tr = 0.5 * (xx + yy);
    double disc = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return std::max(std::abs(tr + disc), std::abs(tr - disc));
}

namespace {

RationalMat3 invert3(const RationalMat3& m) {
    // Gauss-Jordan on [m | I] in exact arithmetic.
    std::array<std::array<Rational, 6>, 3> a;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            a[r][c] = m[r][c];
            a[r][c + 3] = Rational(r == c ? 1 : 0);
        }
    }
    for (int col = 0; col < 3; ++col) {
        int piv = -1;
        for (int r = col; r < 3; ++r) {
            if (!a[r][col].is_zero()) {
                piv = r;
                break;
            }
        }
        if (piv < 0) throw ValidationError("singular base matrix in GammaSolver");
        std::swap(a[static_cast<size_t>(col)], a[static_cast<size_t>(piv)]);
        Rational pv = a[col][col];
        for (int c = 0; c < 6; ++c) a[col][c] /= pv;
        for (int r = 0; r < 3; ++r) {
            if (r == col || a[r][col].is_zero()) continue;
            Rational f = a[r][col];
            for (int c = 0; c < 6; ++c) a[r][c] -= f * a[col][c];
        }
    }
    RationalMat3 inv;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) inv[r][c] = a[r][c + 3];
    return inv;
}

}  // namespace

GammaSolver::GammaSolver(const DirectionSet& set) : set_(set) {
    // Column p holds the flattened tensor rep_p^perp x rep_p^perp.
    for (int p = 0; p < 3; ++p) {
        RationalVec v = set.rep(p).perp();
        base_[0][p] = v.x * v.x;
        base_[1][p] = v.x * v.y;
        base_[2][p] = v.y * v.y;
    }
    inverse_ = invert3(base_);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) inv_d_[r][c] = inverse_[r][c].to_double();
    for (int p = 0; p < 3; ++p) {
        tensors_d_[p][0] = base_[0][p].to_double();
        tensors_d_[p][1] = base_[1][p].to_double();
        tensors_d_[p][2] = base_[2][p].to_double();
    }

    // eps* = min_p c_p(Id) / ||row_p(inverse)||_1. For symmetric E with
    // operator norm <= eps every entry is bounded by eps, so the coefficient
    // perturbation is at most eps times the row sum.
    std::array<Rational, 3> id = {Rational(1), Rational(0), Rational(1)};
    std::array<Rational, 3> c_id = coefficients_exact(id);
    bool have = false;
    for (int p = 0; p < 3; ++p) {
        Rational rowsum;
        for (int c = 0; c < 3; ++c) rowsum += inverse_[p][c].abs();
        Rational cand = c_id[p] / rowsum;
        if (!have || cand < eps_star_) {
            eps_star_ = cand;
            have = true;
        }
    }
}

std::array<double, 3> GammaSolver::coefficients(const Sym2& R) const {
    std::array<double, 3> c;
    for (int p = 0; p < 3; ++p)
        c[p] = inv_d_[p][0] * R.xx + inv_d_[p][1] * R.xy + inv_d_[p][2] * R.yy;
    return c;
}

std::array<double, 3> GammaSolver::gamma(const Sym2& R) const {
    std::array<double, 3> c = coefficients(R);
    for (int p = 0; p < 3; ++p) {
        if (!(c[p] > 0.0))
            throw OutOfBallError("coefficient " + std::to_string(p) + " of " +
                                     set_.name() + " is non-positive: " +
                                     std::to_string(c[p]),
                                 p, c[p]);
        c[p] = std::sqrt(c[p]);
    }
    return c;
}

std::array<Rational, 3> GammaSolver::coefficients_exact(
    const std::array<Rational, 3>& r) const {
    std::array<Rational, 3> c;
    for (int p = 0; p < 3; ++p) {
        c[p] = Rational(0);
        for (int k = 0; k < 3; ++k) c[p] += inverse_[p][k] * r[k];
    }
    return c;
}

double GammaSolver::admissible_radius() const { return eps_star_.to_double(); }

Rational GammaSolver::admissible_radius_exact() const { return eps_star_; }

Sym2 GammaSolver::reconstruct(const std::array<double, 3>& gamma_vals) const {
    // 1/2 over six members = full sum over the three +/- pairs.
    Sym2 out;
    for (int p = 0; p < 3; ++p) {
        double c = gamma_vals[p] * gamma_vals[p];
        out.xx += c * tensors_d_[p][0];
        out.xy += c * tensors_d_[p][1];
        out.yy += c * tensors_d_[p][2];
    }
    return out;
}

std::string direction_sets_report(const std::array<DirectionSet, 4>& sets) {
    std::ostringstream os;
    for (const auto& s : sets) {
        os << s.name() << "\n";
        for (const auto& m : s.members) {
            os << "  (" << m.x << ", " << m.y << ")   85k = (" << (Rational(85) * m.x)
               << ", " << (Rational(85) * m.y) << ")\n";
        }
        os << "  min |k+k'|^2 over admissible pairs: " << min_pair_norm_sq(s) << "\n";
        GammaSolver solver(s);
        os << "  eps* = " << solver.admissible_radius_exact() << " ~ "
           << solver.admissible_radius() << "\n";
    }
    os << "global min |k+k'|^2 = " << global_min_pair_norm_sq() << "\n";
    return os.str();
}

}  // namespace sqgforge
