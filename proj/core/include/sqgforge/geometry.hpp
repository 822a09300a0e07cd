#pragma once

#include <array>
#include <string>
#include <vector>

#include "sqgforge/rational.hpp"

namespace sqgforge {

/// Unit vector with exact rational coordinates; 85x and 85y are integers.
struct RationalVec {
    Rational x, y;

    RationalVec perp() const { return {-y, x}; }
    RationalVec operator-() const { return {-x, -y}; }
    bool operator==(const RationalVec& o) const { return x == o.x && y == o.y; }

    Rational norm_sq() const { return x * x + y * y; }
    bool is_unit() const { return norm_sq() == Rational(1); }
    bool is_85_integral() const {
        return (Rational(85) * x).den() == 1 && (Rational(85) * y).den() == 1;
    }
};

/// One of the four families: six members closed under negation,
/// stored as three representatives followed by their negations.
struct DirectionSet {
    int i = 0;  // parity selecting the family pair (which iterate gets perturbed)
    int j = 0;  // parity alternating between adjacent time intervals
    std::array<RationalVec, 6> members;

    const RationalVec& rep(int p) const { return members[static_cast<size_t>(p)]; }
    std::string name() const {
        return "Omega_" + std::to_string(j) + "^" + std::to_string(i);
    }
    bool contains(const RationalVec& v) const;
    bool negation_closed() const;
};

/// The four direction families, indexed [i][j] flattened as 2*i + j.
std::array<DirectionSet, 4> build_direction_sets();

/// Exact squared minimum of |k+k'| over pairs within the set with k' != -k.
Rational min_pair_norm_sq(const DirectionSet& set);

/// Exact squared minimum over all four sets; equals 242/425.
Rational global_min_pair_norm_sq();

bool sets_pairwise_disjoint(const std::array<DirectionSet, 4>& sets);

/// Symmetric 2x2 matrix, (xx, xy, yy) storage.
struct Sym2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    static Sym2 identity() { return {1.0, 0.0, 1.0} ; }
    Sym2 operator+(const Sym2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
    Sym2 operator-(const Sym2& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
    Sym2 scaled(double s) const { return {s * xx, s * xy, s * yy}; }
    /// Operator norm (largest absolute eigenvalue).
    double op_norm() const;
};

using RationalMat3 = std::array<std::array<Rational, 3>, 3>;

/// Coefficient solver for one family: maps a symmetric matrix R near the
/// identity to the three positive coefficients of
///   R = sum_p c_p (rep_p^perp x rep_p^perp),
/// equivalently R = 1/2 sum_{k in set} gamma_k(R)^2 (k^perp x k^perp) with
/// gamma_k = gamma_{-k} = sqrt(c_p). The 3x3 base matrix and its inverse are
/// exact rationals; per-point solves run in floating point.
class GammaSolver {
  public:
    explicit GammaSolver(const DirectionSet& set);

    const DirectionSet& set() const { return set_; }

    /// c(R): the linear solve. No positivity check.
    std::array<double, 3> coefficients(const Sym2& R) const;

    /// gamma values for the three +/- pairs; throws OutOfBallError when any
    /// coefficient is non-positive.
    std::array<double, 3> gamma(const Sym2& R) const;

    /// Exact coefficients at a rational R, for audits.
    std::array<Rational, 3> coefficients_exact(const std::array<Rational, 3>& r) const;

    /// Certified radius: |R - Id| <= eps* (operator norm) implies c(R) > 0.
    /// Computed as min_p c_p(Id) / (abs row sum of row p of the inverse).
    double admissible_radius() const;
    Rational admissible_radius_exact() const;

    const RationalMat3& base_matrix() const { return base_; }
    const RationalMat3& base_inverse() const { return inverse_; }

    /// Reconstruction 1/2 sum gamma_k^2 (k^perp x k^perp) from gamma values.
    Sym2 reconstruct(const std::array<double, 3>& gamma_vals) const;

  private:
    DirectionSet set_;
    RationalMat3 base_;     // columns: (xx, xy, yy) of rep_p^perp tensor
    RationalMat3 inverse_;
    std::array<std::array<double, 3>, 3> inv_d_;  // inverse_ as doubles
    std::array<std::array<double, 3>, 3> tensors_d_;  // per rep: (xx, xy, yy)
    Rational eps_star_;
};

/// Plain-text audit of all four sets as exact fractions, for export.
std::string direction_sets_report(const std::array<DirectionSet, 4>& sets);

}  // namespace sqgforge
