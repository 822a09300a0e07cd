#pragma once

#include <functional>
#include <random>

#include "sqgforge/field.hpp"
#include "sqgforge/geometry.hpp"

namespace sqgforge {

// ---- Fourier multipliers ---------------------------------------------

/// |k|^s multiplier. s > 0 annihilates the mean, s = 0 preserves it,
/// s < 0 rejects input whose mean exceeds 1e-12 of its l2 size.
ScalarField lambda_pow(const ScalarField& f, double s);
VectorField lambda_pow(const VectorField& f, double s);

VectorField grad(const ScalarField& f);
VectorField grad_perp(const ScalarField& f);
ScalarField div(const VectorField& v);
/// The curl-type contraction grad_perp . v = -d2 v1 + d1 v2.
ScalarField curl_perp(const VectorField& v);
VectorField div(const SymTensorField& t);
ScalarField laplacian(const ScalarField& f);

/// Rotate a vector field: v -> (-v2, v1).
VectorField rot_perp(const VectorField& v);

// ---- Projections ------------------------------------------------------

VectorField leray(const VectorField& v);

/// max_k |k.vhat(k)| / max_k |k| |vhat(k)|; zero for the zero field.
double divfree_defect(const VectorField& v);

/// Sharp low-pass |k|_2 <= N.
ScalarField lowpass(const ScalarField& f, double N);
VectorField lowpass(const VectorField& f, double N);
SymTensorField lowpass(const SymTensorField& f, double N);

/// Sharp radial shell lam/2 < |k|_2 <= 2 lam.
ScalarField radial_shell(const ScalarField& f, double lam);

/// Directional shell |k - lam kdir|_2 <= width lam around a unit direction.
/// Rejects shells poking past the grid's dealias cutoff.
ScalarField directional_shell(const ScalarField& f, double kx, double ky, double lam,
                              double width);
VectorField directional_shell(const VectorField& f, double kx, double ky, double lam,
                              double width);

/// The projector used on each perturbation piece: Leray composed with the
/// directional shell around lam * kdir.
VectorField proj_wave(const VectorField& f, const RationalVec& kdir, double lam,
                      double width);

/// L2 spectral mass of the modes selected by pred(kx, ky).
double spectral_mass(const ScalarField& f, const std::function<bool(int, int)>& pred);
double spectral_mass(const VectorField& f, const std::function<bool(int, int)>& pred);

// ---- Anti-divergence --------------------------------------------------

/// B = B0 . Leray with (B0 f)^{ij} = -(-Lap)^{-1}(di f^j + dj f^i).
/// div(antidiv(f)) = leray(f) - mean(f); gradients map to zero.
SymTensorField antidiv(const VectorField& f);

// ---- Products and the nonlinearity ------------------------------------

/// Pointwise product; rejects operands whose bands overflow the exact
/// product range band(a) + band(b) <= n/2 - 1.
ScalarField multiply(const ScalarField& a, const ScalarField& b);

/// Lambda a . grad b - (grad b)^T . Lambda a.
VectorField nonlin_bracket(const VectorField& a, const VectorField& b);

/// N(v) = Lambda v . grad v - (grad v)^T . Lambda v.
VectorField sqg_nonlinearity(const VectorField& v);

// ---- Norms and diagnostics ---------------------------------------------

double sup_norm(const ScalarField& f);
double sup_norm(const VectorField& f);     // max over components
double sup_norm(const SymTensorField& f);
double grad_sup_norm(const ScalarField& f);
double grad_sup_norm(const VectorField& f);
double grad_sup_norm(const SymTensorField& f);
inline double c1_norm(const ScalarField& f) { return sup_norm(f) + grad_sup_norm(f); }
inline double c1_norm(const VectorField& f) { return sup_norm(f) + grad_sup_norm(f); }
inline double c1_norm(const SymTensorField& f) {
    return sup_norm(f) + grad_sup_norm(f);
}

/// Root mean square == spectral l2 by Parseval.
double l2_norm(const ScalarField& f);
double spec_l2_norm(const ScalarField& f);

/// Littlewood-Paley Holder estimator: ||f||_0 + sup_j 2^(j alpha) ||D_j f||_inf
/// over sharp dyadic annuli 2^j <= |k| < 2^(j+1). Equivalent-norm
/// diagnostic, not the exact Holder norm.
double holder_norm(const ScalarField& f, double alpha);

// ---- Random band-limited fields ----------------------------------------

ScalarField random_scalar(const Grid& g, int band, std::mt19937_64& rng);
VectorField random_divfree(const Grid& g, int band, std::mt19937_64& rng);
SymTensorField random_sym(const Grid& g, int band, std::mt19937_64& rng);

}  // namespace sqgforge
