#pragma once

#include <optional>

#include "sqgforge/flowtime.hpp"
#include "sqgforge/geometry.hpp"
#include "sqgforge/spectral.hpp"

namespace sqgforge {

/// Single Beltrami wave b_k(xi) = i k_perp exp(i k.xi) at frequency
/// lambda k, realized as the real conjugate pair 2 Re(amp b_k(lambda x)).
VectorField real_beltrami_pair(const Grid& g, const RationalVec& k, long long lambda,
                               Complex amp);

/// Complex single-mode pair fields for oracle checks: coefficient of
/// b_k(lambda x) at mode lambda*k is i k_perp, of c_k(lambda x) is 1.
CompactVector beltrami_mode_coeff(const Grid& g, const RationalVec& k, long long lambda,
                                  Complex amp);

/// Amplitude fields a_k = delta^{1/2} gamma_k(Id - (lambda delta)^{-1} R_l)
/// for the three +/- pairs of one family (a_{-k} = a_k).
struct AmplitudeSet {
    const DirectionSet* family = nullptr;
    std::vector<ScalarField> a;  // size 3
    double lambda = 0.0;         // lambda_{q+1}
    double delta = 0.0;          // delta_{q+1}
    double sup_argument_dist = 0.0;  // max over grid of |(lambda delta)^{-1} R_l|
};

/// Throws OutOfBallError carrying the worst grid point when the gamma
/// argument leaves the admissible ball.
AmplitudeSet amplitudes(const SymTensorField& R_ell_t, const GammaSolver& solver,
                        double lambda_q1, double delta_q1);

/// sup over the grid of | R_l/lambda + 1/2 sum_k a_k^2 (k_perp x k_perp)
/// - delta Id | (operator norm); exact at the coefficient level, so this
/// stays at roundoff scale.
double cancellation_residual(const AmplitudeSet& amps, const SymTensorField& R_ell_t);

/// One projected wave piece P_{q+1,k} (chi a_k psi b_k(lambda x)) for the
/// representative +k; complex spectral data supported in the +k shell.
/// The physical perturbation contribution of the +/- pair is 2 Re of it.
struct WavePiece {
    long long interval = 0;
    int rep = 0;
    const DirectionSet* family = nullptr;
    double chi = 0.0;
    CompactScalar cx, cy;       // complex coefficients, +k shell only
    double sup_unprojected = 0.0;  // sup |chi a_k| = sup of the piece before P
};

/// Builds the piece and leaves it un-accumulated. displacement == nullptr
/// means the identity flow (psi == 1).
WavePiece build_wave_piece(const Grid& g, double chi, const ScalarField& a_field,
                           const VectorField* displacement, const DirectionSet& family,
                           int rep, long long interval, double lambda, double width);

/// Adds the conjugate-symmetric pair of the piece into the accumulator.
void accumulate_pair(VectorField& w, const WavePiece& piece);

/// Everything the scheme needs from one time sample of the perturbation.
struct PerturbationSample {
    VectorField w;
    std::vector<WavePiece> pieces;
    double sup_w = 0.0;
    double mass_outside_shells = 0.0;  // spectral mass escaping the masks
    double hermitian_defect = 0.0;     // realness audit
    double cancellation = 0.0;         // residual of the stress cancellation
};

struct PerturbOptions {
    double shell_width = 0.2;
    bool collect_pieces = false;
};

/// Assembles w_{q+1}(t) = sum_i sum_k chi_i P_{q+1,k}(a_k b_k(lambda Phi_i))
/// over the active intervals at time t. flows must expose the slabs whose
/// bumps overlap t; family parity follows Omega_{i mod 2}^{q mod 2}.
PerturbationSample build_perturbation_sample(
    const Grid& g, double t, const SymTensorField& R_ell_t,
    const TimePartition& partition,
    const std::function<const FlowMap*(long long)>& flow_for_interval,
    const std::array<DirectionSet, 4>& sets, const std::array<GammaSolver, 4>& solvers,
    const ParameterTable& table, int q, const PerturbOptions& options = {});

/// max_xi |spec(xi) - conj(spec(-xi))| over the plane.
double hermitian_defect(const ScalarField& f);
double hermitian_defect(const VectorField& f);

}  // namespace sqgforge
