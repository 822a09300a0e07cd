#pragma once

#include <memory>

#include "sqgforge/stress.hpp"

namespace sqgforge {

enum class ActiveRole { v_active, u_active };

/// Shared, sign-tagged stress series: role swaps flip the sign instead of
/// copying, which keeps double swaps exact.
struct SignedSymSeries {
    double sign = 1.0;
    std::shared_ptr<const SymSeries> series;

    const TimeGrid& tg() const { return series->tg; }
    CompactSym sample(int s) const { return series->at_extended(s).scaled(sign); }
    bool same_object(const SignedSymSeries& o) const { return series == o.series; }
};

/// Force potential as an ordered sum of signed terms. Absorbing a stress
/// appends a term; absorbing its exact negation pops it again, so a double
/// role swap restores the list bitwise.
struct ForceSeries {
    TimeGrid tg;
    std::vector<SignedSymSeries> terms;

    CompactSym sample(int s) const;
    void absorb(const SignedSymSeries& t);
};

/// Closed-form initial datum: a stream-function combination of the two
/// unit modes with a smooth compactly supported time bump,
///   V(t, x) = eta(t) grad_perp(psi), psi = 2 Re(c10 e^{ix1} + c01 e^{ix2}).
/// Divergence-free, mean-zero, and P_{<=1} V = V by construction.
struct InitialData {
    Complex c10{0.35, 0.15};
    Complex c01{-0.25, 0.4};
    double t_start = 1.0625;  // support in (1, infinity)
    double width = 0.0625;

    double eta(double t) const;
    void validate() const;
};

struct SchemeConfig {
    int grid_n = 256;
    double shell_width = 0.2;
    double compact_tol = 1e-15;
    int stress_store_stride = 1;
    double target_slabs = 8.0;    // support width in units of tau_{c,1}
    bool auto_width = true;       // fit InitialData.width to target_slabs
    double zeta_safety = 0.8;
    double zeta_override = 0.0;   // > 0 skips the bisection
    int residual_probe_stride = 8;
    unsigned long long seed = 1;
};

struct SystemState {
    int q = 0;
    ActiveRole role = ActiveRole::v_active;
    Grid grid{256};
    TimeGrid tg;
    VectorSeries v, u;
    ForceSeries F;
    SignedSymSeries R;
    ParameterConfig pconfig;
    ParameterTable table;
    SchemeConfig sconfig;
    double zeta = 1.0;
    double support_lo = 0.0, support_hi = 0.0;

    const VectorSeries& active() const {
        return role == ActiveRole::v_active ? v : u;
    }
    VectorSeries& active() { return role == ActiveRole::v_active ? v : u; }
    const VectorSeries& inactive() const {
        return role == ActiveRole::v_active ? u : v;
    }
};

struct InitReport {
    double zeta_bisect = 0.0;
    double zeta_used = 0.0;
    double active_residual = 0.0;
    double inactive_residual = 0.0;
    double residual_scale = 0.0;
    std::array<double, 4> estimate_ratios{};  // measured/allowed, <= 1 required
};

/// Builds the q = 0 state: v0 = V, u0 = -V, F0 and R0 recovered with the
/// anti-divergence at zero pressure, then the amplitude rescaling chosen by
/// bisection so the inductive estimates hold. Time derivatives are the
/// centered differences of the stored series throughout, which makes the
/// recovered system exact at the stored resolution.
SystemState initialize(const InitialData& data, const ParameterConfig& pconfig,
                       const ParameterTable& table, const SchemeConfig& sconfig,
                       InitReport* report = nullptr);

struct IterationReport {
    int q = 0;
    double w_sup = 0.0;
    double measured_M = 0.0;         // ||w||_0 / delta_{q+1}^{1/2}
    double cancellation_max = 0.0;   // vs 1e-11 delta_{q+1}
    double mass_outside_shells = 0.0;
    double hermitian_defect = 0.0;
    double w_divfree_defect = 0.0;
    double richardson_w = 0.0;
    double flow_det_deviation = 0.0;    // max |det grad Phi - 1|
    double partition_sum_err = 0.0;     // max |sum chi^2 - 1| on cover
    double partition_dchi_const = 0.0;  // sup|dchi| tau_c
    double nash_scalar_discrepancy = 0.0;
    HighLowDiagnostic osc;
    double moll_first_moment = 0.0;
    StressBreakdown breakdown;
    double support_lo = 0.0, support_hi = 0.0;
    double temporal_bound = 0.0;  // 1 - sum tau_m; support must stay right of it
};

/// One full step of the iterative proposition: mollify, partition, flows,
/// amplitudes, perturbation, stress components, assembly. The inactive
/// field and the force are carried over untouched.
SystemState iterate_once(const SystemState& state, IterationReport* report = nullptr);

/// Moves the stress across systems: R -> -R, F -> F + R, role flipped.
SystemState swap_roles(const SystemState& state);

enum class WhichSystem { active, inactive };

struct ResidualReport {
    double sup = 0.0;    // sup over probe samples of the projected residual
    double scale = 0.0;  // magnitude of the separate terms
};

/// Leray-projected momentum residual d_t X + N(X) - div F (- div R for the
/// active system), with centered time differences at the stored dt.
ResidualReport residual(const SystemState& state, WhichSystem which);

struct ScalarRecovery {
    ScalarSeries theta_v, theta_u, f;  // theta = -grad_perp . field
    double theta_mean_max = 0.0;
    double scalar_residual = 0.0;      // d_t theta + u.grad theta - f (active)
    double curl_consistency = 0.0;     // |scalar residual + grad_perp . momentum residual|
};

/// Scalar correspondences theta = -grad_perp . v, f = -grad_perp . div F.
ScalarRecovery scalar_recover(const SystemState& state);

/// Time support [lo, hi] of the stored data (nnz scan); +-inf when empty.
std::pair<double, double> data_support(const SystemState& state);

/// Remaps a compact field between grid sizes (band must fit both).
CompactScalar regrid(const CompactScalar& c, int n_from, int n_to);
CompactVector regrid(const CompactVector& c, int n_from, int n_to);
CompactSym regrid(const CompactSym& c, int n_from, int n_to);

}  // namespace sqgforge
