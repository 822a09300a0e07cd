#pragma once

#include <array>

#include "sqgforge/params.hpp"
#include "sqgforge/series.hpp"

namespace sqgforge {

// ---- Temporal mollifier -------------------------------------------------

/// Discrete convolution against a compactly supported smooth bump of total
/// width tau (support [-tau/2, tau/2]), weights normalized to unit mass.
/// The series is zero-extended on both sides. Requires dt <= tau/8.
SymSeries mollify_time(const SymSeries& series, double tau);
std::vector<double> mollifier_weights(double tau, double dt);
/// First absolute moment of the discrete bump divided by tau; the constant
/// in ||R - R_l||_0 <= C tau ||dt R||_0.
double mollifier_first_moment(double tau, double dt);

// ---- Temporal partition of unity ---------------------------------------

/// Squared partition of unity on cutoff intervals t_i = i tau_c: bumps
/// chi_i supported in (t_{i-1}, t_{i+1}) with sum chi_i^2 = 1 on the
/// requested support window and 0 outside the active range. The profile is
/// a smooth exp-glued crossfade, so sum chi^2 = 1 holds exactly on
/// overlaps. Interval parity i mod 2 selects the direction family.
class TimePartition {
  public:
    /// Bumps become active so that the identity region covers
    /// [support_lo, support_hi]. Everything left of hard_lo must stay
    /// untouched: construction fails if the first bump would reach it.
    TimePartition(double tau_c, double support_lo, double support_hi,
                  double hard_lo = 0.0);

    double tau_c() const { return tau_c_; }
    long long i_lo() const { return i_lo_; }
    long long i_hi() const { return i_hi_; }
    double t_cut(long long i) const { return tau_c_ * static_cast<double>(i); }

    double chi(long long i, double t) const;
    double dchi(long long i, double t) const;
    double sum_sq(double t) const;
    int parity(long long i) const { return static_cast<int>(((i % 2) + 2) % 2); }

    /// Support of all bumps: [t_{i_lo - 1}, t_{i_hi + 1}].
    double active_lo() const { return t_cut(i_lo_ - 1); }
    double active_hi() const { return t_cut(i_hi_ + 1); }
    /// Window where sum chi^2 = 1.
    double cover_lo() const { return t_cut(i_lo_); }
    double cover_hi() const { return t_cut(i_hi_); }

    /// Measured sup |dchi| * tau_c over a probe of the profile.
    double measured_derivative_constant() const;

  private:
    double tau_c_;
    long long i_lo_, i_hi_;
};

TimePartition build_partition(const ParameterTable& table, int q, double support_lo,
                              double support_hi, double hard_lo = 0.0);

// ---- Direct evaluation of sparse spectral velocities --------------------

/// Evaluates a real vector field given by compact spectral data at
/// arbitrary points, f(x) = c0 + sum_half 2 Re(c exp(i k.x)).
class ModeSum {
  public:
    ModeSum() = default;
    ModeSum(const CompactVector& field, int n);

    void eval(double x, double y, double out[2]) const;
    std::size_t mode_count() const { return modes_.size(); }
    /// l1 bound on the sup norm.
    double sup_bound() const;

  private:
    struct Mode {
        double kx, ky;
        Complex cx, cy;
        double weight;  // 2 for conjugate pairs, 1 for the mean mode
    };
    std::vector<Mode> modes_;
    double mean_[2] = {0.0, 0.0};
};

// ---- Lagrangian flow maps ------------------------------------------------

/// Backward characteristics of the transport field Lambda v_q on one
/// partition slab, anchored to the identity at t_i. Stores the unwrapped
/// displacement Phi_i - x so the deformation gradient stays smooth.
struct FlowMap {
    long long interval = 0;
    double t_anchor = 0.0;
    TimeGrid slab;
    int anchor_sample = -1;  // sample with displacement exactly zero
    std::vector<CompactVector> displacement;  // spectral, per slab sample

    VectorField displacement_at(int s, const Grid& g) const {
        return displacement[static_cast<std::size_t>(s)].expand(g);
    }
    /// deformation gradient components (d Phi_i / d x) - Id as four fields
    /// (xx, xy, yx, yy order) obtained spectrally from the displacement.
    std::array<ScalarField, 4> deformation_minus_id(int s, const Grid& g) const;
};

struct FlowOptions {
    double substep = 0.0;        // 0: pick tau_c/8 capped by the CFL bound
    double cfl_fraction = 0.5;   // step <= fraction * dx / ||Lambda v||_0
    double compact_tol = 1e-15;  // threshold for storing displacements
};

/// Solves D_{t, Lambda v} Phi_i = 0, Phi_i(t_i, x) = x by RK4 backward
/// characteristics for every run sample inside supp chi_i. The velocity
/// series is interpolated cubically in time. Throws when a requested
/// substep violates the CFL bound.
FlowMap solve_flow(const VectorSeries& v_series, const Grid& grid, long long interval,
                   const TimePartition& partition, const FlowOptions& options = {});

/// Trajectory endpoints for scattered points, exposed for reversibility
/// and closed-form checks: integrates dX/ds = Lambda v(s, X) from t_from
/// to t_to starting at the given points (in place).
void trace_points(const VectorSeries& v_series, double t_from, double t_to,
                  std::vector<double>& xs, std::vector<double>& ys, double substep);

}  // namespace sqgforge
