#pragma once

#include <deque>
#include <string>

#include "sqgforge/params.hpp"
#include "sqgforge/perturb.hpp"

namespace sqgforge {

/// B(D_t w): centered difference in time (supplied by the caller as dtw)
/// plus the advective part (Lambda v . grad) w, passed through the
/// anti-divergence.
SymTensorField transport_error_sample(const VectorField& dtw, const VectorField& v_t,
                                      const VectorField& w_t);

/// B(Lambda w . grad v - (grad v)^T . Lambda w + (grad Lambda v)^T . w).
/// scalar_form_discrepancy, when non-null, receives the sup distance
/// between B of the first two terms and B(Lambda w^perp (grad_perp . v)).
SymTensorField nash_error_sample(const VectorField& w_t, const VectorField& v_t,
                                 double* scalar_form_discrepancy = nullptr);

struct HighLowDiagnostic {
    double low_cut = 0.0;            // frequency cut (lambda_{q+1}/3)
    double low_sup = 0.0;            // sup |B(low-pass of the defining field)|
    double low_mass_fraction = 0.0;  // wave-bracket mass below the cut / total
    double reference = 0.0;          // lambda_q delta_{q+1}
};

/// R_osc := B(div R_l + Lambda w . grad w - (grad w)^T . Lambda w), computed
/// exactly in spectral space. The high/low split is reported as a
/// diagnostic, not used in the construction.
SymTensorField oscillation_error_sample(const VectorField& w_t,
                                        const SymTensorField& R_ell_t, double lambda_q1,
                                        double lambda_q_delta_q1,
                                        HighLowDiagnostic* diag = nullptr);

struct ComponentNorms {
    std::string name;
    double sup0 = 0.0;      // sup_t ||.||_0
    double sup1 = 0.0;      // sup_t ||.||_1
    double dt_sup = 0.0;    // sup_t ||centered d_t||_0
    double richardson = 0.0;  // FD convergence ratio (l2-based), ~4 expected
    bool richardson_ok = true;
};

struct NormRow {
    std::string component;
    std::string norm;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct StressBreakdown {
    /// Components stored at the configured stride; the total at every sample
    /// (the next iterate needs it at full resolution).
    SymSeries mollification, transport, nash, oscillation, total;
    std::vector<ComponentNorms> norms;  // moll, tran, nash, osc, total
    std::vector<NormRow> table;
    bool desk_mode = false;
    double threshold_size = 0.0;  // eps lambda_{q+2} delta_{q+2}
    double threshold_time = 0.0;  // tau_{m,q+1}^{-1} lambda_{q+2} delta_{q+2}
};

void write_csv(const StressBreakdown& b, std::ostream& os);

/// Streams per-sample components, accumulates norms, and stores a strided
/// compact series of each component plus their sum. The sum is formed in a
/// fixed order so the stored total equals the stored components' sum
/// bitwise.
class StressAssembler {
  public:
    StressAssembler(const Grid& grid, const TimeGrid& run, int store_stride,
                    double compact_tol);

    void add_sample(int s, const SymTensorField& moll, const SymTensorField& tran,
                    const SymTensorField& nash, const SymTensorField& osc);

    StressBreakdown finish(const ParameterTable& table, const ParameterConfig& config,
                           int q);

  private:
    struct Slot {
        SymSeries series;
        ComponentNorms norms;
        std::deque<CompactSym> window;  // rolling for d_t and Richardson
    };

    void track(Slot& slot, int s, const SymTensorField& f, const CompactSym& compact);

    Grid grid_;
    TimeGrid run_;
    int stride_;
    double tol_;
    std::array<Slot, 5> slots_;  // moll, tran, nash, osc, total
    int samples_seen_ = 0;
};

}  // namespace sqgforge
