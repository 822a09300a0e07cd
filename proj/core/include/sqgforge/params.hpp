#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sqgforge/error.hpp"

namespace sqgforge {

enum class TableMode { rigor, desk };

/// Global configuration of the iteration parameters.
///   a         base frequency parameter, a >= 2
///   b         super-exponential rate, in (1,2)
///   beta      Holder target, in (3/4,1)
///   eps       admissible-ball radius used by the amplitude solve
///   M         inductive constant
///   smallness numeric interpretation of "<<": lhs/rhs <= smallness
struct ParameterConfig {
    long double a = 2.0L;
    long double b = 1.2L;
    long double beta = 0.8L;
    long double eps = 0.28L;  // min certified radius over the four families
    long double M = 1.0L;
    long double smallness = 0.1L;

    void validate() const;
};

/// All scale sequences. lambda and delta are defined for q in [-2, qmax];
/// the two negative indices never label wave frequencies, they only feed
/// the time-scale formulas at q = 0 and q = 1. tau_m is defined on
/// [0, qmax], tau_c on [0, qmax-1].
class ParameterTable {
  public:
    int qmax() const { return qmax_; }
    TableMode mode() const { return mode_; }

    long double lambda(int q) const { return at(lambda_, q); }
    long double delta(int q) const { return at(delta_, q); }
    long double log_lambda(int q) const { return at(log_lambda_, q); }

    /// tau_{m,q} = (lambda_{q-2} lambda_q delta_{q-2}^{1/2})^{-1}, q >= 0.
    long double tau_m(int q) const;
    long double log_tau_m_inv(int q) const;

    /// tau_{c,q} = (lambda_q lambda_{q+1} delta_q^{-1/2} delta_{q+1})^{-1},
    /// 0 <= q <= qmax-1.
    long double tau_c(int q) const;
    long double log_tau_c_inv(int q) const;

    /// Sum of tau_{m,i} for 0 <= i <= q; the temporal-support bookkeeping.
    long double tau_m_partial_sum(int q) const;

  private:
    friend ParameterTable build_table(const ParameterConfig&, int, TableMode,
                                      const std::optional<std::vector<long long>>&);

    long double at(const std::vector<long double>& v, int q) const {
        if (q < -2 || q > qmax_)
            throw ValidationError("parameter index q=" + std::to_string(q) +
                                  " outside [-2," + std::to_string(qmax_) + "]");
        return v[static_cast<size_t>(q + 2)];
    }

    int qmax_ = 0;
    TableMode mode_ = TableMode::rigor;
    long double beta_ = 0.8L;
    std::vector<long double> lambda_, delta_, log_lambda_;  // index q+2
};

/// Populates the table for q = -2..qmax. In rigor mode
/// lambda_q = 85 ceil(a^(b^q)); in desk mode an override sequence replaces
/// lambda_0..lambda_qmax (strictly increasing positive multiples of 85)
/// while delta, tau_m, tau_c follow the same formulas. The two negative
/// surrogate indices extend the override geometrically.
ParameterTable build_table(const ParameterConfig& config, int qmax,
                           TableMode mode = TableMode::rigor,
                           const std::optional<std::vector<long long>>& override_lambda =
                               std::nullopt);

struct ThresholdRecord {
    std::string name;
    long double value = 0.0L;   // threshold at this b
    long double beta = 0.0L;
    long double margin = 0.0L;  // distance from beta to the threshold
    bool lower_bound = false;   // beta must sit above rather than below
    bool pass = false;
};

/// The six closed-form constraint reductions on beta at a given b.
/// T1..T4 are upper bounds, T5 and T6 lower bounds.
std::array<ThresholdRecord, 6> beta_thresholds(long double b, long double beta);

struct InequalityRecord {
    std::string name;
    int q = 0;
    long double lhs = 0.0L;
    long double rhs = 0.0L;
    long double ratio = 0.0L;       // lhs / rhs, computed in log space
    long double log_ratio = 0.0L;
    bool holds = false;             // ratio <= smallness
    bool diagnostic_only = false;   // desk tables: asymptotics not asserted
};

struct InequalityReport {
    int q = 0;
    TableMode mode = TableMode::rigor;
    long double smallness = 0.1L;
    std::vector<InequalityRecord> records;
    std::array<ThresholdRecord, 6> thresholds;

    bool all_records_hold() const;
    bool all_thresholds_pass() const;
};

/// Evaluates every scale comparison at level q (needs q-1 down to q-2 via
/// tau_m and up to q+2): the two mollification inequalities, the derived
/// transport bounds, the oscillation constraint, and the three branches of
/// the time-scale relation. Pure function of its inputs.
InequalityReport check_inequalities(const ParameterTable& table,
                                    const ParameterConfig& config, int q);

/// CSV with columns name,q,lhs,rhs,ratio,holds. Threshold rows reuse the
/// schema with lhs=beta and rhs=threshold.
void write_csv(const InequalityReport& report, std::ostream& os);

}  // namespace sqgforge
