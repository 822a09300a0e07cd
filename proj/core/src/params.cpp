#include "sqgforge/params.hpp"

#include <cmath>
#include <cstdio>

namespace sqgforge {

void ParameterConfig::validate() const {
    if (!(b > 1.0L && b < 2.0L))
        throw ValidationError("b must lie in (1,2)");
    if (!(beta > 0.75L && beta < 1.0L))
        throw ValidationError("beta must lie in (3/4,1)");
    if (!(a >= 2.0L)) throw ValidationError("a must be >= 2");
    if (!(eps > 0.0L)) throw ValidationError("eps must be positive");
    if (!(M > 0.0L)) throw ValidationError("M must be positive");
    if (!(smallness > 0.0L && smallness < 1.0L))
        throw ValidationError("smallness must lie in (0,1)");
}

long double ParameterTable::tau_m(int q) const {
    if (q < 0 || q > qmax_)
        throw ValidationError("tau_m index outside [0,qmax]");
    return expl(-log_tau_m_inv(q));
}

long double ParameterTable::log_tau_m_inv(int q) const {
    // log of lambda_{q-2} lambda_q delta_{q-2}^{1/2}
    return log_lambda(q - 2) + log_lambda(q) - beta_ * log_lambda(q - 2);
}

long double ParameterTable::tau_c(int q) const {
    if (q < 0 || q > qmax_ - 1)
        throw ValidationError("tau_c index outside [0,qmax-1]");
    return expl(-log_tau_c_inv(q));
}

long double ParameterTable::log_tau_c_inv(int q) const {
    // log of lambda_q lambda_{q+1} delta_q^{-1/2} delta_{q+1}
    return log_lambda(q) + log_lambda(q + 1) + beta_ * log_lambda(q) -
           2.0L * beta_ * log_lambda(q + 1);
}

long double ParameterTable::tau_m_partial_sum(int q) const {
    long double s = 0.0L;
    for (int i = 0; i <= q; ++i) s += tau_m(i);
    return s;
}

ParameterTable build_table(const ParameterConfig& config, int qmax, TableMode mode,
                           const std::optional<std::vector<long long>>& override_lambda) {
    config.validate();
    if (qmax < 2) throw ValidationError("qmax must be >= 2");
    if (override_lambda && mode == TableMode::rigor)
        throw ValidationError("override_lambda requires desk mode");

    ParameterTable t;
    t.qmax_ = qmax;
    t.mode_ = mode;
    t.beta_ = config.beta;
    size_t count = static_cast<size_t>(qmax) + 3;
    t.lambda_.resize(count);
    t.delta_.resize(count);
    t.log_lambda_.resize(count);

    const long double log_a = logl(config.a);
    auto rigor_lambda = [&](int q) -> std::pair<long double, long double> {
        // Returns (lambda, log lambda). Exact ceiling while a^(b^q) fits in
        // 62 bits; beyond that the ceiling shifts log lambda by less than
        // one part in 2^62 and is dropped.
        long double e = powl(config.b, static_cast<long double>(q));
        long double x = e * log_a;                 // log a^(b^q)
        if (x < 42.0L * 0.6931471805599453L) {
            long double v = expl(x);
            unsigned long long c = static_cast<unsigned long long>(ceill(v));
            long double lam = 85.0L * static_cast<long double>(c);
            return {lam, logl(lam)};
        }
        return {85.0L * expl(x), logl(85.0L) + x};
    };

    if (override_lambda) {
        const auto& ov = *override_lambda;
        if (static_cast<int>(ov.size()) != qmax + 1)
            throw ValidationError("override_lambda must provide qmax+1 values");
        for (size_t i = 0; i < ov.size(); ++i) {
            if (ov[i] <= 0 || ov[i] % 85 != 0)
                throw ValidationError(
                    "override lambda_" + std::to_string(i) + "=" +
                    std::to_string(ov[i]) +
                    " is not a positive multiple of 85; perturbation "
                    "frequencies lambda*k would leave the integer lattice");
            if (i > 0 && ov[i] <= ov[i - 1])
                throw ValidationError("override lambda must be strictly increasing");
            t.lambda_[i + 2] = static_cast<long double>(ov[i]);
            t.log_lambda_[i + 2] = logl(t.lambda_[i + 2]);
        }
        // Geometric surrogates below q=0; these only set the q=0,1 time
        // scales and never label wave frequencies.
        long double r = t.lambda_[2] / t.lambda_[3];
        t.lambda_[1] = t.lambda_[2] * r;
        t.lambda_[0] = t.lambda_[2] * r * r;
        t.log_lambda_[1] = logl(t.lambda_[1]);
        t.log_lambda_[0] = logl(t.lambda_[0]);
    } else {
        for (int q = -2; q <= qmax; ++q) {
            auto [lam, loglam] = rigor_lambda(q);
            t.lambda_[static_cast<size_t>(q + 2)] = lam;
            t.log_lambda_[static_cast<size_t>(q + 2)] = loglam;
        }
        for (int q = 0; q < qmax; ++q) {
            if (!(t.lambda(q + 1) > t.lambda(q)))
                throw ValidationError("lambda sequence fails to increase; a too small");
        }
    }

    for (int q = -2; q <= qmax; ++q) {
        size_t i = static_cast<size_t>(q + 2);
        t.delta_[i] = expl(-2.0L * config.beta * t.log_lambda_[i]);
    }
    return t;
}

std::array<ThresholdRecord, 6> beta_thresholds(long double b, long double beta) {
    if (!(b > 1.0L && b < 2.0L)) throw ValidationError("b must lie in (1,2)");
    long double b2 = b * b, b3 = b2 * b;
    std::array<ThresholdRecord, 6> t;
    t[0] = {"T1_mollification", (b3 + b2 + b - 1) / (2 * b3 + b2 - 1), beta, 0, false,
            false};
    t[1] = {"T2_stress_time", (b2 + 1) / (2 * b2), beta, 0, false, false};
    t[2] = {"T3_deformation", (b2 + b + 2) / (2 * b2 + b + 1), beta, 0, false, false};
    t[3] = {"T4_oscillation", (b + 1) / (2 * b), beta, 0, false, false};
    t[4] = {"T5_cutoff_vs_moll", (b2 + b + 1) / (2 * b2 + b + 1), beta, 0, true, false};
    t[5] = {"T6_velocity_time", 1 / (b + 1), beta, 0, true, false};
    for (auto& r : t) {
        if (r.lower_bound) {
            r.margin = beta - r.value;
            r.pass = beta >= r.value;
        } else {
            r.margin = r.value - beta;
            r.pass = beta < r.value;
        }
    }
    return t;
}

bool InequalityReport::all_records_hold() const {
    for (const auto& r : records)
        if (!r.holds) return false;
    return true;
}

bool InequalityReport::all_thresholds_pass() const {
    for (const auto& r : thresholds)
        if (!r.pass) return false;
    return true;
}

InequalityReport check_inequalities(const ParameterTable& table,
                                    const ParameterConfig& config, int q) {
    config.validate();
    if (q < 1 || q > table.qmax() - 2)
        throw ValidationError("check_inequalities needs 1 <= q <= qmax-2");

    const long double beta = config.beta;
    auto L = [&](int i) { return table.log_lambda(i); };
    auto log_delta = [&](int i) { return -2.0L * beta * L(i); };

    InequalityReport rep;
    rep.q = q;
    rep.mode = table.mode();
    rep.smallness = config.smallness;

    auto add = [&](const std::string& name, long double log_lhs, long double log_rhs) {
        InequalityRecord r;
        r.name = name;
        r.q = q;
        r.lhs = expl(log_lhs);
        r.rhs = expl(log_rhs);
        r.log_ratio = log_lhs - log_rhs;
        r.ratio = expl(r.log_ratio);
        r.holds = r.ratio <= config.smallness;
        r.diagnostic_only = table.mode() == TableMode::desk;
        rep.records.push_back(r);
    };

    const long double log_tau_m_q_inv = table.log_tau_m_inv(q);
    const long double log_tau_m_q1_inv = table.log_tau_m_inv(q + 1);
    const long double log_tau_c_q1_inv = table.log_tau_c_inv(q + 1);

    // lambda_{q-1} lambda_q delta_{q-1}^{1/2}  <<  tau_{c,q+1}^{-1}
    add("1st_inequality", L(q - 1) + L(q) + 0.5L * log_delta(q - 1), log_tau_c_q1_inv);

    // lambda_{q-1}^{-1} tau_{m,q}^{-1} delta_{q-1}^{-1/2} delta_{q+1}
    //   <<  lambda_{q+2} delta_{q+2}
    add("2nd_inequality",
        -L(q - 1) + log_tau_m_q_inv - 0.5L * log_delta(q - 1) + log_delta(q + 1),
        L(q + 2) + log_delta(q + 2));

    // lambda_{q+1}^{-1} delta_{q+1}^{1/2} tau_{m,q}^{-1}  <<  lambda_{q+2} delta_{q+2}
    add("3rd_ineq", -L(q + 1) + 0.5L * log_delta(q + 1) + log_tau_m_q_inv,
        L(q + 2) + log_delta(q + 2));

    // lambda_{q+1}^{-1} delta_{q+1}^{1/2} (tau_{m,q}^{-1} + tau_{c,q+1}^{-1})
    //   <<  lambda_{q+2} delta_{q+2}
    {
        long double big = std::max(log_tau_m_q_inv, log_tau_c_q1_inv);
        long double log_sum =
            big + logl(expl(log_tau_m_q_inv - big) + expl(log_tau_c_q1_inv - big));
        add("implication_un", -L(q + 1) + 0.5L * log_delta(q + 1) + log_sum,
            L(q + 2) + log_delta(q + 2));
    }

    // lambda_{q-1}^2 lambda_q^{-1} lambda_{q+1} tau_{c,q+1} delta_{q-1}^{1/2}  <<  1
    add("1st_derived",
        2.0L * L(q - 1) - L(q) + L(q + 1) - log_tau_c_q1_inv + 0.5L * log_delta(q - 1),
        0.0L);

    // lambda_q delta_{q+1}  <<  lambda_{q+2} delta_{q+2}
    add("osc_1_ineq", L(q) + log_delta(q + 1), L(q + 2) + log_delta(q + 2));

    // The three branches of the time-scale relation against tau_{m,q+1}^{-1}.
    add("M_q+1_tau_c", log_tau_c_q1_inv, log_tau_m_q1_inv);
    add("M_q+1_tau_m", log_tau_m_q_inv, log_tau_m_q1_inv);
    add("M_q+1_third",
        2.0L * L(q) + L(q + 1) + log_delta(q + 1) - L(q - 1) - 0.5L * log_delta(q - 1),
        log_tau_m_q1_inv);

    rep.thresholds = beta_thresholds(config.b, beta);
    return rep;
}

void write_csv(const InequalityReport& report, std::ostream& os) {
    os << "name,q,lhs,rhs,ratio,holds\n";
    char buf[512];
    for (const auto& r : report.records) {
        std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%d\n", r.name.c_str(),
                      r.q, static_cast<double>(r.lhs), static_cast<double>(r.rhs),
                      static_cast<double>(r.ratio), r.holds ? 1 : 0);
        os << buf;
    }
    for (const auto& r : report.thresholds) {
        std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%d\n",
                      (std::string("beta_vs_") + r.name).c_str(), report.q,
                      static_cast<double>(r.beta), static_cast<double>(r.value),
                      static_cast<double>(r.beta / r.value), r.pass ? 1 : 0);
        os << buf;
    }
}

}  // namespace sqgforge
