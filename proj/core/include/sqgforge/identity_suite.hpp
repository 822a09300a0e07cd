#pragma once

#include <string>
#include <vector>

#include "sqgforge/spectral.hpp"

namespace sqgforge {

struct IdentityCheck {
    std::string name;
    double residual = 0.0;  // worst relative residual over the trials
    double tol = 0.0;
    bool pass = false;
};

/// Machine-precision operator identities on random band-limited fields:
/// projection kernels, the anti-divergence contract, the product-rule
/// identity behind the stress bookkeeping, the rotated form of the Nash
/// bracket, the zero mean of the nonlinearity, transform round trips,
/// Parseval, multiplier commutation, and the coefficient cancellation of
/// the amplitude solve. All residuals are relative; the outcomes do not
/// depend on the seed beyond roundoff wiggle.
std::vector<IdentityCheck> run_identity_suite(int n, unsigned long long seed,
                                              int trials = 100);

bool all_pass(const std::vector<IdentityCheck>& checks);

}  // namespace sqgforge
