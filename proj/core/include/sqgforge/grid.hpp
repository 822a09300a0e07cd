#pragma once

#include <cmath>
#include <cstddef>

#include "sqgforge/error.hpp"

namespace sqgforge {

/// Uniform n x n grid on the torus [-pi,pi)^2, n a power of two.
/// dealias_cutoff is the largest retained |k|_inf for iteration-state
/// fields; it obeys the 2/3 rule against n.
class Grid {
  public:
    explicit Grid(int n, int dealias_cutoff = 0)
        : n_(n), cutoff_(dealias_cutoff == 0 ? n / 3 : dealias_cutoff) {
        if (n < 4 || (n & (n - 1)) != 0)
            throw ValidationError("grid size must be a power of two >= 4");
        if (cutoff_ > n / 3)
            throw ValidationError("dealias cutoff exceeds n/3");
        if (cutoff_ < 1) throw ValidationError("dealias cutoff must be >= 1");
    }

    int n() const { return n_; }
    int cutoff() const { return cutoff_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

    double x(int i) const { return -M_PI + 2.0 * M_PI * i / n_; }

    /// Signed frequency for array index m in [0,n).
    int wrap(int m) const { return m <= n_ / 2 - 1 ? m : m - n_; }

    /// Array index for signed frequency k in [-n/2, n/2).
    int unwrap(int k) const { return k >= 0 ? k : k + n_; }

    bool operator==(const Grid& o) const { return n_ == o.n_ && cutoff_ == o.cutoff_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

  private:
    int n_;
    int cutoff_;
};

}  // namespace sqgforge
