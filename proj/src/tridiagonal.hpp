#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "sigflow/error.hpp"

namespace sigflow::detail {

// Thomas algorithm for a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i (a_0, c_{n-1} ignored).
inline std::vector<double> solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                                             std::span<const double> c,
                                             std::span<const double> d) {
  const std::size_t n = b.size();
  std::vector<double> cp(n), dp(n), x(n);
  double pivot = b[0];
  if (!(std::abs(pivot) > 1e-300)) throw SolverError("tridiagonal system is singular (row 0)");
  cp[0] = n > 1 ? c[0] / pivot : 0.0;
  dp[0] = d[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = b[i] - a[i] * cp[i - 1];
    if (!(std::abs(pivot) > 1e-300) || !std::isfinite(pivot))
      throw SolverError("tridiagonal system is singular (row " + std::to_string(i) + ")");
    cp[i] = i + 1 < n ? c[i] / pivot : 0.0;
    dp[i] = (d[i] - a[i] * dp[i - 1]) / pivot;
  }
  x[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
  return x;
}

}  // namespace sigflow::detail
