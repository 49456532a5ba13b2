#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "tropicurve/rational.hpp"

namespace tropicurve {

using RatMatrix = std::vector<std::vector<Rational>>;
using IntMatrix = std::vector<std::vector<Integer>>;

/// Solves A x = b exactly. Returns nullopt when A is singular.
inline std::optional<RatVector> solve(RatMatrix a, RatVector b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  RatVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

inline std::optional<RatMatrix> inverse(const RatMatrix& a) {
  const std::size_t n = a.size();
  RatMatrix inv(n, RatVector(n));
  for (std::size_t j = 0; j < n; ++j) {
    RatVector e(n, Rational(0));
    e[j] = 1;
    auto col = solve(a, e);
    if (!col) return std::nullopt;
    for (std::size_t i = 0; i < n; ++i) inv[i][j] = (*col)[i];
  }
  return inv;
}

inline RatVector multiply(const RatMatrix& a, const RatVector& x) {
  RatVector y(a.size(), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

struct SmithForm {
  std::size_t rank = 0;
  std::vector<Integer> divisors;  // nonzero diagonal entries d1 | d2 | ... (positive)
};

/// Smith normal form of an integer matrix (rows x cols), computed by exact elimination.
inline SmithForm smith_normal_form(IntMatrix m) {
  SmithForm out;
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  std::size_t t = 0;
  while (t < rows && t < cols) {
    // Pivot: smallest nonzero absolute value in the trailing block.
    std::optional<std::pair<std::size_t, std::size_t>> piv;
    for (std::size_t i = t; i < rows; ++i)
      for (std::size_t j = t; j < cols; ++j)
        if (m[i][j] != 0 && (!piv || boost::multiprecision::abs(m[i][j]) <
                                         boost::multiprecision::abs(m[piv->first][piv->second])))
          piv = {{i, j}};
    if (!piv) break;
    std::swap(m[t], m[piv->first]);
    for (auto& row : m) std::swap(row[t], row[piv->second]);

    bool clean = false;
    while (!clean) {
      clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (m[i][t] == 0) continue;
        Integer q = m[i][t] / m[t][t];
        for (std::size_t j = t; j < cols; ++j) m[i][j] -= q * m[t][j];
        if (m[i][t] != 0) {
          std::swap(m[i], m[t]);
          clean = false;
        }
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (m[t][j] == 0) continue;
        Integer q = m[t][j] / m[t][t];
        for (std::size_t i = t; i < rows; ++i) m[i][j] -= q * m[i][t];
        if (m[t][j] != 0) {
          for (auto& row : m) std::swap(row[t], row[j]);
          clean = false;
        }
      }
      if (clean) {
        // Enforce divisibility of the remaining block by the pivot.
        for (std::size_t i = t + 1; i < rows && clean; ++i)
          for (std::size_t j = t + 1; j < cols; ++j)
            if (m[i][j] % m[t][t] != 0) {
              for (std::size_t c = t; c < cols; ++c) m[t][c] += m[i][c];
              clean = false;
              break;
            }
      }
    }
    out.divisors.push_back(boost::multiprecision::abs(m[t][t]));
    ++t;
  }
  out.rank = out.divisors.size();
  return out;
}

}  // namespace tropicurve
