#pragma once

// Reference computations used to check the library. Each one is written from
// the textbook definition and shares no code with src/.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

/// U of sample a by direct pair counting: 1 per a_i > b_j, 1/2 per tie.
inline double pair_count_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

/// Two-sided exact Mann-Whitney p by listing every split of the pooled
/// values into groups of the original sizes (bitmask enumeration).
inline double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  const double centre = static_cast<double>(a.size() * b.size()) / 2.0;
  const double observed = std::abs(pair_count_u(a, b) - centre);
  std::uint64_t extreme = 0, total = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) (mask >> i & 1u ? x : y).push_back(pooled[i]);
    ++total;
    if (std::abs(pair_count_u(x, y) - centre) >= observed) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

/// Rank of v[i] among v counting ties as their average position.
inline double average_rank(const std::vector<double>& v, std::size_t i) {
  double below = 0.0, equal = 0.0;
  for (double x : v) {
    if (x < v[i]) below += 1.0;
    if (x == v[i]) equal += 1.0;
  }
  return below + (equal + 1.0) / 2.0;
}

/// Two-sided exact Wilcoxon p over every sign pattern of the non-zero
/// differences; W+ recomputed from scratch for each pattern.
inline double wilcoxon_p(const std::vector<double>& d) {
  std::vector<double> mags;
  for (double x : d)
    if (x != 0.0) mags.push_back(std::abs(x));
  const std::size_t n = mags.size();
  if (n == 0) return 1.0;
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[i] = average_rank(mags, i);
  const double total = static_cast<double>(n * (n + 1)) / 2.0;
  double w_obs = 0.0;
  for (std::size_t i = 0, j = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) continue;
    if (d[i] > 0) w_obs += rank[j];
    ++j;
  }
  const double observed = std::abs(w_obs - total / 2.0);
  std::uint64_t extreme = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) w += rank[i];
    if (std::abs(w - total / 2.0) >= observed) ++extreme;
  }
  return static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n));
}

/// Two-pass closed form: slope = sum (x - mx)(y - my) / sum (x - mx)^2.
inline std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = num / den;
  return {slope, my - slope * mx};
}

using Matrix = std::vector<std::vector<double>>;

/// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues and
/// eigenvectors (as columns of the second member).
inline std::pair<std::vector<double>, Matrix> jacobi_eigen(Matrix a) {
  const std::size_t n = a.size();
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i][i];
  return {values, v};
}

}  // namespace oracle
