#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace semcoord {

enum class TestMethod { exact, normal_approximation };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::exact;
  std::size_t n1 = 0;  // first sample size, or number of non-zero pairs
  std::size_t n2 = 0;
  /// Wilcoxon only: every difference was zero.
  bool degenerate = false;
};

/// Largest pooled size for which the Mann-Whitney p-value is enumerated exactly.
inline constexpr std::size_t kMannWhitneyExactLimit = 14;
/// Largest number of non-zero differences enumerated exactly by Wilcoxon.
inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> values);

/// Two-sided Mann-Whitney U test. `statistic` is U for the first sample.
/// Exact permutation p-value when n1 + n2 <= 14, otherwise the normal
/// approximation with tie and continuity corrections.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);
TestResult mann_whitney_u_approx(std::span<const double> a, std::span<const double> b);

/// Two-sided Wilcoxon signed-rank test on paired differences. Zeros are
/// dropped; `statistic` is min(W+, W-). Exact when at most 20 non-zero
/// differences remain, otherwise normal approximation with tie correction.
TestResult wilcoxon_signed_rank(std::span<const double> differences);
TestResult wilcoxon_signed_rank_approx(std::span<const double> differences);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit least_squares_line(std::span<const double> xs, std::span<const double> ys);

struct Pca2d {
  std::vector<std::array<double, 2>> points;
  /// Loadings of the two leading components, each of length D.
  std::array<std::vector<double>, 2> components;
  /// Eigenvalues of the covariance matrix, descending (all D of them).
  std::vector<double> eigenvalues;
  std::array<double, 2> explained{};
  double total_variance = 0.0;
};

/// Projects mean-centred rows onto the two leading covariance eigenvectors.
/// Each component is signed so its first non-zero loading is positive.
Pca2d pca_2d(const std::vector<std::vector<double>>& rows);

}  // namespace semcoord
