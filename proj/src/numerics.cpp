#include "semcoord/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "semcoord/error.hpp"

namespace semcoord {

namespace {

// Sum of t^3 - t over groups of tied values.
double tie_term(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    term += t * t * t - t;
    i = j;
  }
  return term;
}

double two_sided_normal(double z) { return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0))); }

std::vector<std::int64_t> doubled_ranks(std::span<const double> values) {
  const auto r = midranks(values);
  std::vector<std::int64_t> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = std::llround(2.0 * r[i]);
  return out;
}

std::vector<double> nonzero(std::span<const double> d) {
  std::vector<double> out;
  for (double x : d)
    if (x != 0.0) out.push_back(x);
  return out;
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
    i = j;
  }
  return ranks;
}

TestResult mann_whitney_u_approx(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("mann_whitney_u: both samples must be non-empty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  const double u = rank_sum - n1 * (n1 + 1.0) / 2.0;
  const double mean = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term(pooled) / (n * (n - 1.0)));
  TestResult r{u, 1.0, TestMethod::normal_approximation, a.size(), b.size(), false};
  if (var > 0.0) r.p_value = two_sided_normal(std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var));
  return r;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("mann_whitney_u: both samples must be non-empty");
  const std::size_t n = a.size() + b.size();
  if (n > kMannWhitneyExactLimit) return mann_whitney_u_approx(a, b);

  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto r2 = doubled_ranks(pooled);
  const auto n1 = static_cast<std::int64_t>(a.size());
  const auto n2 = static_cast<std::int64_t>(b.size());
  // doubled U = doubled rank sum - n1 (n1 + 1); its null mean is n1 n2
  const auto doubled_u = [&](const std::vector<char>& in_first) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (in_first[i]) s += r2[i];
    return s - n1 * (n1 + 1);
  };
  std::vector<char> mask(n, 0);
  std::fill(mask.begin(), mask.begin() + n1, 1);
  const std::int64_t observed = doubled_u(mask);
  const std::int64_t deviation = std::abs(observed - n1 * n2);

  std::uint64_t extreme = 0;
  std::uint64_t total = 0;
  std::vector<char> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + n1, 1);
  do {
    ++total;
    if (std::abs(doubled_u(labels) - n1 * n2) >= deviation) ++extreme;
  } while (std::prev_permutation(labels.begin(), labels.end()));

  return {static_cast<double>(observed) / 2.0, static_cast<double>(extreme) / static_cast<double>(total),
          TestMethod::exact, a.size(), b.size(), false};
}

TestResult wilcoxon_signed_rank_approx(std::span<const double> differences) {
  if (differences.empty()) throw Error("wilcoxon_signed_rank: no pairs");
  const auto d = nonzero(differences);
  TestResult r{0.0, 1.0, TestMethod::normal_approximation, d.size(), 0, d.empty()};
  if (d.empty()) return r;
  std::vector<double> mags(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mags[i] = std::abs(d[i]);
  const auto ranks = midranks(mags);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0) w_plus += ranks[i];
  const double n = static_cast<double>(d.size());
  const double total = n * (n + 1.0) / 2.0;
  const double mean = total / 2.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(mags) / 48.0;
  r.statistic = std::min(w_plus, total - w_plus);
  if (var > 0.0) r.p_value = two_sided_normal((w_plus - mean) / std::sqrt(var));
  return r;
}

TestResult wilcoxon_signed_rank(std::span<const double> differences) {
  if (differences.empty()) throw Error("wilcoxon_signed_rank: no pairs");
  const auto d = nonzero(differences);
  if (d.empty()) return {0.0, 1.0, TestMethod::exact, 0, 0, true};
  if (d.size() > kWilcoxonExactLimit) return wilcoxon_signed_rank_approx(differences);

  std::vector<double> mags(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mags[i] = std::abs(d[i]);
  const auto r2 = doubled_ranks(mags);
  const std::int64_t total = std::accumulate(r2.begin(), r2.end(), std::int64_t{0});
  std::int64_t w_plus = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0) w_plus += r2[i];

  // null distribution of the doubled W+ over all 2^n sign assignments
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
  counts[0] = 1;
  std::int64_t reach = 0;
  for (const auto r : r2) {
    for (std::int64_t s = reach; s >= 0; --s)
      if (counts[static_cast<std::size_t>(s)]) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
    reach += r;
  }
  const std::int64_t deviation = std::abs(2 * w_plus - total);
  std::uint64_t extreme = 0;
  for (std::int64_t s = 0; s <= total; ++s)
    if (std::abs(2 * s - total) >= deviation) extreme += counts[static_cast<std::size_t>(s)];
  const double patterns = std::ldexp(1.0, static_cast<int>(d.size()));
  return {static_cast<double>(std::min(w_plus, total - w_plus)) / 2.0,
          std::min(1.0, static_cast<double>(extreme) / patterns), TestMethod::exact, d.size(), 0, false};
}

LineFit least_squares_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error("least_squares_line: xs and ys differ in length");
  if (xs.size() < 2) throw Error("least_squares_line: need at least two points");
  // single-pass co-moment accumulation
  double mean_x = 0.0;
  double mean_y = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double dx = xs[i] - mean_x;
    mean_x += dx / k;
    mean_y += (ys[i] - mean_y) / k;
    sxx += dx * (xs[i] - mean_x);
    sxy += dx * (ys[i] - mean_y);
  }
  if (sxx == 0.0) throw Error("least_squares_line: all x values are equal");
  const double slope = sxy / sxx;
  return {slope, mean_y - slope * mean_x};
}

Pca2d pca_2d(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw Error("pca_2d: need at least two vectors");
  const std::size_t dim = rows.front().size();
  if (dim < 1) throw Error("pca_2d: vectors are empty");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) throw Error("pca_2d: vectors differ in dimension");
    for (std::size_t j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(rows.size() - 1);
  const double total = cov.trace();
  if (!(total > 0.0)) throw Error("pca_2d: zero total variance");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("pca_2d: eigendecomposition failed");
  const Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  Pca2d out;
  out.total_variance = total;
  out.eigenvalues.assign(values.data(), values.data() + values.size());
  const Eigen::Index comps = std::min<Eigen::Index>(2, vectors.cols());
  for (Eigen::Index c = 0; c < 2; ++c) {
    if (c >= comps) {
      out.components[static_cast<std::size_t>(c)].assign(dim, 0.0);
      continue;
    }
    auto v = vectors.col(c);
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (std::abs(v(j)) > 1e-12 * scale) {
        if (v(j) < 0) v = -v;
        break;
      }
    }
    out.components[static_cast<std::size_t>(c)].assign(v.data(), v.data() + v.size());
    out.explained[static_cast<std::size_t>(c)] = std::max(0.0, values(c)) / total;
  }
  out.points.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index c = 0; c < comps; ++c)
      out.points[i][static_cast<std::size_t>(c)] = x.row(static_cast<Eigen::Index>(i)).dot(vectors.col(c));
  }
  return out;
}

}  // namespace semcoord
