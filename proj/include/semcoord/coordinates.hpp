#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semcoord/embedding.hpp"
#include "semcoord/numerics.hpp"

namespace semcoord {

enum class Category { research_interest, language_usage, academic_activity, unclassified };

std::string to_string(Category c);
Category parse_category(std::string_view s);

/// A target word measured along the axis between coordinate words c1 and c2.
struct TargetCoordinate {
  std::string target;
  std::string c1;
  std::string c2;
  Category category = Category::unclassified;

  /// "target,c1,c2": identity of the triple independent of its category.
  std::string key() const { return target + "," + c1 + "," + c2; }
  TargetCoordinate swapped() const { return {target, c2, c1, category}; }

  friend bool operator==(const TargetCoordinate&, const TargetCoordinate&) = default;
};

/// Throws ValidationError unless target, c1 and c2 are pairwise distinct.
void validate(const TargetCoordinate& triple);

struct TrajectoryPoint {
  std::string slice_label;
  double d_rel = 0.0;
  double cos_c1 = 0.0;
  double cos_c2 = 0.0;
  bool clamped_c1 = false;
  bool clamped_c2 = false;
};

struct TrajectorySeries {
  std::vector<TrajectoryPoint> points;
  double epsilon = 1e-6;

  std::size_t clamp_count() const;
  std::vector<double> values() const;
};

/// d_rel(t) = log max(eps, cos(w, c1)) - log max(eps, cos(w, c2)) per slice.
/// Throws listing every (word, slice) pair missing from the vocabularies.
TrajectorySeries coordinate_position(std::span<const EmbeddingMatrix> aligned,
                                     const TargetCoordinate& triple, double epsilon);

/// Least-squares line through (t, d_rel(t)) with t = 1..T.
LineFit fit_trend(const TrajectorySeries& series);

enum class Direction { toward_c1, toward_c2 };
std::string to_string(Direction d);

struct TrendFit {
  double slope = 0.0;  // signed mean slope
  double intercept = 0.0;
  std::vector<double> per_seed_slopes;
  double slope_mean = 0.0;
  double slope_std = 0.0;  // sample standard deviation, 0 for a single seed
  Direction direction = Direction::toward_c2;
  bool stable = false;

  double magnitude() const;
};

/// Mean and sample standard deviation of the per-seed slopes; direction is
/// toward c1 iff the mean is positive. `stable` reports per-seed sign agreement.
TrendFit aggregate_seeds(std::span<const LineFit> fits);

struct StabilityVerdict {
  bool stable = false;
  Direction direction = Direction::toward_c2;
  double mean_slope = 0.0;
};

/// Stable iff every configuration's slope has the sign of their mean.
StabilityVerdict classify_stability(std::span<const double> configuration_slopes);

struct SignPreservation {
  double rate = 0.0;
  std::size_t agreeing = 0;
  std::size_t total = 0;
  double rate_excluding_unstable = 0.0;
  std::size_t agreeing_excluding_unstable = 0;
  std::size_t total_excluding_unstable = 0;
};

/// Fraction of triples (keyed by TargetCoordinate::key) whose slope signs agree.
SignPreservation sign_preservation_rate(const std::map<std::string, double>& scheme_a,
                                        const std::map<std::string, double>& scheme_b,
                                        const std::set<std::string>& unstable = {});

/// "target,c1,c2,category" lines; '#' comments and blank lines are ignored,
/// as is a leading "target,c1,c2,category" header.
std::vector<TargetCoordinate> parse_triples(std::string_view text);
std::vector<TargetCoordinate> read_triples(const std::filesystem::path& path);
std::string format_triples(std::span<const TargetCoordinate> triples);

}  // namespace semcoord
