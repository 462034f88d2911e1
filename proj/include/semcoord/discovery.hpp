#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semcoord/embedding.hpp"
#include "semcoord/numerics.hpp"

namespace semcoord {

/// Aligned per-slice embeddings restricted to a shared neighbour universe:
/// the words present in every slice, optionally capped to the most frequent
/// `universe_size` words of the base vocabulary. Rows are unit-normalised
/// once so neighbour queries are plain dot products.
class NeighborSpace {
 public:
  NeighborSpace(std::span<const EmbeddingMatrix> aligned, const EmbeddingMatrix* base = nullptr,
                std::size_t universe_size = 0);

  std::size_t slice_count() const noexcept { return slices_.size(); }
  const std::vector<std::string>& universe() const noexcept { return universe_; }
  bool contains(std::string_view word) const;
  /// Universe words ordered by base frequency (the candidate pool order).
  const std::vector<std::string>& ranked_words() const noexcept { return universe_; }

  /// k nearest universe words to `word` in slice t, closest first, ties
  /// lexicographic, the word itself excluded.
  std::vector<std::string> neighbors(std::size_t t, std::string_view word, std::size_t k) const;

 private:
  std::size_t index_of(std::string_view word) const;

  std::vector<std::string> universe_;
  std::vector<std::string> sorted_universe_;  // for lookup
  std::vector<std::size_t> sorted_to_rank_;
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> slices_;  // per slice, universe-size x dim unit rows
};

struct NeighborTimeline {
  std::string word;
  std::size_t k = 0;
  std::vector<std::vector<std::string>> neighbors;  // one set per slice
  std::vector<bool> deficient;                      // slice had fewer than k candidates
};

NeighborTimeline neighbor_timeline(const NeighborSpace& space, std::string_view word, std::size_t k);

/// Among the `pool_size` most frequent universe words, those whose top-k
/// neighbour sets are not identical in every slice.
std::vector<std::string> changing_neighbor_candidates(const NeighborSpace& space, std::size_t pool_size,
                                                      std::size_t k);

/// Over the multiset union of the per-slice neighbour sets, the mean of the
/// k highest occurrence counts, each divided by the slice count T.
double stability_score(const NeighborTimeline& timeline);
double stability_score(const NeighborSpace& space, std::string_view word, std::size_t k);

struct StabilityRow {
  std::string word;
  std::string population;  // "target" or "coordinate"
  std::size_t k = 0;
  double score = 0.0;
};

struct StabilitySummary {
  std::size_t k = 0;
  double mean_target = 0.0;
  double mean_coordinate = 0.0;
  TestResult test;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  std::vector<StabilitySummary> summaries;
};

/// Per k, scores both populations and runs a two-sided Mann-Whitney test.
StabilityReport compare_stability(const NeighborSpace& space, std::span<const std::string> targets,
                                  std::span<const std::string> coordinates, std::span<const std::size_t> ks);

/// CSV "word,population,K,score" followed by a '#'-prefixed summary block.
std::string format_stability_report(const StabilityReport& report);

}  // namespace semcoord
