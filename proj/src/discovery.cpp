#include "semcoord/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "semcoord/error.hpp"

namespace semcoord {

namespace {

std::vector<double> unit_row(std::span<const float> row) {
  std::vector<double> v(row.begin(), row.end());
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw Error("neighbour search: zero vector in embedding");
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

NeighborSpace::NeighborSpace(std::span<const EmbeddingMatrix> aligned, const EmbeddingMatrix* base,
                             std::size_t universe_size) {
  if (aligned.empty()) throw Error("neighbour space: no slices");
  dim_ = aligned.front().dim();
  for (const auto& e : aligned)
    if (e.dim() != dim_) throw Error("neighbour space: slices differ in dimension");

  const EmbeddingMatrix& ranking = base ? *base : aligned.front();
  for (std::size_t i = 0; i < ranking.rows(); ++i) {
    if (universe_size != 0 && universe_.size() >= universe_size) break;
    const auto& w = ranking.vocabulary().word(i);
    if (std::all_of(aligned.begin(), aligned.end(), [&](const auto& e) { return e.find(w).has_value(); }))
      universe_.push_back(w);
  }

  std::vector<std::size_t> order(universe_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return universe_[a] < universe_[b]; });
  for (auto i : order) sorted_universe_.push_back(universe_[i]);
  sorted_to_rank_ = std::move(order);

  for (const auto& e : aligned) {
    std::vector<double> rows;
    rows.reserve(universe_.size() * dim_);
    for (const auto& w : universe_) {
      const auto u = unit_row(e.vector(w));
      rows.insert(rows.end(), u.begin(), u.end());
    }
    slices_.push_back(std::move(rows));
  }
}

std::size_t NeighborSpace::index_of(std::string_view word) const {
  const auto it = std::lower_bound(sorted_universe_.begin(), sorted_universe_.end(), word);
  if (it == sorted_universe_.end() || *it != word)
    throw Error("word '" + std::string(word) + "' is missing from at least one slice");
  return sorted_to_rank_[static_cast<std::size_t>(it - sorted_universe_.begin())];
}

bool NeighborSpace::contains(std::string_view word) const {
  return std::binary_search(sorted_universe_.begin(), sorted_universe_.end(), word);
}

std::vector<std::string> NeighborSpace::neighbors(std::size_t t, std::string_view word, std::size_t k) const {
  if (k < 1) throw Error("neighbour search: k must be at least 1");
  const std::size_t q = index_of(word);
  const auto& rows = slices_.at(t);
  const double* qv = rows.data() + q * dim_;
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(universe_.size());
  for (std::size_t i = 0; i < universe_.size(); ++i) {
    if (i == q) continue;
    const double* v = rows.data() + i * dim_;
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += qv[j] * v[j];
    scored.emplace_back(s, i);
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    [&](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : universe_[a.second] < universe_[b.second];
                    });
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(universe_[scored[i].second]);
  return out;
}

NeighborTimeline neighbor_timeline(const NeighborSpace& space, std::string_view word, std::size_t k) {
  NeighborTimeline tl{std::string(word), k, {}, {}};
  for (std::size_t t = 0; t < space.slice_count(); ++t) {
    tl.neighbors.push_back(space.neighbors(t, word, k));
    tl.deficient.push_back(tl.neighbors.back().size() < k);
  }
  return tl;
}

std::vector<std::string> changing_neighbor_candidates(const NeighborSpace& space, std::size_t pool_size,
                                                      std::size_t k) {
  if (pool_size < 1) throw Error("candidate pool size must be at least 1");
  std::vector<std::string> out;
  const auto& ranked = space.ranked_words();
  const std::size_t pool = std::min(pool_size, ranked.size());
  for (std::size_t i = 0; i < pool; ++i) {
    const auto tl = neighbor_timeline(space, ranked[i], k);
    std::set<std::string> first(tl.neighbors.front().begin(), tl.neighbors.front().end());
    const bool changing = std::any_of(tl.neighbors.begin() + 1, tl.neighbors.end(), [&](const auto& n) {
      return std::set<std::string>(n.begin(), n.end()) != first;
    });
    if (changing) out.push_back(ranked[i]);
  }
  return out;
}

double stability_score(const NeighborTimeline& tl) {
  if (tl.neighbors.empty() || tl.k == 0) throw Error("stability_score: empty timeline");
  std::unordered_map<std::string, std::size_t> occurrences;
  for (const auto& n : tl.neighbors)
    for (const auto& w : n) ++occurrences[w];
  std::vector<std::size_t> counts;
  counts.reserve(occurrences.size());
  for (const auto& [w, c] : occurrences) counts.push_back(c);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  const std::size_t take = std::min(tl.k, counts.size());
  const double sum = static_cast<double>(std::accumulate(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(take), std::size_t{0}));
  return sum / (static_cast<double>(tl.k) * static_cast<double>(tl.neighbors.size()));
}

double stability_score(const NeighborSpace& space, std::string_view word, std::size_t k) {
  return stability_score(neighbor_timeline(space, word, k));
}

StabilityReport compare_stability(const NeighborSpace& space, std::span<const std::string> targets,
                                  std::span<const std::string> coordinates, std::span<const std::size_t> ks) {
  if (targets.empty() || coordinates.empty()) throw Error("compare_stability: both populations must be non-empty");
  for (const auto& t : targets)
    if (std::find(coordinates.begin(), coordinates.end(), t) != coordinates.end())
      throw ValidationError("compare_stability: '" + t + "' is in both populations");
  StabilityReport report;
  for (const auto k : ks) {
    std::vector<double> target_scores;
    std::vector<double> coordinate_scores;
    for (const auto& w : targets) {
      target_scores.push_back(stability_score(space, w, k));
      report.rows.push_back({w, "target", k, target_scores.back()});
    }
    for (const auto& w : coordinates) {
      coordinate_scores.push_back(stability_score(space, w, k));
      report.rows.push_back({w, "coordinate", k, coordinate_scores.back()});
    }
    const auto mean = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    report.summaries.push_back({k, mean(target_scores), mean(coordinate_scores),
                                mann_whitney_u(target_scores, coordinate_scores)});
  }
  return report;
}

std::string format_stability_report(const StabilityReport& report) {
  std::string out = "word,population,K,score\n";
  for (const auto& r : report.rows)
    out += r.word + "," + r.population + "," + std::to_string(r.k) + "," + format_real(r.score) + "\n";
  out += "# summary: K,mean_target,mean_coordinate,U,p_value,method\n";
  for (const auto& s : report.summaries) {
    out += "# " + std::to_string(s.k) + "," + format_real(s.mean_target) + "," + format_real(s.mean_coordinate) +
           "," + format_real(s.test.statistic) + "," + format_real(s.test.p_value) + "," +
           (s.test.method == TestMethod::exact ? "exact" : "normal-approximation") + "\n";
  }
  return out;
}

}  // namespace semcoord
