#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semcoord/alignment.hpp"
#include "semcoord/corpus.hpp"
#include "semcoord/trainer.hpp"

namespace semcoord {

struct RunConfig {
  std::filesystem::path manifest;
  /// Defaults to the span of manifest years.
  std::optional<YearRange> year_range;
  std::string slicing_scheme = "1-year";
  TrainingConfig training;  // training.seed is ignored; `seeds` drives runs
  std::vector<std::uint64_t> seeds = {0, 7, 13, 73};
  std::size_t anchor_count = 5000;
  double epsilon = 1e-6;
  AlignmentMode alignment_mode = AlignmentMode::relaxed;
  std::filesystem::path triples;
  std::vector<std::size_t> stability_k = {5, 10, 20};
  std::filesystem::path output_dir = "semcoord-out";
  std::size_t candidate_pool = 1000;
  std::size_t candidate_k = 10;
  /// Neighbour searches are restricted to this many base-frequency words.
  std::size_t neighbor_universe = 5000;
  std::vector<std::string> ablation_schemes = {"2-year", "3-year"};
  /// Concurrent (slice, seed) training jobs.
  int jobs = 1;

  /// Throws ValidationError on bad values or missing input paths.
  void validate() const;
  /// Every field that can change a numeric result, "key=value;" joined.
  std::string canonical() const;
  std::string hash() const;
};

/// JSON object whose keys mirror the RunConfig field names; "training" is a
/// nested object with the TrainingConfig field names. Unknown keys are
/// rejected. Relative paths resolve against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
std::string dump_run_config(const RunConfig& config);

}  // namespace semcoord
