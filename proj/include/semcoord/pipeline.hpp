#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semcoord/alignment.hpp"
#include "semcoord/config.hpp"
#include "semcoord/coordinates.hpp"
#include "semcoord/corpus.hpp"
#include "semcoord/discovery.hpp"
#include "semcoord/embedding.hpp"

namespace semcoord {

/// Files named "<kind>-<digest prefix>.<ext>" under one directory, each with a
/// ".meta.json" sidecar recording the full key digest and the file's SHA-256.
/// A sidecar that disagrees with either is stale and the entry is dropped.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path path_for(const std::string& kind, const std::string& key_digest, const std::string& ext) const;

  /// Path of a valid entry, or nullopt (removing a stale one).
  std::optional<std::filesystem::path> lookup(const std::string& kind, const std::string& key_digest,
                                              const std::string& ext) const;
  /// Runs `write` against a temporary path, then publishes file and sidecar.
  std::filesystem::path commit(const std::string& kind, const std::string& key_digest, const std::string& ext,
                               const std::function<void(const std::filesystem::path&)>& write) const;

 private:
  std::filesystem::path dir_;
};

struct SkippedTriple {
  TargetCoordinate triple;
  std::string reason;
};

struct TripleResult {
  TargetCoordinate triple;
  std::vector<TrajectorySeries> series;  // per seed
  std::vector<LineFit> fits;             // per seed
  TrendFit trend;
  std::size_t clamp_count = 0;
};

struct AnalysisResult {
  std::string scheme;
  std::vector<std::string> slice_labels;
  std::vector<std::uint64_t> seeds;
  std::vector<TripleResult> triples;
  std::vector<SkippedTriple> skipped;
};

struct AlignmentRecord {
  std::uint64_t seed = 0;
  std::string slice_label;
  std::size_t anchors = 0;
  bool shortfall = false;
  double residual = 0.0;
  std::filesystem::path file;
};

struct RunCounters {
  std::size_t trained = 0;  // embeddings trained by this process
  std::size_t reused = 0;   // embeddings loaded from the artifact store
  std::size_t fitted = 0;   // projections fitted
  std::size_t projections_reused = 0;
};

/// Lazily evaluated stage graph over one RunConfig. Every stage result is
/// memoised in memory and every expensive artifact (slices, embeddings,
/// projections) is persisted in the artifact store under `output_dir/cache`.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config, std::ostream* log = nullptr);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const RunConfig& config() const noexcept { return config_; }
  const ArtifactStore& store() const noexcept { return store_; }
  const RunCounters& counters() const noexcept { return counters_; }
  YearRange year_range();

  const std::vector<TargetCoordinate>& triples();
  const TimeSlicedCorpus& corpus(const std::string& scheme);
  const TimeSlicedCorpus& corpus() { return corpus(config_.slicing_scheme); }

  const EmbeddingMatrix& slice_embedding(const std::string& scheme, std::size_t slice, std::uint64_t seed);
  const EmbeddingMatrix& base_embedding(std::uint64_t seed);
  /// Ensures every (slice, seed) and base embedding of `scheme` exists,
  /// training missing ones up to config.jobs at a time.
  void train_all(const std::string& scheme);

  const std::vector<EmbeddingMatrix>& aligned(const std::string& scheme, std::uint64_t seed);
  const std::vector<AlignmentRecord>& alignment_records() const noexcept { return alignment_records_; }

  const AnalysisResult& analyze(const std::string& scheme);
  const AnalysisResult& analyze() { return analyze(config_.slicing_scheme); }

  /// Neighbour space over the first seed's aligned slices.
  const NeighborSpace& neighbor_space();

  /// Embedding of the documents whose acceptance flag equals `accepted`.
  const EmbeddingMatrix& acceptance_embedding(bool accepted);

  /// Every store entry this pipeline produced or reused.
  std::vector<std::filesystem::path> artifacts() const;

  void log(const std::string& line) const;

 private:
  struct State;

  EmbeddingMatrix train_or_load(const std::vector<std::vector<std::string>>& docs, const std::string& token_digest,
                                const std::string& label, std::uint64_t seed);
  std::string embedding_key(const std::string& token_digest, std::uint64_t seed) const;

  RunConfig config_;
  std::ostream* log_;
  ArtifactStore store_;
  RunCounters counters_;
  std::vector<AlignmentRecord> alignment_records_;
  std::unique_ptr<State> state_;
};

struct RunReport {
  std::string config_hash;
  RunCounters counters;
  /// Paths relative to the output directory, in writing order.
  std::vector<std::filesystem::path> reports;
  std::vector<std::string> warnings;
};

/// Ingest, train, align, analyze, discover, score stability and plot; writes
/// every report under `config.output_dir`. Stage failures surface as
/// StageError; bad configuration as ValidationError before any work.
RunReport run_pipeline(const RunConfig& config, std::ostream* log = nullptr);

// --- individual report writers, shared by the CLI subcommands --------------

std::string format_trend_report(const AnalysisResult& analysis);
std::string format_trajectories(const AnalysisResult& analysis);
std::string format_fits(const AnalysisResult& analysis);
std::string format_skipped(const AnalysisResult& analysis);
std::string format_alignment(const std::vector<AlignmentRecord>& records, const std::filesystem::path& relative_to);

/// Unique targets and the coordinate words that are not also targets,
/// restricted to words in the neighbour universe.
StabilityReport run_stability(Pipeline& pipeline, std::vector<std::string>* dropped = nullptr);
std::vector<std::string> run_discovery(Pipeline& pipeline);

struct SchemePreservation {
  std::string scheme;
  SignPreservation rate;
};

struct SlicingAblation {
  std::vector<std::string> schemes;  // base scheme first
  std::vector<std::string> keys;     // triples usable under every scheme
  std::map<std::string, std::vector<double>> mean_slopes;  // key -> per scheme
  std::map<std::string, bool> stable;                      // across seeds x schemes
  std::vector<SchemePreservation> preservation;            // one per alternative scheme
};

SlicingAblation ablate_slicing(Pipeline& pipeline, const std::vector<std::string>& alternative_schemes);
std::string format_slicing_ablation(const SlicingAblation& ablation);

struct AcceptanceRow {
  TargetCoordinate triple;
  double ac_c1 = 0.0, nac_c1 = 0.0;
  double ac_c2 = 0.0, nac_c2 = 0.0;
  double ac_ratio = 0.0, nac_ratio = 0.0;
};

struct AcceptanceAblation {
  std::vector<AcceptanceRow> rows;
  std::vector<SkippedTriple> skipped;
  TestResult c1_test;
  TestResult c2_test;
  TestResult ratio_test;
};

/// Trains accepted / not-accepted embeddings with the first seed and runs
/// Wilcoxon signed-rank tests on the paired per-triple cosines and on their
/// ratio (cosines clamped at epsilon).
AcceptanceAblation ablate_acceptance(Pipeline& pipeline);
std::string format_acceptance_ablation(const AcceptanceAblation& ablation);

/// Trajectory and PCA plots for `keys` (all usable triples when empty).
/// Returns paths relative to the output directory. Throws on unknown keys.
std::vector<std::filesystem::path> emit_plots(Pipeline& pipeline, const std::vector<std::string>& keys = {});

std::string render_trajectory_plot(const AnalysisResult& analysis, const TripleResult& result);
std::string render_pca_plot(Pipeline& pipeline, const TripleResult& result);

/// Writes `contents` to output_dir/relative, creating parent directories.
void write_report(const std::filesystem::path& output_dir, const std::filesystem::path& relative,
                  const std::string& contents);

}  // namespace semcoord
