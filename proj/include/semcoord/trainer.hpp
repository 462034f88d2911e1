#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semcoord/corpus.hpp"
#include "semcoord/embedding.hpp"

namespace semcoord {

enum class Architecture { skip_gram, cbow };

std::string to_string(Architecture a);
Architecture parse_architecture(std::string_view s);

struct TrainingConfig {
  int dimension = 100;
  std::uint64_t min_count = 3;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  double subsample = 1e-3;
  Architecture architecture = Architecture::skip_gram;
  std::uint64_t seed = 0;
  /// Threads sharing the parameter matrices. Output is reproducible only at 1.
  int workers = 1;

  void validate() const;
  /// Stable "key=value;..." rendering of every field, used for hashing.
  std::string canonical() const;
  std::string hash() const;
};

/// A fixed (center, context, negatives) triple for measuring the sampled
/// negative-sampling objective.
struct ProbeSample {
  std::uint32_t center = 0;
  std::uint32_t context = 0;
  std::vector<std::uint32_t> negatives;
};

/// Documents as vocabulary ids; out-of-vocabulary tokens are dropped.
std::vector<std::vector<std::uint32_t>> encode_documents(
    std::span<const std::vector<std::string>> documents, const Vocabulary& vocab);

/// Word2vec-style negative-sampling trainer over one token stream. Parameters
/// are held by value; `run_epoch` may be called up to `config.epochs` times.
class NegativeSamplingTrainer {
 public:
  NegativeSamplingTrainer(Vocabulary vocab, std::vector<std::vector<std::uint32_t>> documents,
                          TrainingConfig config);

  void run_epoch();
  int epochs_done() const noexcept { return epochs_done_; }
  double current_learning_rate() const noexcept;

  /// Mean of -log s(u.v) - sum log s(-u.n) over the samples.
  double probe_loss(std::span<const ProbeSample> samples) const;
  /// Probe samples drawn from `documents` with the trainer's noise distribution.
  std::vector<ProbeSample> make_probe_batch(std::span<const std::vector<std::uint32_t>> documents,
                                            std::size_t count, std::uint64_t seed) const;

  /// Input-side vectors.
  EmbeddingMatrix embedding(Provenance provenance) const;

 private:
  struct Rng {
    std::uint64_t state;
    std::uint64_t next() {
      state = state * 25214903917ULL + 11ULL;
      return state;
    }
    float uniform() { return static_cast<float>(next() & 0xFFFF) / 65536.0f; }
  };

  void train_range(std::size_t begin, std::size_t end, std::uint64_t seed);
  void train_document(const std::vector<std::uint32_t>& doc, Rng& rng, std::vector<std::uint32_t>& kept,
                      std::vector<float>& work, std::vector<float>& hidden);
  void update_pair(std::uint32_t input, std::uint32_t output, float alpha, Rng& rng,
                   std::vector<float>& work);
  std::uint32_t draw_negative(Rng& rng) const;
  float sigmoid(float x) const;

  Vocabulary vocab_;
  std::vector<std::vector<std::uint32_t>> documents_;
  TrainingConfig config_;
  std::size_t dim_;
  std::vector<float> input_;
  std::vector<float> output_;
  // alias tables for the unigram^0.75 noise distribution
  std::vector<std::uint32_t> alias_threshold_;
  std::vector<std::uint32_t> alias_index_;
  std::vector<std::uint32_t> keep_threshold_;  // subsampling keep probability * 2^16
  std::vector<float> sigmoid_table_;
  std::uint64_t train_words_ = 0;
  std::uint64_t words_done_ = 0;
  int epochs_done_ = 0;
};

/// Builds the vocabulary (config.min_count), trains config.epochs epochs and
/// returns the input-side vectors. Throws naming `slice_label` when nothing
/// survives vocabulary filtering.
EmbeddingMatrix train_embedding(std::span<const std::vector<std::string>> documents,
                                const TrainingConfig& config, const std::string& slice_label);

}  // namespace semcoord
