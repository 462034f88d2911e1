#include "semcoord/trainer.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "semcoord/error.hpp"
#include "semcoord/hashing.hpp"

namespace semcoord {

namespace {

constexpr float kMaxExp = 6.0f;
constexpr int kSigmoidTableSize = 1000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

float dot(const float* a, const float* b, std::size_t n) {
  // fixed 8-lane split: summation order is part of the determinism contract
  std::array<float, 8> acc{};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Architecture a) { return a == Architecture::skip_gram ? "skip-gram" : "cbow"; }

Architecture parse_architecture(std::string_view s) {
  if (s == "skip-gram" || s == "skipgram" || s == "sg") return Architecture::skip_gram;
  if (s == "cbow" || s == "continuous-bag-of-words") return Architecture::cbow;
  throw ValidationError("unknown architecture '" + std::string(s) + "'");
}

void TrainingConfig::validate() const {
  if (dimension < 1) throw ValidationError("dimension must be at least 1");
  if (min_count < 1) throw ValidationError("min_count must be at least 1");
  if (window < 1) throw ValidationError("window must be at least 1");
  if (negatives < 1) throw ValidationError("negatives must be at least 1");
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (!(learning_rate > 0)) throw ValidationError("learning_rate must be positive");
  if (min_learning_rate < 0 || min_learning_rate > learning_rate)
    throw ValidationError("min_learning_rate must lie in [0, learning_rate]");
  if (subsample < 0) throw ValidationError("subsample must be non-negative");
  if (workers < 1) throw ValidationError("workers must be at least 1");
}

std::string TrainingConfig::canonical() const {
  return "dimension=" + std::to_string(dimension) + ";min_count=" + std::to_string(min_count) +
         ";window=" + std::to_string(window) + ";negatives=" + std::to_string(negatives) +
         ";epochs=" + std::to_string(epochs) + ";learning_rate=" + fmt17(learning_rate) +
         ";min_learning_rate=" + fmt17(min_learning_rate) + ";subsample=" + fmt17(subsample) +
         ";architecture=" + to_string(architecture) + ";seed=" + std::to_string(seed) +
         ";workers=" + std::to_string(workers);
}

std::string TrainingConfig::hash() const { return sha256_hex(canonical()); }

std::vector<std::vector<std::uint32_t>> encode_documents(
    std::span<const std::vector<std::string>> documents, const Vocabulary& vocab) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(documents.size());
  for (const auto& doc : documents) {
    std::vector<std::uint32_t> ids;
    ids.reserve(doc.size());
    for (const auto& tok : doc)
      if (const auto id = vocab.find(tok)) ids.push_back(static_cast<std::uint32_t>(*id));
    out.push_back(std::move(ids));
  }
  return out;
}

NegativeSamplingTrainer::NegativeSamplingTrainer(Vocabulary vocab,
                                                 std::vector<std::vector<std::uint32_t>> documents,
                                                 TrainingConfig config)
    : vocab_(std::move(vocab)),
      documents_(std::move(documents)),
      config_(config),
      dim_(static_cast<std::size_t>(config.dimension)) {
  config_.validate();
  if (vocab_.empty()) throw Error("trainer: empty vocabulary");
  const std::size_t v = vocab_.size();

  for (const auto& d : documents_) train_words_ += d.size();
  if (train_words_ == 0) throw Error("trainer: no in-vocabulary tokens");

  Rng init{splitmix64(config_.seed)};
  input_.resize(v * dim_);
  for (auto& x : input_) x = (init.uniform() - 0.5f) / static_cast<float>(dim_);
  output_.assign(v * dim_, 0.0f);

  // Frequencies come from the vocabulary when available, otherwise from the stream.
  std::vector<std::uint64_t> counts(v, 0);
  if (vocab_.has_counts()) {
    for (std::size_t i = 0; i < v; ++i) counts[i] = vocab_.count(i);
  } else {
    for (const auto& d : documents_)
      for (auto id : d) ++counts[id];
  }

  // Vose alias construction; bucket i keeps itself with probability threshold/2^32
  std::vector<double> scaled(v);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    scaled[i] = std::pow(static_cast<double>(counts[i]), 0.75);
    weight_sum += scaled[i];
  }
  if (!(weight_sum > 0)) throw Error("trainer: noise distribution has no mass");
  for (auto& s : scaled) s *= static_cast<double>(v) / weight_sum;
  alias_threshold_.assign(v, 0xFFFFFFFFu);
  alias_index_.resize(v);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::size_t i = 0; i < v; ++i) {
    alias_index_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    alias_threshold_[s] = static_cast<std::uint32_t>(std::min(std::ldexp(scaled[s], 32), 4294967295.0));
    alias_index_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }

  keep_threshold_.assign(v, 1u << 16);
  if (config_.subsample > 0) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const double threshold = config_.subsample * static_cast<double>(total);
    for (std::size_t i = 0; i < v; ++i) {
      if (counts[i] == 0) continue;
      const double c = static_cast<double>(counts[i]);
      const double keep = (std::sqrt(c / threshold) + 1.0) * threshold / c;
      keep_threshold_[i] = keep >= 1.0 ? (1u << 16) : static_cast<std::uint32_t>(keep * 65536.0);
    }
  }

  sigmoid_table_.resize(kSigmoidTableSize + 1);
  for (int i = 0; i <= kSigmoidTableSize; ++i) {
    const double x = (static_cast<double>(i) / kSigmoidTableSize * 2.0 - 1.0) * kMaxExp;
    sigmoid_table_[static_cast<std::size_t>(i)] = static_cast<float>(1.0 / (1.0 + std::exp(-x)));
  }
}

double NegativeSamplingTrainer::current_learning_rate() const noexcept {
  const double total = static_cast<double>(config_.epochs) * static_cast<double>(train_words_);
  const double progress = static_cast<double>(words_done_) / total;
  return std::max(config_.min_learning_rate,
                  config_.learning_rate - (config_.learning_rate - config_.min_learning_rate) * progress);
}

float NegativeSamplingTrainer::sigmoid(float x) const {
  if (x >= kMaxExp) return 1.0f;
  if (x <= -kMaxExp) return 0.0f;
  const int idx = static_cast<int>((x + kMaxExp) * (kSigmoidTableSize / kMaxExp / 2.0f));
  return sigmoid_table_[static_cast<std::size_t>(idx)];
}

std::uint32_t NegativeSamplingTrainer::draw_negative(Rng& rng) const {
  const std::uint64_t r = rng.next();
  const auto bucket = static_cast<std::uint32_t>((r >> 16) % alias_index_.size());
  const auto coin = static_cast<std::uint32_t>(rng.next() >> 32);
  return coin < alias_threshold_[bucket] ? bucket : alias_index_[bucket];
}

void NegativeSamplingTrainer::update_pair(std::uint32_t input, std::uint32_t output, float alpha, Rng& rng,
                                          std::vector<float>& work) {
  float* in = &input_[input * dim_];
  std::fill(work.begin(), work.end(), 0.0f);
  for (int d = 0; d <= config_.negatives; ++d) {
    std::uint32_t target = output;
    float label = 1.0f;
    if (d > 0) {
      target = draw_negative(rng);
      if (target == output) continue;
      label = 0.0f;
    }
    float* out = &output_[target * dim_];
    const float g = (label - sigmoid(dot(in, out, dim_))) * alpha;
    axpy(g, out, work.data(), dim_);
    axpy(g, in, out, dim_);
  }
  axpy(1.0f, work.data(), in, dim_);
}

void NegativeSamplingTrainer::train_document(const std::vector<std::uint32_t>& doc, Rng& rng,
                                             std::vector<std::uint32_t>& kept, std::vector<float>& work,
                                             std::vector<float>& hidden) {
  kept.clear();
  for (const auto id : doc) {
    if (keep_threshold_[id] < (1u << 16) && keep_threshold_[id] <= (rng.next() & 0xFFFF)) continue;
    kept.push_back(id);
  }
  const std::size_t n = kept.size();
  const auto window = static_cast<std::size_t>(config_.window);
  const double total = static_cast<double>(config_.epochs) * static_cast<double>(train_words_);
  const std::uint64_t base_done = words_done_;
  for (std::size_t i = 0; i < n; ++i) {
    // progress counts raw tokens so the schedule ignores subsampling, as word2vec does
    const double progress = (static_cast<double>(base_done) +
                             static_cast<double>(i) * static_cast<double>(doc.size()) / static_cast<double>(n)) /
                            total;
    const float alpha = static_cast<float>(std::max(
        config_.min_learning_rate,
        config_.learning_rate - (config_.learning_rate - config_.min_learning_rate) * progress));
    const std::size_t reduced = window - rng.next() % window;
    const std::size_t lo = i >= reduced ? i - reduced : 0;
    const std::size_t hi = std::min(n - 1, i + reduced);
    if (config_.architecture == Architecture::skip_gram) {
      for (std::size_t j = lo; j <= hi; ++j)
        if (j != i) update_pair(kept[j], kept[i], alpha, rng, work);
      continue;
    }
    // CBOW: mean of context inputs predicts the center word
    std::fill(hidden.begin(), hidden.end(), 0.0f);
    std::size_t count = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j == i) continue;
      axpy(1.0f, &input_[kept[j] * dim_], hidden.data(), dim_);
      ++count;
    }
    if (count == 0) continue;
    for (auto& h : hidden) h /= static_cast<float>(count);
    std::fill(work.begin(), work.end(), 0.0f);
    for (int d = 0; d <= config_.negatives; ++d) {
      std::uint32_t target = kept[i];
      float label = 1.0f;
      if (d > 0) {
        target = draw_negative(rng);
        if (target == kept[i]) continue;
        label = 0.0f;
      }
      float* out = &output_[target * dim_];
      const float g = (label - sigmoid(dot(hidden.data(), out, dim_))) * alpha;
      axpy(g, out, work.data(), dim_);
      axpy(g, hidden.data(), out, dim_);
    }
    for (std::size_t j = lo; j <= hi; ++j)
      if (j != i) axpy(1.0f, work.data(), &input_[kept[j] * dim_], dim_);
  }
}

void NegativeSamplingTrainer::train_range(std::size_t begin, std::size_t end, std::uint64_t seed) {
  Rng rng{seed};
  std::vector<std::uint32_t> kept;
  std::vector<float> work(dim_);
  std::vector<float> hidden(dim_);
  for (std::size_t d = begin; d < end; ++d) {
    train_document(documents_[d], rng, kept, work, hidden);
    // racy across workers by contract; exact in single-worker mode
    std::atomic_ref<std::uint64_t>(words_done_).fetch_add(documents_[d].size(), std::memory_order_relaxed);
  }
}

void NegativeSamplingTrainer::run_epoch() {
  if (epochs_done_ >= config_.epochs) throw Error("trainer: all configured epochs already run");
  const std::uint64_t epoch_seed = splitmix64(config_.seed ^ splitmix64(static_cast<std::uint64_t>(epochs_done_) + 1));
  const auto workers = static_cast<std::size_t>(config_.workers);
  if (workers == 1) {
    train_range(0, documents_.size(), epoch_seed);
  } else {
    std::vector<std::thread> threads;
    const std::size_t n = documents_.size();
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = n * w / workers;
      const std::size_t e = n * (w + 1) / workers;
      threads.emplace_back([this, b, e, epoch_seed, w] { train_range(b, e, splitmix64(epoch_seed + w)); });
    }
    for (auto& t : threads) t.join();
  }
  ++epochs_done_;
}

double NegativeSamplingTrainer::probe_loss(std::span<const ProbeSample> samples) const {
  if (samples.empty()) throw Error("probe_loss: empty probe batch");
  double total = 0.0;
  for (const auto& s : samples) {
    const float* in = &input_[s.context * dim_];
    double loss = -log_sigmoid(dot(in, &output_[s.center * dim_], dim_));
    for (const auto neg : s.negatives) loss -= log_sigmoid(-static_cast<double>(dot(in, &output_[neg * dim_], dim_)));
    total += loss;
  }
  return total / static_cast<double>(samples.size());
}

std::vector<ProbeSample> NegativeSamplingTrainer::make_probe_batch(
    std::span<const std::vector<std::uint32_t>> documents, std::size_t count, std::uint64_t seed) const {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < documents.size(); ++i)
    if (documents[i].size() >= 2) usable.push_back(i);
  if (usable.empty()) throw Error("make_probe_batch: no document has two tokens");
  Rng rng{splitmix64(seed)};
  std::vector<ProbeSample> out;
  out.reserve(count);
  const auto window = static_cast<std::size_t>(config_.window);
  while (out.size() < count) {
    const auto& doc = documents[usable[rng.next() % usable.size()]];
    const std::size_t i = rng.next() % doc.size();
    const std::size_t lo = i >= window ? i - window : 0;
    const std::size_t hi = std::min(doc.size() - 1, i + window);
    const std::size_t j = lo + rng.next() % (hi - lo + 1);
    if (j == i) continue;
    ProbeSample s{doc[i], doc[j], {}};
    while (s.negatives.size() < static_cast<std::size_t>(config_.negatives)) {
      const auto neg = draw_negative(rng);
      if (neg != s.center) s.negatives.push_back(neg);
    }
    out.push_back(std::move(s));
  }
  return out;
}

EmbeddingMatrix NegativeSamplingTrainer::embedding(Provenance provenance) const {
  return EmbeddingMatrix(vocab_, dim_, input_, std::move(provenance));
}

EmbeddingMatrix train_embedding(std::span<const std::vector<std::string>> documents,
                                const TrainingConfig& config, const std::string& slice_label) {
  config.validate();
  Vocabulary vocab = build_vocabulary(documents, config.min_count);
  if (vocab.empty())
    throw Error("slice '" + slice_label + "': no word reaches min_count " + std::to_string(config.min_count));
  auto encoded = encode_documents(documents, vocab);
  NegativeSamplingTrainer trainer(std::move(vocab), std::move(encoded), config);
  for (int e = 0; e < config.epochs; ++e) trainer.run_epoch();
  return trainer.embedding({slice_label, config.seed, config.hash()});
}

}  // namespace semcoord
