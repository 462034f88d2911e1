#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "../support.hpp"
#include "semcoord/error.hpp"
#include "semcoord/synthetic.hpp"
#include "semcoord/trainer.hpp"

using namespace semcoord;
using testing_support::make_embedding;

namespace {

using Docs = std::vector<std::vector<std::string>>;

// alpha and beta are interchangeable inside topic-A sentences; gamma only ever
// appears in topic-B sentences, which share no word with topic A.
Docs alpha_beta_gamma_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> topic_a{"ka", "kb", "kc", "kd", "ke", "kf", "kg", "kh"};
  const std::vector<std::string> topic_b{"ma", "mb", "mc", "md", "me", "mf", "mg", "mh"};
  Docs docs;
  for (int d = 0; d < 60; ++d) {
    std::vector<std::string> doc;
    for (int s = 0; s < 30; ++s) {
      const bool a = rng() % 2 == 0;
      const auto& words = a ? topic_a : topic_b;
      const std::size_t slot = rng() % 8;
      for (std::size_t i = 0; i < 8; ++i) {
        if (i == slot) doc.push_back(a ? (rng() % 2 ? "alpha" : "beta") : "gamma");
        else doc.push_back(words[rng() % words.size()]);
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

TrainingConfig small_config(std::uint64_t seed) {
  TrainingConfig c;
  c.dimension = 16;
  c.epochs = 5;
  c.window = 3;
  c.negatives = 5;
  c.min_count = 1;
  c.seed = seed;
  return c;
}

Docs synthetic_docs(std::uint64_t seed) {
  synthetic::Config sc;
  sc.seed = seed;
  sc.years = 2;
  sc.documents_per_year = 20;
  sc.sentences_per_document = 40;
  sc.drift_words = 2;
  sc.stationary_words = 2;
  sc.background_topics = 2;
  Docs docs;
  for (const auto& r : synthetic::generate(sc)) docs.push_back(document_tokens(r));
  return docs;
}

}  // namespace

TEST(TrainingConfig, ValidationRejectsBadValues) {
  TrainingConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = ok;
  bad.dimension = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = ok;
  bad.window = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = ok;
  bad.negatives = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = ok;
  bad.epochs = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = ok;
  bad.learning_rate = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(TrainingConfig, HashCoversEveryField) {
  const TrainingConfig base;
  std::vector<TrainingConfig> variants(10, base);
  variants[0].dimension = 50;
  variants[1].min_count = 5;
  variants[2].window = 2;
  variants[3].negatives = 2;
  variants[4].epochs = 2;
  variants[5].learning_rate = 0.05;
  variants[6].min_learning_rate = 1e-5;
  variants[7].subsample = 0;
  variants[8].architecture = Architecture::cbow;
  variants[9].seed = 7;
  for (const auto& v : variants) EXPECT_NE(v.hash(), base.hash());
  EXPECT_EQ(TrainingConfig{}.hash(), base.hash());
}

TEST(TrainingConfig, ArchitectureNames) {
  EXPECT_EQ(parse_architecture(to_string(Architecture::cbow)), Architecture::cbow);
  EXPECT_EQ(parse_architecture(to_string(Architecture::skip_gram)), Architecture::skip_gram);
  EXPECT_THROW(parse_architecture("glove"), ValidationError);
}

TEST(Trainer, SingleWorkerIsBitwiseDeterministic) {
  const auto docs = alpha_beta_gamma_corpus(1);
  const auto a = train_embedding(docs, small_config(3), "s");
  const auto b = train_embedding(docs, small_config(3), "s");
  EXPECT_TRUE(a == b);
  const auto c = train_embedding(docs, small_config(4), "s");
  EXPECT_FALSE(a == c);
}

TEST(Trainer, RowCountEqualsVocabularySize) {
  const auto docs = alpha_beta_gamma_corpus(2);
  auto cfg = small_config(0);
  cfg.min_count = 3;
  const auto emb = train_embedding(docs, cfg, "s");
  EXPECT_EQ(emb.rows(), build_vocabulary(docs, 3).size());
  EXPECT_EQ(emb.data().size(), emb.rows() * 16);
  for (std::size_t r = 0; r < emb.rows(); ++r) {
    bool nonzero = false;
    for (float x : emb.row(r)) {
      ASSERT_TRUE(std::isfinite(x));
      nonzero |= x != 0.0f;
    }
    EXPECT_TRUE(nonzero);
  }
}

TEST(Trainer, SharedContextsAreCloserThanDisjointOnes) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto emb = train_embedding(alpha_beta_gamma_corpus(100 + seed), small_config(seed), "s");
    const double ab = cosine(emb.vector("alpha"), emb.vector("beta"));
    const double ag = cosine(emb.vector("alpha"), emb.vector("gamma"));
    if (ab > ag) ++wins;
  }
  EXPECT_GE(wins, 19);
}

TEST(Trainer, CbowAlsoSeparatesContexts) {
  auto cfg = small_config(5);
  cfg.architecture = Architecture::cbow;
  cfg.learning_rate = 0.05;
  const auto emb = train_embedding(alpha_beta_gamma_corpus(7), cfg, "s");
  EXPECT_GT(cosine(emb.vector("alpha"), emb.vector("beta")), cosine(emb.vector("alpha"), emb.vector("gamma")));
}

TEST(Trainer, SeveralWorkersProduceUsableVectors) {
  auto cfg = small_config(6);
  cfg.workers = 2;
  const auto emb = train_embedding(alpha_beta_gamma_corpus(8), cfg, "s");
  for (float x : emb.data()) ASSERT_TRUE(std::isfinite(x));
  EXPECT_GT(cosine(emb.vector("alpha"), emb.vector("beta")), cosine(emb.vector("alpha"), emb.vector("gamma")));
}

TEST(Trainer, EmptyVocabularyNamesSlice) {
  const Docs docs{{"a", "b"}, {"c"}};
  auto cfg = small_config(0);
  cfg.min_count = 3;
  try {
    train_embedding(docs, cfg, "2011-2012");
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("2011-2012"), std::string::npos);
  }
}

TEST(Trainer, ProbeLossFallsBetweenFirstAndLastEpoch) {
  const auto docs = synthetic_docs(9);
  auto cfg = small_config(9);
  cfg.min_count = 3;
  const auto vocab = build_vocabulary(docs, cfg.min_count);
  auto encoded = encode_documents(docs, vocab);
  const Docs held_out = synthetic_docs(10);
  const auto held_encoded = encode_documents(held_out, vocab);
  NegativeSamplingTrainer trainer(vocab, encoded, cfg);
  const auto probe = trainer.make_probe_batch(held_encoded, 2000, 77);
  trainer.run_epoch();
  const double first = trainer.probe_loss(probe);
  while (trainer.epochs_done() < cfg.epochs) trainer.run_epoch();
  const double last = trainer.probe_loss(probe);
  EXPECT_LT(last, first);
  EXPECT_THROW(trainer.run_epoch(), Error);
}

TEST(Trainer, LearningRateDecaysLinearly) {
  const auto docs = alpha_beta_gamma_corpus(3);
  auto cfg = small_config(0);
  const auto vocab = build_vocabulary(docs, 1);
  NegativeSamplingTrainer trainer(vocab, encode_documents(docs, vocab), cfg);
  EXPECT_DOUBLE_EQ(trainer.current_learning_rate(), cfg.learning_rate);
  double previous = trainer.current_learning_rate();
  for (int e = 0; e < cfg.epochs; ++e) {
    trainer.run_epoch();
    EXPECT_LT(trainer.current_learning_rate(), previous);
    previous = trainer.current_learning_rate();
  }
  EXPECT_NEAR(previous, cfg.min_learning_rate, 1e-9);
}

TEST(Trainer, EncodeDropsUnknownTokens) {
  const auto vocab = Vocabulary::from_ranked_words({"x", "y"});
  const Docs docs{{"x", "q", "y", "x"}};
  EXPECT_EQ(encode_documents(docs, vocab)[0], (std::vector<std::uint32_t>{0, 1, 0}));
}

TEST(Cosine, Examples) {
  const std::vector<double> x{1, 0}, y{0, 1}, d{1, 1};
  EXPECT_EQ(cosine(std::span<const double>(x), std::span<const double>(x)), 1.0);
  EXPECT_EQ(cosine(std::span<const double>(x), std::span<const double>(y)), 0.0);
  EXPECT_NEAR(cosine(std::span<const double>(d), std::span<const double>(x)), 0.70710678, 1e-8);
}

TEST(Cosine, ZeroVectorAndMismatchThrow) {
  const std::vector<double> z{0, 0}, x{1, 0}, three{1, 2, 3};
  EXPECT_THROW(cosine(std::span<const double>(z), std::span<const double>(x)), Error);
  EXPECT_THROW(cosine(std::span<const double>(x), std::span<const double>(three)), Error);
}

TEST(Cosine, PropertySymmetricAndScaleInvariant) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    const auto a = testing_support::normal_vector(rng, n), b = testing_support::normal_vector(rng, n);
    auto sa = a;
    const double lambda = scale(rng);
    for (auto& v : sa) v *= lambda;
    const double ab = cosine(std::span<const double>(a), std::span<const double>(b));
    EXPECT_EQ(ab, cosine(std::span<const double>(b), std::span<const double>(a)));
    EXPECT_NEAR(cosine(std::span<const double>(sa), std::span<const double>(b)), ab, 1e-12);
    EXPECT_LE(std::abs(ab), 1.0);
  }
}

TEST(NearestNeighbors, HandComputedRanking) {
  // cos(q, a) = 1, cos(q, b) = 3/5, cos(q, c) = 0, cos(q, d) = -1
  const auto emb = make_embedding({"q", "a", "b", "c", "d"},
                                  {{1, 0}, {2, 0}, {3, 4}, {0, 1}, {-1, 0}});
  const auto nn = nearest_neighbors(emb, "q", 3);
  ASSERT_EQ(nn.size(), 3u);
  EXPECT_EQ(nn[0].word, "a");
  EXPECT_NEAR(nn[0].similarity, 1.0, 1e-12);
  EXPECT_EQ(nn[1].word, "b");
  EXPECT_NEAR(nn[1].similarity, 0.6, 1e-7);
  EXPECT_EQ(nn[2].word, "c");
  EXPECT_NEAR(nn[2].similarity, 0.0, 1e-12);
}

TEST(NearestNeighbors, LargeKReturnsAllOtherWords) {
  const auto emb = make_embedding({"x", "y", "z"}, {{1, 0}, {1, 1}, {0, 1}});
  EXPECT_EQ(nearest_neighbors(emb, "x", 3).size(), 2u);
  EXPECT_EQ(nearest_neighbors(emb, "x", 100).size(), 2u);
}

TEST(NearestNeighbors, TiesAreLexicographic) {
  const auto emb = make_embedding({"q", "zeta", "beta", "mu"}, {{1, 0}, {1, 1}, {1, -1}, {0, 1}});
  const auto nn = nearest_neighbors(emb, "q", 3);
  EXPECT_EQ(nn[0].word, "beta");
  EXPECT_EQ(nn[1].word, "zeta");
  EXPECT_EQ(nn[2].word, "mu");
}

TEST(NearestNeighbors, UnknownWordIsNamed) {
  const auto emb = make_embedding({"x", "y"}, {{1, 0}, {0, 1}});
  try {
    nearest_neighbors(emb, "missingword", 1);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missingword"), std::string::npos);
  }
}

TEST(NearestNeighbors, PropertyIndependentOfRowOrder) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t v = 2 + rng() % 15;
    std::vector<std::string> words;
    std::vector<std::vector<float>> rows;
    std::uniform_int_distribution<int> coord(-2, 2);  // small integers produce ties
    for (std::size_t i = 0; i < v; ++i) {
      words.push_back("w" + std::to_string(i));
      std::vector<float> r{static_cast<float>(coord(rng)), static_cast<float>(coord(rng)), 0.5f};
      rows.push_back(r);
    }
    std::vector<std::size_t> perm(v);
    for (std::size_t i = 0; i < v; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> pw;
    std::vector<std::vector<float>> pr;
    for (auto i : perm) {
      pw.push_back(words[i]);
      pr.push_back(rows[i]);
    }
    const auto a = make_embedding(words, rows), b = make_embedding(pw, pr);
    const std::size_t k = 1 + rng() % v;
    for (const auto& w : words) EXPECT_EQ(nearest_neighbors(a, w, k), nearest_neighbors(b, w, k));
  }
}

TEST(EmbeddingText, RoundTripIsBitExact) {
  std::mt19937_64 rng(33);
  std::vector<std::string> words;
  std::vector<std::vector<float>> rows;
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int i = 0; i < 200; ++i) {
    words.push_back("w" + std::to_string(i));
    std::vector<float> r;
    for (int j = 0; j < 8; ++j) {
      float x = std::bit_cast<float>(bits(rng));
      if (!std::isfinite(x)) x = 1.0f;
      r.push_back(x);
    }
    rows.push_back(r);
  }
  rows[0] = {-0.0f, 0.0f, std::numeric_limits<float>::denorm_min(), std::numeric_limits<float>::max(),
             std::numeric_limits<float>::min(), -1e-30f, 0.1f, 1.0f / 3.0f};
  const auto emb = make_embedding(words, rows);
  std::stringstream ss;
  write_embedding_text(ss, emb);
  const auto back = read_embedding_text(ss);
  ASSERT_EQ(back.vocabulary().words(), emb.vocabulary().words());
  ASSERT_EQ(back.data().size(), emb.data().size());
  for (std::size_t i = 0; i < emb.data().size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint32_t>(back.data()[i]), std::bit_cast<std::uint32_t>(emb.data()[i])) << i;
}

TEST(EmbeddingText, RoundTripOfTrainedMatrix) {
  const auto emb = train_embedding(alpha_beta_gamma_corpus(4), small_config(1), "s");
  testing_support::TempDir dir;
  write_embedding_text(dir / "e.txt", emb);
  EXPECT_TRUE(read_embedding_text(dir / "e.txt") == emb);
}

TEST(EmbeddingText, HeaderAndRowFormat) {
  const auto emb = make_embedding({"a", "b"}, {{1.5f, -2.0f}, {0.1f, 0.0f}});
  std::stringstream ss;
  write_embedding_text(ss, emb);
  EXPECT_EQ(ss.str(), "2 2\na 1.5 -2\nb 0.100000001 0\n");
}

TEST(EmbeddingText, MalformedInputThrows) {
  std::stringstream empty, bad_header("x y\n"), short_rows("2 2\na 1 2\n"), short_cols("1 3\na 1 2\n");
  EXPECT_THROW(read_embedding_text(empty), Error);
  EXPECT_THROW(read_embedding_text(bad_header), Error);
  EXPECT_THROW(read_embedding_text(short_rows), Error);
  EXPECT_THROW(read_embedding_text(short_cols), Error);
}
