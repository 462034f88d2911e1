#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semcoord/coordinates.hpp"
#include "semcoord/corpus.hpp"

namespace semcoord::synthetic {

/// Generator for timestamped corpora with planted semantic drift.
///
/// Every sentence belongs to one topic and draws its content words from that
/// topic's word list, mixed with shared function words. Each drifting word i
/// is inserted into sentences of topic 2i in the first year and of topic 2i+1
/// in the last, with the destination-topic probability rising linearly over
/// the years. Each stationary word j always appears in topic
/// (2 * drift_words + j). The first word of each topic serves as a coordinate
/// word, so drifting word i moves from coordinate c1 = topic_word(2i, 0)
/// toward c2 = topic_word(2i + 1, 0): its trend slope is negative.
struct Config {
  std::uint64_t seed = 0;
  int first_year = 2007;
  int years = 10;
  int documents_per_year = 100;
  int sentences_per_document = 80;
  int sentence_length = 12;
  int words_per_topic = 12;
  /// Extra topics carrying neither planted word.
  int background_topics = 10;
  int drift_words = 20;
  int stationary_words = 20;
  /// Sentences per document that carry each planted word.
  int planted_sentences = 2;
  double function_word_rate = 0.3;
  double accepted_fraction = 0.5;
  /// When set, accepted documents keep every drifting word in its source
  /// topic, so <w, c1> is larger in the accepted sub-corpus.
  bool accepted_divergence = false;
  /// Emit bodies as LaTeX with math, citations and markup around the prose.
  bool latex = false;

  int topic_count() const { return 2 * drift_words + stationary_words + background_topics; }
};

std::string topic_word(int topic, int index);
std::string drift_word(int index);
std::string stationary_word(int index);

/// (drift_i, c1_i, c2_i) for every drifting word.
std::vector<TargetCoordinate> drift_triples(const Config& config);

std::vector<DocumentRecord> generate(const Config& config);

/// Writes "manifest.tsv" plus one body file per document into `dir` and
/// returns the manifest path.
std::filesystem::path write_corpus(const Config& config, const std::filesystem::path& dir);

}  // namespace semcoord::synthetic
