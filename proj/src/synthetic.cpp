#include "semcoord/synthetic.hpp"

#include <array>
#include <fstream>
#include <random>

#include "semcoord/error.hpp"

namespace semcoord::synthetic {

namespace {

constexpr std::array<std::string_view, 20> kFunctionWords = {
    "the", "of", "and", "to", "in", "a", "is", "that", "for", "we",
    "on", "with", "as", "by", "this", "are", "be", "an", "from", "it"};

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string syllables(int n, int count) {
  std::string out;
  for (int i = 0; i < count; ++i) {
    const int cv = n % 70;
    n /= 70;
    out += kConsonants[static_cast<std::size_t>(cv / 5)];
    out += kVowels[static_cast<std::size_t>(cv % 5)];
  }
  return out;
}

class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  // Raw engine bits only: std distributions are not portable across libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

void validate(const Config& c) {
  if (c.years < 2 || c.documents_per_year < 1 || c.sentence_length < 2 || c.words_per_topic < 2 ||
      c.drift_words < 0 || c.stationary_words < 0 || c.background_topics < 0 || c.topic_count() < 1 ||
      c.sentences_per_document < 0 || c.planted_sentences < 0)
    throw ValidationError("synthetic: invalid generator configuration");
}

class Writer {
 public:
  Writer(const Config& config, Random& rng) : config_(config), rng_(rng) {}

  std::vector<std::string> sentence(int topic) {
    std::vector<std::string> words;
    words.reserve(static_cast<std::size_t>(config_.sentence_length) + 1);
    for (int i = 0; i < config_.sentence_length; ++i) {
      if (rng_.bernoulli(config_.function_word_rate)) {
        words.emplace_back(kFunctionWords[rng_.below(kFunctionWords.size())]);
      } else {
        words.push_back(topic_word(topic, static_cast<int>(rng_.below(static_cast<std::size_t>(config_.words_per_topic)))));
      }
    }
    return words;
  }

  std::vector<std::string> planted(int topic, const std::string& word) {
    auto words = sentence(topic);
    const auto at = rng_.below(words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), word);
    return words;
  }

 private:
  const Config& config_;
  Random& rng_;
};

std::string render(const std::vector<std::vector<std::string>>& sentences, bool latex, Random& rng) {
  std::string body;
  if (latex) body += "\\documentclass{article}\n\\usepackage{amsmath} % preamble\n\\begin{document}\n";
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (latex && s % 20 == 0) body += "\\section{Part " + std::to_string(s / 20 + 1) + "}\n";
    const auto& words = sentences[s];
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) body += ' ';
      if (latex && i == 0 && rng.bernoulli(0.1)) {
        body += "\\emph{" + words[i] + "}";
      } else {
        body += words[i];
      }
    }
    if (latex && rng.bernoulli(0.2)) body += " $x_{i}^{2} + \\alpha$";
    if (latex && rng.bernoulli(0.1)) body += "~\\cite{smith2010,doe2012}";
    body += ".";
    if (latex && rng.bernoulli(0.05)) body += " % reviewer note";
    body += s % 6 == 5 ? "\n\n" : "\n";
    if (latex && s % 25 == 24) body += "\\begin{equation}\n  y = W x + b \\label{eq:lin}\n\\end{equation}\n";
  }
  if (latex) body += "\\bibliography{refs}\n\\end{document}\n";
  return body;
}

}  // namespace

std::string topic_word(int topic, int index) { return syllables(topic, 2) + syllables(index, 1); }
std::string drift_word(int index) { return "drift" + syllables(index, 1); }
std::string stationary_word(int index) { return "still" + syllables(index, 1); }

std::vector<TargetCoordinate> drift_triples(const Config& config) {
  std::vector<TargetCoordinate> out;
  for (int i = 0; i < config.drift_words; ++i)
    out.push_back({drift_word(i), topic_word(2 * i, 0), topic_word(2 * i + 1, 0), Category::unclassified});
  return out;
}

std::vector<DocumentRecord> generate(const Config& config) {
  validate(config);
  Random rng(config.seed);
  Writer writer(config, rng);
  const int topics = config.topic_count();
  std::vector<DocumentRecord> docs;
  for (int y = 0; y < config.years; ++y) {
    const double toward_destination = static_cast<double>(y) / (config.years - 1);
    for (int d = 0; d < config.documents_per_year; ++d) {
      DocumentRecord rec;
      rec.year = config.first_year + y;
      rec.id = "doc" + std::to_string(rec.year) + "_" + std::to_string(d);
      const bool accepted = rng.bernoulli(config.accepted_fraction);
      rec.accepted = accepted;

      std::vector<std::vector<std::string>> sentences;
      for (int s = 0; s < config.sentences_per_document; ++s)
        sentences.push_back(writer.sentence(static_cast<int>(rng.below(static_cast<std::size_t>(topics)))));
      for (int i = 0; i < config.drift_words; ++i) {
        for (int s = 0; s < config.planted_sentences; ++s) {
          const bool moved = !(config.accepted_divergence && accepted) && rng.bernoulli(toward_destination);
          sentences.push_back(writer.planted(2 * i + (moved ? 1 : 0), drift_word(i)));
        }
      }
      for (int j = 0; j < config.stationary_words; ++j)
        for (int s = 0; s < config.planted_sentences; ++s)
          sentences.push_back(writer.planted(2 * config.drift_words + j, stationary_word(j)));
      // interleave planted sentences with the rest
      for (std::size_t i = sentences.size(); i > 1; --i) std::swap(sentences[i - 1], sentences[rng.below(i)]);

      rec.body = render(sentences, config.latex, rng);
      rec.format = config.latex ? BodyFormat::latex : BodyFormat::plain;
      docs.push_back(std::move(rec));
    }
  }
  return docs;
}

std::filesystem::path write_corpus(const Config& config, const std::filesystem::path& dir) {
  const auto docs = generate(config);
  std::filesystem::create_directories(dir / "docs");
  std::vector<ManifestEntry> entries;
  for (const auto& d : docs) {
    const std::filesystem::path rel = std::filesystem::path("docs") / (d.id + (config.latex ? ".tex" : ".txt"));
    std::ofstream out(dir / rel, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / rel).string());
    out << d.body;
    entries.push_back({d.id, d.year, d.accepted, rel});
  }
  const auto manifest = dir / "manifest.tsv";
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace semcoord::synthetic
