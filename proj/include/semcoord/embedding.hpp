#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semcoord/corpus.hpp"

namespace semcoord {

struct Provenance {
  std::string slice_label;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Vocabulary-indexed V x D matrix of single-precision word vectors, row-major.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(Vocabulary vocabulary, std::size_t dim, std::vector<float> data,
                  Provenance provenance = {});

  std::size_t rows() const noexcept { return vocabulary_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = std::move(p); }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::optional<std::size_t> find(std::string_view word) const { return vocabulary_.find(word); }
  /// Row of `word`; throws naming the word when it is out of vocabulary.
  std::span<const float> vector(std::string_view word) const;

  const std::vector<float>& data() const noexcept { return data_; }

  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    return a.dim_ == b.dim_ && a.vocabulary_.words() == b.vocabulary_.words() && a.data_ == b.data_;
  }

 private:
  Vocabulary vocabulary_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  Provenance provenance_;
};

/// v1.v2 / (|v1| |v2|), accumulated in double precision.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  std::string word;
  double similarity = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Top-k rows by descending cosine to `word`, excluding the word itself;
/// equal similarities are ordered lexicographically.
std::vector<Neighbor> nearest_neighbors(const EmbeddingMatrix& emb, std::string_view word,
                                        std::size_t k);

/// Text format: "V D" header, then one "word x1 ... xD" line per row,
/// with every value at 9 significant digits (exact for single precision).
void write_embedding_text(std::ostream& out, const EmbeddingMatrix& emb);
void write_embedding_text(const std::filesystem::path& path, const EmbeddingMatrix& emb);
EmbeddingMatrix read_embedding_text(std::istream& in);
EmbeddingMatrix read_embedding_text(const std::filesystem::path& path);

/// Formats with 9 significant digits in "%.9g" style.
std::string format_real(double value);
/// Parses a decimal real; throws on junk.
double parse_real(std::string_view text);

}  // namespace semcoord
