#include "semcoord/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "semcoord/error.hpp"

namespace semcoord {

namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size())
    throw Error("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error("cosine: similarity undefined for a zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

template <typename T>
T parse_number(std::string_view text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) throw Error("not a number: '" + std::string(text) + "'");
  return value;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(Vocabulary vocabulary, std::size_t dim, std::vector<float> data,
                                 Provenance provenance)
    : vocabulary_(std::move(vocabulary)),
      dim_(dim),
      data_(std::move(data)),
      provenance_(std::move(provenance)) {
  if (data_.size() != vocabulary_.size() * dim_)
    throw Error("embedding: expected " + std::to_string(vocabulary_.size()) + " x " +
                std::to_string(dim_) + " values, got " + std::to_string(data_.size()));
}

std::span<const float> EmbeddingMatrix::vector(std::string_view word) const {
  const auto id = find(word);
  if (!id) throw Error("word '" + std::string(word) + "' is not in the vocabulary");
  return row(*id);
}

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

std::vector<Neighbor> nearest_neighbors(const EmbeddingMatrix& emb, std::string_view word,
                                        std::size_t k) {
  if (k < 1) throw Error("nearest_neighbors: k must be at least 1");
  const auto query = emb.find(word);
  if (!query) throw Error("word '" + std::string(word) + "' is not in the vocabulary");
  const auto q = emb.row(*query);
  std::vector<Neighbor> all;
  all.reserve(emb.rows());
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    if (i == *query) continue;
    all.push_back({emb.vocabulary().word(i), cosine(q, emb.row(i))});
  }
  const auto better = [](const Neighbor& a, const Neighbor& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.word < b.word;
  };
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
  all.resize(take);
  return all;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double parse_real(std::string_view text) { return parse_number<double>(text); }

void write_embedding_text(std::ostream& out, const EmbeddingMatrix& emb) {
  out << emb.rows() << ' ' << emb.dim() << '\n';
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    out << emb.vocabulary().word(i);
    for (const float x : emb.row(i)) out << ' ' << format_real(x);
    out << '\n';
  }
}

void write_embedding_text(const std::filesystem::path& path, const EmbeddingMatrix& emb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write embedding " + path.string());
  write_embedding_text(out, emb);
  if (!out) throw Error("failed writing embedding " + path.string());
}

EmbeddingMatrix read_embedding_text(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error("embedding file: missing header");
  std::istringstream hs(header);
  std::size_t rows = 0;
  std::size_t dim = 0;
  if (!(hs >> rows >> dim) || dim == 0) throw Error("embedding file: bad header '" + header + "'");
  std::vector<std::string> words;
  std::vector<float> data;
  words.reserve(rows);
  data.reserve(rows * dim);
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw Error("embedding file: expected " + std::to_string(rows) + " rows");
    std::string_view rest(line);
    std::size_t field = 0;
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      const auto tok = rest.substr(0, sp);
      if (field == 0) {
        words.emplace_back(tok);
      } else {
        data.push_back(parse_number<float>(tok));
      }
      ++field;
      rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
    }
    if (field != dim + 1)
      throw Error("embedding file: row " + std::to_string(r + 1) + " has " +
                  std::to_string(field == 0 ? 0 : field - 1) + " values, expected " + std::to_string(dim));
  }
  return EmbeddingMatrix(Vocabulary::from_ranked_words(std::move(words)), dim, std::move(data));
}

EmbeddingMatrix read_embedding_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read embedding " + path.string());
  return read_embedding_text(in);
}

}  // namespace semcoord
