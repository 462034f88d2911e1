#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semcoord {

/// Inclusive calendar-year interval.
struct YearRange {
  int first = 0;
  int last = 0;

  bool contains(int year) const noexcept { return year >= first && year <= last; }
  int span_years() const noexcept { return last - first + 1; }
  /// "2007" for single years, "2007-2010" otherwise.
  std::string label() const;

  friend bool operator==(const YearRange&, const YearRange&) = default;
};

enum class BodyFormat { plain, latex };

struct DocumentRecord {
  std::string id;
  int year = 0;
  std::optional<bool> accepted;
  std::string body;
  BodyFormat format = BodyFormat::plain;
};

struct SliceDocument {
  std::string id;
  int year = 0;
  std::optional<bool> accepted;
  std::vector<std::string> tokens;
};

struct TimeSlice {
  std::string label;
  YearRange years;
  std::vector<SliceDocument> documents;  // ordered by id

  std::size_t token_count() const;
};

struct TimeSlicedCorpus {
  std::vector<YearRange> scheme;
  std::vector<TimeSlice> slices;

  std::size_t total_tokens() const;
  std::size_t document_count() const;
  /// Every document of every slice, ordered by id.
  std::vector<const SliceDocument*> documents_by_id() const;
};

/// Word list with dense ids, ordered by descending frequency then
/// lexicographically. Counts may be absent for vocabularies recovered from
/// an embedding file.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts,
             std::uint64_t min_count);

  /// Vocabulary with unknown frequencies; rank order is the given order.
  static Vocabulary from_ranked_words(std::vector<std::string> words);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  bool has_counts() const noexcept { return !counts_.empty(); }
  std::uint64_t min_count() const noexcept { return min_count_; }

  const std::string& word(std::size_t id) const { return words_.at(id); }
  std::uint64_t count(std::size_t id) const { return has_counts() ? counts_.at(id) : 0; }
  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total_count() const;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t min_count_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reduce LaTeX source to running prose. Total: malformed input never throws.
std::string strip_latex(std::string_view raw);

/// Lowercase ASCII-alphabetic tokens; every other byte separates tokens.
std::vector<std::string> tokenize(std::string_view text);

std::vector<std::string> document_tokens(const DocumentRecord& record);

/// Contiguous slices of `width` years covering `range`; the first slice
/// absorbs the remainder when the range does not divide evenly.
std::vector<YearRange> uniform_scheme(YearRange range, int width);

/// Accepts "N-year" (uniform over `range`) or an explicit list such as
/// "2007-2010,2011-2013,2014-2016".
std::vector<YearRange> parse_scheme(std::string_view spec, YearRange range);

/// Throws ValidationError unless the scheme is non-empty, ordered and gap-free.
void validate_scheme(std::span<const YearRange> scheme);

TimeSlicedCorpus build_slices(std::span<const DocumentRecord> records,
                              std::span<const YearRange> scheme);

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                            std::uint64_t min_count);
Vocabulary build_vocabulary(const TimeSlice& slice, std::uint64_t min_count);

// --- on-disk formats -------------------------------------------------------

struct ManifestEntry {
  std::string id;
  int year = 0;
  std::optional<bool> accepted;
  std::filesystem::path body_path;  // resolved against the manifest directory
};

/// Tab-separated: id, year, accepted (0/1/true/false or empty), body path.
/// Blank lines and lines starting with '#' are skipped.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Reads every body; ".tex" bodies are marked as LaTeX.
std::vector<DocumentRecord> load_documents(std::span<const ManifestEntry> entries,
                                           std::optional<YearRange> range = std::nullopt);

/// One "<label>.tokens" file per slice plus "index.tsv" and "documents.tsv".
void write_slices(const TimeSlicedCorpus& corpus, const std::filesystem::path& dir);
TimeSlicedCorpus read_slices(const std::filesystem::path& dir);

}  // namespace semcoord
