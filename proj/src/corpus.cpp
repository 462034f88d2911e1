#include "semcoord/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "semcoord/error.hpp"

namespace semcoord {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

// --- LaTeX stripping -------------------------------------------------------

const std::set<std::string, std::less<>> kDroppedCommands = {
    "cite", "citep", "citet", "ref", "eqref", "label", "includegraphics", "bibliography", "url"};

// Commands whose argument is a separate run of text, so it must not fuse
// with the word before it.
const std::set<std::string, std::less<>> kBreakingCommands = {
    "footnote", "caption", "item", "title", "chapter", "section", "subsection", "subsubsection", "paragraph"};

const std::set<std::string, std::less<>> kMathEnvironments = {
    "equation", "equation*", "align",  "align*",  "eqnarray",    "eqnarray*",
    "gather",   "gather*",   "multline", "multline*", "displaymath", "math"};

// LaTeX comments run to end of line and swallow the newline plus the next
// line's leading blanks.
std::string remove_comments(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (c == '\\' && i + 1 < in.size()) {
      out += c;
      out += in[++i];
      continue;
    }
    if (c == '%') {
      while (i < in.size() && in[i] != '\n') ++i;
      while (i + 1 < in.size() && (in[i + 1] == ' ' || in[i + 1] == '\t')) ++i;
      continue;
    }
    out += c;
  }
  return out;
}

std::string_view document_body(std::string_view in) {
  constexpr std::string_view kBegin = "\\begin{document}";
  constexpr std::string_view kEnd = "\\end{document}";
  if (const auto b = in.find(kBegin); b != std::string_view::npos) in = in.substr(b + kBegin.size());
  if (const auto e = in.find(kEnd); e != std::string_view::npos) in = in.substr(0, e);
  return in;
}

class LatexScanner {
 public:
  explicit LatexScanner(std::string_view src) : src_(src) {}

  std::string run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      switch (c) {
        case '$': skip_dollar_math(); break;
        case '\\': command(); break;
        case '{':
        case '}': ++pos_; break;
        case '~': out_ += ' '; ++pos_; break;
        default: out_ += c; ++pos_; break;
      }
    }
    return std::move(out_);
  }

 private:
  // Position just past the next unescaped occurrence of `close`, or npos.
  std::size_t find_close(std::size_t from, std::string_view close) const {
    for (std::size_t i = from; i < src_.size(); ++i) {
      if (src_.compare(i, close.size(), close) == 0) return i + close.size();
      if (src_[i] == '\\' && close.front() != '\\') ++i;
    }
    return std::string_view::npos;
  }

  void jump(std::size_t to) { pos_ = to == std::string_view::npos ? src_.size() : to; }

  void skip_dollar_math() {
    if (src_.compare(pos_, 2, "$$") == 0) {
      jump(find_close(pos_ + 2, "$$"));
    } else {
      jump(find_close(pos_ + 1, "$"));
    }
    out_ += ' ';
  }

  // Balanced group starting at `open` ('{' or '['); returns one past the end.
  std::size_t skip_group(std::size_t at) const {
    const char open = src_[at];
    const char close = open == '{' ? '}' : ']';
    int depth = 0;
    for (std::size_t i = at; i < src_.size(); ++i) {
      if (src_[i] == '\\') {
        ++i;
        continue;
      }
      if (src_[i] == open) ++depth;
      if (src_[i] == close && --depth == 0) return i + 1;
    }
    return std::string_view::npos;
  }

  std::size_t skip_blanks(std::size_t i) const {
    while (i < src_.size() && (src_[i] == ' ' || src_[i] == '\t')) ++i;
    return i;
  }

  void drop_arguments() {
    while (true) {
      const std::size_t i = skip_blanks(pos_);
      if (i >= src_.size() || (src_[i] != '{' && src_[i] != '[')) return;
      jump(skip_group(i));
    }
  }

  void environment(bool begin) {
    const std::size_t i = skip_blanks(pos_);
    if (i >= src_.size() || src_[i] != '{') return;
    const std::size_t end = skip_group(i);
    if (end == std::string_view::npos) {
      jump(end);
      return;
    }
    const std::string name(src_.substr(i + 1, end - i - 2));
    pos_ = end;
    if (begin && kMathEnvironments.contains(name)) {
      jump(find_close(pos_, "\\end{" + name + "}"));
      out_ += ' ';
      return;
    }
    if (begin) {
      // drop optional arguments such as \begin{figure}[t]
      while (pos_ < src_.size() && src_[pos_] == '[') jump(skip_group(pos_));
    }
    out_ += ' ';
  }

  void command() {
    ++pos_;  // backslash
    if (pos_ >= src_.size()) return;
    const char next = src_[pos_];
    if (next == '(') {
      jump(find_close(pos_ + 1, "\\)"));
      out_ += ' ';
      return;
    }
    if (next == '[') {
      jump(find_close(pos_ + 1, "\\]"));
      out_ += ' ';
      return;
    }
    if (!is_alpha(next)) {
      // control symbol: spacing and escaped specials become blanks, accents vanish
      ++pos_;
      static constexpr std::string_view kBlank = "\\%$&#_{} ,;:!>\n\t";
      if (kBlank.find(next) != std::string_view::npos) out_ += ' ';
      return;
    }
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_alpha(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (pos_ < src_.size() && src_[pos_] == '*') ++pos_;

    if (name == "begin" || name == "end") {
      environment(name == "begin");
      return;
    }
    if (kDroppedCommands.contains(name)) {
      drop_arguments();
      out_ += ' ';
      return;
    }
    if (kBreakingCommands.contains(name)) out_ += ' ';
    // unknown command: name and immediate optional arguments go, braced text stays
    while (pos_ < src_.size() && src_[pos_] == '[') jump(skip_group(pos_));
    if (pos_ < src_.size() && !is_alpha(src_[pos_]) && src_[pos_] != '{') out_ += ' ';
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::string out_;
};

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (const char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

std::optional<bool> parse_accepted(std::string_view raw, const std::string& id) {
  std::string s = trim(raw);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s.empty() || s == "-" || s == "na") return std::nullopt;
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw ValidationError("manifest record '" + id + "': bad accepted flag '" + std::string(raw) + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string slice_file_name(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "slice_" + digits + ".tokens";
}

}  // namespace

// --- YearRange / corpus ----------------------------------------------------

std::string YearRange::label() const {
  return first == last ? std::to_string(first) : std::to_string(first) + "-" + std::to_string(last);
}

std::size_t TimeSlice::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.tokens.size();
  return n;
}

std::size_t TimeSlicedCorpus::total_tokens() const {
  std::size_t n = 0;
  for (const auto& s : slices) n += s.token_count();
  return n;
}

std::size_t TimeSlicedCorpus::document_count() const {
  std::size_t n = 0;
  for (const auto& s : slices) n += s.documents.size();
  return n;
}

std::vector<const SliceDocument*> TimeSlicedCorpus::documents_by_id() const {
  std::vector<const SliceDocument*> docs;
  for (const auto& s : slices)
    for (const auto& d : s.documents) docs.push_back(&d);
  std::sort(docs.begin(), docs.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  return docs;
}

// --- Vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts,
                       std::uint64_t min_count)
    : words_(std::move(words)), counts_(std::move(counts)), min_count_(min_count) {
  if (!counts_.empty() && counts_.size() != words_.size())
    throw Error("vocabulary: word and count lists differ in length");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) throw Error("vocabulary: duplicate word '" + words_[i] + "'");
  }
}

Vocabulary Vocabulary::from_ranked_words(std::vector<std::string> words) {
  return Vocabulary(std::move(words), {}, 0);
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::total_count() const {
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

// --- text processing -------------------------------------------------------

std::string strip_latex(std::string_view raw) {
  const std::string uncommented = remove_comments(raw);
  LatexScanner scanner(document_body(uncommented));
  return collapse_whitespace(scanner.run());
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : text) {
    if (is_alpha(c)) {
      current += static_cast<char>(c | 0x20);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> document_tokens(const DocumentRecord& record) {
  if (record.format == BodyFormat::latex) return tokenize(strip_latex(record.body));
  return tokenize(record.body);
}

// --- slicing ---------------------------------------------------------------

std::vector<YearRange> uniform_scheme(YearRange range, int width) {
  if (width < 1) throw ValidationError("slice width must be at least one year");
  if (range.last < range.first) throw ValidationError("empty year range " + range.label());
  const int years = range.span_years();
  const int count = std::max(1, years / width);
  const int first_width = years - (count - 1) * width;
  std::vector<YearRange> scheme;
  int year = range.first;
  for (int i = 0; i < count; ++i) {
    const int w = i == 0 ? first_width : width;
    scheme.push_back({year, year + w - 1});
    year += w;
  }
  return scheme;
}

std::vector<YearRange> parse_scheme(std::string_view spec, YearRange range) {
  const std::string s = trim(spec);
  if (s.size() > 5 && s.ends_with("-year")) {
    const auto width = parse_int(std::string_view(s).substr(0, s.size() - 5));
    if (!width) throw ValidationError("bad slicing scheme '" + s + "'");
    return uniform_scheme(range, *width);
  }
  std::vector<YearRange> scheme;
  for (const auto& part : split(s, ',')) {
    const std::string p = trim(part);
    const auto dash = p.find('-');
    std::optional<int> a;
    std::optional<int> b;
    if (dash == std::string::npos) {
      a = b = parse_int(p);
    } else {
      a = parse_int(std::string_view(p).substr(0, dash));
      b = parse_int(std::string_view(p).substr(dash + 1));
    }
    if (!a || !b) throw ValidationError("bad slicing scheme entry '" + p + "'");
    scheme.push_back({*a, *b});
  }
  validate_scheme(scheme);
  return scheme;
}

void validate_scheme(std::span<const YearRange> scheme) {
  if (scheme.empty()) throw ValidationError("slicing scheme is empty");
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    if (scheme[i].last < scheme[i].first)
      throw ValidationError("slice " + scheme[i].label() + " ends before it starts");
    if (i > 0 && scheme[i].first != scheme[i - 1].last + 1)
      throw ValidationError("slices " + scheme[i - 1].label() + " and " + scheme[i].label() +
                            " overlap or leave a gap");
  }
}

TimeSlicedCorpus build_slices(std::span<const DocumentRecord> records,
                              std::span<const YearRange> scheme) {
  validate_scheme(scheme);
  TimeSlicedCorpus corpus;
  corpus.scheme.assign(scheme.begin(), scheme.end());
  for (const auto& r : scheme) corpus.slices.push_back({r.label(), r, {}});

  std::set<std::string_view> seen;
  for (const auto& record : records) {
    if (!seen.insert(record.id).second)
      throw ValidationError("duplicate document id '" + record.id + "'");
    const auto it = std::find_if(scheme.begin(), scheme.end(),
                                 [&](const YearRange& r) { return r.contains(record.year); });
    if (it == scheme.end())
      throw ValidationError("document '" + record.id + "' has year " + std::to_string(record.year) +
                            " outside every slice");
    auto& slice = corpus.slices[static_cast<std::size_t>(it - scheme.begin())];
    slice.documents.push_back({record.id, record.year, record.accepted, document_tokens(record)});
  }
  for (auto& slice : corpus.slices) {
    std::sort(slice.documents.begin(), slice.documents.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
  }
  return corpus;
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                            std::uint64_t min_count) {
  if (min_count < 1) throw ValidationError("min_count must be at least 1");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& doc : documents)
    for (const auto& tok : doc) ++freq[tok];
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [w, c] : freq)
    if (c >= min_count) kept.emplace_back(w, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(kept.size());
  counts.reserve(kept.size());
  for (auto& [w, c] : kept) {
    words.push_back(std::move(w));
    counts.push_back(c);
  }
  return Vocabulary(std::move(words), std::move(counts), min_count);
}

Vocabulary build_vocabulary(const TimeSlice& slice, std::uint64_t min_count) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(slice.documents.size());
  for (const auto& d : slice.documents) docs.push_back(d.tokens);
  return build_vocabulary(docs, min_count);
}

// --- manifest & slice files ------------------------------------------------

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected 4 tab-separated fields");
    ManifestEntry e;
    e.id = trim(fields[0]);
    if (e.id.empty()) throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": empty id");
    const auto year = parse_int(trim(fields[1]));
    if (!year) throw ValidationError("manifest record '" + e.id + "': unknown year '" + fields[1] + "'");
    e.year = *year;
    e.accepted = parse_accepted(fields[2], e.id);
    std::filesystem::path body = trim(fields[3]);
    e.body_path = body.is_absolute() ? body : base / body;
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  for (const auto& e : entries) {
    out << e.id << '\t' << e.year << '\t' << (e.accepted ? (*e.accepted ? "1" : "0") : "") << '\t'
        << e.body_path.generic_string() << '\n';
  }
}

std::vector<DocumentRecord> load_documents(std::span<const ManifestEntry> entries,
                                           std::optional<YearRange> range) {
  std::vector<DocumentRecord> records;
  records.reserve(entries.size());
  for (const auto& e : entries) {
    if (range && !range->contains(e.year))
      throw ValidationError("document '" + e.id + "' has year " + std::to_string(e.year) +
                            " outside corpus range " + range->label());
    DocumentRecord r;
    r.id = e.id;
    r.year = e.year;
    r.accepted = e.accepted;
    r.body = read_file(e.body_path);
    r.format = e.body_path.extension() == ".tex" ? BodyFormat::latex : BodyFormat::plain;
    records.push_back(std::move(r));
  }
  return records;
}

void write_slices(const TimeSlicedCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "index.tsv");
  std::ofstream docs(dir / "documents.tsv");
  if (!index || !docs) throw Error("cannot write slice index under " + dir.string());
  for (std::size_t i = 0; i < corpus.slices.size(); ++i) {
    const auto& slice = corpus.slices[i];
    index << slice.label << '\t' << slice.years.first << '\t' << slice.years.last << '\t'
          << slice.documents.size() << '\t' << slice.token_count() << '\n';
    std::ofstream tokens(dir / slice_file_name(i));
    if (!tokens) throw Error("cannot write slice tokens under " + dir.string());
    for (std::size_t line = 0; line < slice.documents.size(); ++line) {
      const auto& d = slice.documents[line];
      for (std::size_t t = 0; t < d.tokens.size(); ++t) tokens << (t ? " " : "") << d.tokens[t];
      tokens << '\n';
      docs << d.id << '\t' << d.year << '\t' << (d.accepted ? (*d.accepted ? "1" : "0") : "") << '\t'
           << i << '\t' << line << '\n';
    }
  }
}

TimeSlicedCorpus read_slices(const std::filesystem::path& dir) {
  TimeSlicedCorpus corpus;
  std::ifstream index(dir / "index.tsv");
  if (!index) throw ValidationError("no slice index in " + dir.string());
  std::string line;
  while (std::getline(index, line)) {
    const auto f = split(line, '\t');
    if (f.size() != 5) throw ValidationError("malformed slice index line '" + line + "'");
    const auto a = parse_int(f[1]);
    const auto b = parse_int(f[2]);
    if (!a || !b) throw ValidationError("malformed slice index line '" + line + "'");
    corpus.scheme.push_back({*a, *b});
    TimeSlice slice{f[0], {*a, *b}, {}};
    std::ifstream tokens(dir / slice_file_name(corpus.slices.size()));
    std::string doc;
    while (std::getline(tokens, doc)) {
      SliceDocument d;
      std::istringstream ss(doc);
      for (std::string tok; ss >> tok;) d.tokens.push_back(tok);
      slice.documents.push_back(std::move(d));
    }
    corpus.slices.push_back(std::move(slice));
  }
  std::ifstream docs(dir / "documents.tsv");
  while (std::getline(docs, line)) {
    const auto f = split(line, '\t');
    if (f.size() != 5) throw ValidationError("malformed document index line '" + line + "'");
    const auto year = parse_int(f[1]);
    const auto si = parse_int(f[3]);
    const auto li = parse_int(f[4]);
    if (!year || !si || !li || *si < 0 || static_cast<std::size_t>(*si) >= corpus.slices.size())
      throw ValidationError("malformed document index line '" + line + "'");
    auto& slice_docs = corpus.slices[static_cast<std::size_t>(*si)].documents;
    if (*li < 0 || static_cast<std::size_t>(*li) >= slice_docs.size())
      throw ValidationError("document index points past slice end: '" + line + "'");
    auto& d = slice_docs[static_cast<std::size_t>(*li)];
    d.id = f[0];
    d.year = *year;
    d.accepted = parse_accepted(f[2], f[0]);
  }
  return corpus;
}

}  // namespace semcoord
