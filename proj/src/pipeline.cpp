#include "semcoord/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "semcoord/error.hpp"
#include "semcoord/hashing.hpp"
#include "semcoord/svg.hpp"
#include "semcoord/trainer.hpp"

namespace semcoord {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kDigestPrefix = 20;

std::string content_digest(const fs::path& path) {
  if (!fs::is_directory(path)) return sha256_file(path);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), path));
  std::sort(files.begin(), files.end());
  Sha256 h;
  for (const auto& f : files) h.field(f.generic_string()).field(sha256_file(path / f));
  return h.hex();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string triple_columns(const TargetCoordinate& t) { return t.target + "," + t.c1 + "," + t.c2; }

std::string flag(bool b) { return b ? "1" : "0"; }

std::string tokens_digest(const std::vector<const SliceDocument*>& docs) {
  Sha256 h;
  h.field("tokens");
  for (const auto* d : docs) {
    std::string line;
    for (const auto& t : d->tokens) {
      if (!line.empty()) line += ' ';
      line += t;
    }
    h.field(line);
  }
  return h.hex();
}

std::vector<std::vector<std::string>> token_lists(const std::vector<const SliceDocument*>& docs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (const auto* d : docs) out.push_back(d->tokens);
  return out;
}

std::vector<const SliceDocument*> slice_docs(const TimeSlice& slice) {
  std::vector<const SliceDocument*> out;
  for (const auto& d : slice.documents) out.push_back(&d);
  return out;
}

template <class F>
decltype(auto) stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const ValidationError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

// --- ArtifactStore -----------------------------------------------------------

ArtifactStore::ArtifactStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path ArtifactStore::path_for(const std::string& kind, const std::string& key, const std::string& ext) const {
  return dir_ / (kind + "-" + key.substr(0, kDigestPrefix) + ext);
}

std::optional<fs::path> ArtifactStore::lookup(const std::string& kind, const std::string& key,
                                              const std::string& ext) const {
  const fs::path path = path_for(kind, key, ext);
  fs::path meta = path;
  meta += ".meta.json";
  if (!fs::exists(path) || !fs::exists(meta)) return std::nullopt;
  bool valid = false;
  try {
    const auto j = nlohmann::json::parse(read_file(meta));
    valid = j.at("kind").get<std::string>() == kind && j.at("key").get<std::string>() == key &&
            j.at("sha256").get<std::string>() == content_digest(path);
  } catch (const std::exception&) {
    valid = false;
  }
  if (valid) return path;
  fs::remove_all(path);
  fs::remove(meta);
  return std::nullopt;
}

fs::path ArtifactStore::commit(const std::string& kind, const std::string& key, const std::string& ext,
                               const std::function<void(const fs::path&)>& write) const {
  fs::create_directories(dir_);
  const fs::path path = path_for(kind, key, ext);
  fs::path tmp = dir_ / (".tmp-" + path.filename().string());
  fs::remove_all(tmp);
  write(tmp);
  fs::remove_all(path);
  fs::rename(tmp, path);
  const nlohmann::json j = {{"kind", kind}, {"key", key}, {"sha256", content_digest(path)}};
  fs::path meta = path;
  meta += ".meta.json";
  std::ofstream out(meta, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + meta.string());
  return path;
}

// --- Pipeline ----------------------------------------------------------------

struct Pipeline::State {
  std::optional<std::vector<ManifestEntry>> manifest;
  std::optional<YearRange> range;
  std::string corpus_digest;
  std::optional<std::vector<TargetCoordinate>> triples;
  std::map<std::string, TimeSlicedCorpus> corpora;
  std::map<std::string, fs::path> corpus_paths;
  std::map<std::string, std::vector<std::string>> slice_digests;  // scheme -> per slice
  std::string all_docs_digest;
  std::map<std::string, EmbeddingMatrix> embeddings;  // by embedding key
  std::map<std::string, fs::path> embedding_paths;
  std::map<std::pair<std::string, std::uint64_t>, std::vector<EmbeddingMatrix>> aligned;
  std::map<std::string, AnalysisResult> analyses;
  std::unique_ptr<NeighborSpace> space;
  std::map<bool, std::string> acceptance_keys;
  std::mutex mutex;
};

Pipeline::Pipeline(RunConfig config, std::ostream* log)
    : config_(std::move(config)), log_(log), store_(config_.output_dir / "cache"), state_(std::make_unique<State>()) {}

Pipeline::~Pipeline() = default;

void Pipeline::log(const std::string& line) const {
  if (log_) *log_ << line << '\n' << std::flush;
}

YearRange Pipeline::year_range() {
  if (state_->range) return *state_->range;
  if (!state_->manifest) state_->manifest = read_manifest(config_.manifest);
  const auto& m = *state_->manifest;
  if (m.empty()) throw ValidationError("manifest " + config_.manifest.string() + " lists no documents");
  if (config_.year_range) {
    state_->range = config_.year_range;
  } else {
    YearRange r{m.front().year, m.front().year};
    for (const auto& e : m) {
      r.first = std::min(r.first, e.year);
      r.last = std::max(r.last, e.year);
    }
    state_->range = r;
  }
  return *state_->range;
}

const std::vector<TargetCoordinate>& Pipeline::triples() {
  if (!state_->triples) {
    auto t = read_triples(config_.triples);
    std::set<std::string> seen;
    for (const auto& x : t)
      if (!seen.insert(x.key()).second) throw ValidationError("triple '" + x.key() + "' is listed twice");
    if (t.empty()) throw ValidationError("triples file " + config_.triples.string() + " lists no triples");
    state_->triples = std::move(t);
  }
  return *state_->triples;
}

const TimeSlicedCorpus& Pipeline::corpus(const std::string& scheme) {
  if (auto it = state_->corpora.find(scheme); it != state_->corpora.end()) return it->second;
  const YearRange range = year_range();
  const auto ranges = parse_scheme(scheme, range);
  validate_scheme(ranges);

  if (state_->corpus_digest.empty()) {
    auto entries = *state_->manifest;
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    Sha256 h;
    h.field("corpus").field(range.label());
    for (const auto& e : entries) {
      if (!fs::is_regular_file(e.body_path))
        throw ValidationError("document '" + e.id + "': body file not found: " + e.body_path.string());
      h.field(e.id).field(std::to_string(e.year)).field(e.accepted ? (*e.accepted ? "1" : "0") : "");
      h.field(e.body_path.extension().string()).field(sha256_file(e.body_path));
    }
    state_->corpus_digest = h.hex();
  }
  Sha256 h;
  h.field("slices").field(state_->corpus_digest);
  for (const auto& r : ranges) h.field(r.label());
  const std::string key = h.hex();

  TimeSlicedCorpus corpus;
  fs::path path;
  if (auto hit = store_.lookup("slices", key, "")) {
    path = *hit;
    corpus = read_slices(path);
    log("ingest " + scheme + ": reused " + path.filename().string());
  } else {
    const auto records = load_documents(*state_->manifest, range);
    corpus = build_slices(records, ranges);
    path = store_.commit("slices", key, "", [&](const fs::path& p) { write_slices(corpus, p); });
    log("ingest " + scheme + ": " + std::to_string(corpus.document_count()) + " documents, " +
        std::to_string(corpus.total_tokens()) + " tokens, " + std::to_string(corpus.slices.size()) + " slices");
  }
  std::vector<std::string> digests;
  for (const auto& s : corpus.slices) digests.push_back(tokens_digest(slice_docs(s)));
  state_->slice_digests[scheme] = std::move(digests);
  if (state_->all_docs_digest.empty()) state_->all_docs_digest = tokens_digest(corpus.documents_by_id());
  state_->corpus_paths[scheme] = path;
  return state_->corpora.emplace(scheme, std::move(corpus)).first->second;
}

std::string Pipeline::embedding_key(const std::string& token_digest, std::uint64_t seed) const {
  TrainingConfig t = config_.training;
  t.seed = seed;
  return Sha256().field("embedding").field(token_digest).field(t.canonical()).hex();
}

EmbeddingMatrix Pipeline::train_or_load(const std::vector<std::vector<std::string>>& docs,
                                        const std::string& token_digest, const std::string& label,
                                        std::uint64_t seed) {
  TrainingConfig t = config_.training;
  t.seed = seed;
  const std::string key = embedding_key(token_digest, seed);
  const Provenance prov{label, seed, t.hash()};
  if (auto hit = store_.lookup("embedding", key, ".txt")) {
    auto emb = read_embedding_text(*hit);
    emb.set_provenance(prov);
    std::lock_guard lock(state_->mutex);
    ++counters_.reused;
    state_->embedding_paths[key] = *hit;
    log("train " + label + " seed " + std::to_string(seed) + ": reused " + hit->filename().string());
    return emb;
  }
  auto emb = train_embedding(docs, t, label);
  const auto path = store_.commit("embedding", key, ".txt", [&](const fs::path& p) { write_embedding_text(p, emb); });
  std::lock_guard lock(state_->mutex);
  ++counters_.trained;
  state_->embedding_paths[key] = path;
  log("train " + label + " seed " + std::to_string(seed) + ": " + std::to_string(emb.rows()) + " words");
  return emb;
}

void Pipeline::train_all(const std::string& scheme) {
  const auto& c = corpus(scheme);
  struct Job {
    std::string key;
    std::vector<const SliceDocument*> docs;
    std::string digest;
    std::string label;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::set<std::string> queued;
  const auto add = [&](std::vector<const SliceDocument*> docs, const std::string& digest, const std::string& label,
                       std::uint64_t seed) {
    const auto key = embedding_key(digest, seed);
    if (state_->embeddings.count(key) || !queued.insert(key).second) return;
    jobs.push_back({key, std::move(docs), digest, label, seed});
  };
  for (const auto seed : config_.seeds) {
    for (std::size_t i = 0; i < c.slices.size(); ++i)
      add(slice_docs(c.slices[i]), state_->slice_digests[scheme][i], c.slices[i].label, seed);
    add(c.documents_by_id(), state_->all_docs_digest, "base", seed);
  }
  std::vector<std::optional<EmbeddingMatrix>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = train_or_load(token_lists(jobs[i].docs), jobs[i].digest, jobs[i].label, jobs[i].seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config_.jobs), jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t i = 0; i < jobs.size(); ++i) state_->embeddings.emplace(jobs[i].key, std::move(*results[i]));
}

const EmbeddingMatrix& Pipeline::slice_embedding(const std::string& scheme, std::size_t slice, std::uint64_t seed) {
  const auto& c = corpus(scheme);
  if (slice >= c.slices.size()) throw Error("slice index out of range");
  const auto key = embedding_key(state_->slice_digests[scheme][slice], seed);
  if (auto it = state_->embeddings.find(key); it != state_->embeddings.end()) return it->second;
  auto docs = slice_docs(c.slices[slice]);
  auto emb = train_or_load(token_lists(docs), state_->slice_digests[scheme][slice], c.slices[slice].label, seed);
  return state_->embeddings.emplace(key, std::move(emb)).first->second;
}

const EmbeddingMatrix& Pipeline::base_embedding(std::uint64_t seed) {
  const auto& c = corpus();
  const auto key = embedding_key(state_->all_docs_digest, seed);
  if (auto it = state_->embeddings.find(key); it != state_->embeddings.end()) return it->second;
  auto emb = train_or_load(token_lists(c.documents_by_id()), state_->all_docs_digest, "base", seed);
  return state_->embeddings.emplace(key, std::move(emb)).first->second;
}

const std::vector<EmbeddingMatrix>& Pipeline::aligned(const std::string& scheme, std::uint64_t seed) {
  const auto memo = std::make_pair(scheme, seed);
  if (auto it = state_->aligned.find(memo); it != state_->aligned.end()) return it->second;
  train_all(scheme);
  const auto& c = corpus(scheme);
  const auto& base = base_embedding(seed);
  const auto base_key = embedding_key(state_->all_docs_digest, seed);
  std::vector<EmbeddingMatrix> out;
  for (std::size_t i = 0; i < c.slices.size(); ++i) {
    const auto& emb = slice_embedding(scheme, i, seed);
    const auto key = Sha256()
                         .field("projection")
                         .field(embedding_key(state_->slice_digests[scheme][i], seed))
                         .field(base_key)
                         .field(std::to_string(config_.anchor_count))
                         .field(to_string(config_.alignment_mode))
                         .hex();
    const auto anchors = select_anchors(emb, base, config_.anchor_count);
    AlignmentRecord rec{seed, c.slices[i].label, anchors.words.size(), anchors.shortfall, 0.0, {}};
    fs::path path;
    if (auto hit = store_.lookup("projection", key, ".txt")) {
      path = *hit;
      ++counters_.projections_reused;
    } else {
      const auto map = fit_projection(emb, base, config_.anchor_count, config_.alignment_mode);
      path = store_.commit("projection", key, ".txt", [&](const fs::path& p) { write_projection(p, map); });
      ++counters_.fitted;
      if (anchors.shortfall)
        log("align " + c.slices[i].label + " seed " + std::to_string(seed) + ": only " +
            std::to_string(anchors.words.size()) + " common words, fewer than anchor_count " +
            std::to_string(config_.anchor_count));
    }
    // always apply the stored (9-digit) map so fresh and resumed runs agree
    const auto map = read_projection(path);
    rec.residual = map.residual;
    rec.file = path;
    alignment_records_.push_back(rec);
    out.push_back(apply_projection(emb, map));
  }
  return state_->aligned.emplace(memo, std::move(out)).first->second;
}

const AnalysisResult& Pipeline::analyze(const std::string& scheme) {
  if (auto it = state_->analyses.find(scheme); it != state_->analyses.end()) return it->second;
  const auto& ts = triples();
  const auto& c = corpus(scheme);
  AnalysisResult res;
  res.scheme = scheme;
  res.seeds = config_.seeds;
  for (const auto& s : c.slices) res.slice_labels.push_back(s.label);
  std::vector<const std::vector<EmbeddingMatrix>*> per_seed;
  for (const auto seed : config_.seeds) per_seed.push_back(&aligned(scheme, seed));
  for (const auto& t : ts) {
    TripleResult r;
    r.triple = t;
    try {
      for (const auto* emb : per_seed) {
        r.series.push_back(coordinate_position(*emb, t, config_.epsilon));
        r.fits.push_back(fit_trend(r.series.back()));
        r.clamp_count += r.series.back().clamp_count();
      }
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      res.skipped.push_back({t, e.what()});
      continue;
    }
    r.trend = aggregate_seeds(r.fits);
    res.triples.push_back(std::move(r));
  }
  log("analyze " + scheme + ": " + std::to_string(res.triples.size()) + " triples, " +
      std::to_string(res.skipped.size()) + " skipped");
  return state_->analyses.emplace(scheme, std::move(res)).first->second;
}

std::vector<fs::path> Pipeline::artifacts() const {
  std::set<fs::path> all;
  for (const auto& [k, v] : state_->corpus_paths) all.insert(v);
  for (const auto& [k, v] : state_->embedding_paths) all.insert(v);
  for (const auto& r : alignment_records_) all.insert(r.file);
  return {all.begin(), all.end()};
}

const NeighborSpace& Pipeline::neighbor_space() {
  if (!state_->space) {
    const auto seed = config_.seeds.front();
    const auto& slices = aligned(config_.slicing_scheme, seed);
    state_->space = std::make_unique<NeighborSpace>(slices, &base_embedding(seed), config_.neighbor_universe);
  }
  return *state_->space;
}

const EmbeddingMatrix& Pipeline::acceptance_embedding(bool accepted) {
  if (auto it = state_->acceptance_keys.find(accepted); it != state_->acceptance_keys.end())
    return state_->embeddings.at(it->second);
  const auto all = corpus().documents_by_id();
  std::vector<const SliceDocument*> docs;
  std::size_t missing = 0;
  std::string first_missing;
  for (const auto* d : all) {
    if (!d->accepted) {
      if (!missing++) first_missing = d->id;
      continue;
    }
    if (*d->accepted == accepted) docs.push_back(d);
  }
  if (missing)
    throw ValidationError(std::to_string(missing) + " documents lack an acceptance flag (first: '" + first_missing +
                          "')");
  const std::string label = accepted ? "accepted" : "not-accepted";
  if (docs.empty()) throw ValidationError("no " + label + " documents in the corpus");
  const auto digest = tokens_digest(docs);
  const auto seed = config_.seeds.front();
  const auto key = embedding_key(digest, seed);
  if (!state_->embeddings.count(key)) state_->embeddings.emplace(key, train_or_load(token_lists(docs), digest, label, seed));
  state_->acceptance_keys[accepted] = key;
  return state_->embeddings.at(key);
}

// --- reports -----------------------------------------------------------------

void write_report(const fs::path& output_dir, const fs::path& relative, const std::string& contents) {
  const fs::path path = output_dir / relative;
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw Error("cannot write " + path.string());
}

std::string format_trend_report(const AnalysisResult& a) {
  std::string out = "target,c1,c2,category,slope_mean,slope_std,direction,stable,clamp_count\n";
  for (const bool section : {true, false}) {
    out += section ? "# stable\n" : "# unstable\n";
    for (const auto& r : a.triples) {
      if (r.trend.stable != section) continue;
      out += triple_columns(r.triple) + "," + to_string(r.triple.category) + "," + format_real(r.trend.magnitude()) +
             "," + format_real(r.trend.slope_std) + "," + to_string(r.trend.direction) + "," + flag(r.trend.stable) +
             "," + std::to_string(r.clamp_count) + "\n";
    }
  }
  return out;
}

std::string format_trajectories(const AnalysisResult& a) {
  std::string out = "target,c1,c2,seed,t,slice,d_rel,cos_c1,cos_c2,clamped_c1,clamped_c2\n";
  for (const auto& r : a.triples)
    for (std::size_t s = 0; s < r.series.size(); ++s)
      for (std::size_t t = 0; t < r.series[s].points.size(); ++t) {
        const auto& p = r.series[s].points[t];
        out += triple_columns(r.triple) + "," + std::to_string(a.seeds[s]) + "," + std::to_string(t + 1) + "," +
               p.slice_label + "," + format_real(p.d_rel) + "," + format_real(p.cos_c1) + "," +
               format_real(p.cos_c2) + "," + flag(p.clamped_c1) + "," + flag(p.clamped_c2) + "\n";
      }
  return out;
}

std::string format_fits(const AnalysisResult& a) {
  std::string out = "target,c1,c2,seed,slope,intercept\n";
  for (const auto& r : a.triples)
    for (std::size_t s = 0; s < r.fits.size(); ++s)
      out += triple_columns(r.triple) + "," + std::to_string(a.seeds[s]) + "," + format_real(r.fits[s].slope) + "," +
             format_real(r.fits[s].intercept) + "\n";
  return out;
}

std::string format_skipped(const AnalysisResult& a) {
  std::string out = "target,c1,c2,category,reason\n";
  for (const auto& s : a.skipped)
    out += triple_columns(s.triple) + "," + to_string(s.triple.category) + "," + csv_field(s.reason) + "\n";
  return out;
}

std::string format_alignment(const std::vector<AlignmentRecord>& records, const fs::path& relative_to) {
  std::string out = "seed,slice,anchors,shortfall,residual,projection\n";
  for (const auto& r : records)
    out += std::to_string(r.seed) + "," + r.slice_label + "," + std::to_string(r.anchors) + "," + flag(r.shortfall) +
           "," + format_real(r.residual) + "," + csv_field(fs::relative(r.file, relative_to).generic_string()) + "\n";
  return out;
}

StabilityReport run_stability(Pipeline& p, std::vector<std::string>* dropped) {
  const auto& a = p.analyze();
  const auto& space = p.neighbor_space();
  std::vector<std::string> targets, coordinates;
  std::set<std::string> seen_t, seen_c;
  for (const auto& r : a.triples) seen_t.insert(r.triple.target);
  const auto keep = [&](const std::string& w, std::vector<std::string>& into, std::set<std::string>& seen) {
    if (!seen.insert(w).second) return;
    if (space.contains(w)) {
      into.push_back(w);
    } else if (dropped) {
      dropped->push_back(w);
    }
  };
  std::set<std::string> added_t;
  for (const auto& r : a.triples) keep(r.triple.target, targets, added_t);
  for (const auto& r : a.triples)
    for (const auto* w : {&r.triple.c1, &r.triple.c2})
      if (!seen_t.count(*w)) keep(*w, coordinates, seen_c);
  if (targets.empty() || coordinates.empty())
    throw Error("stability needs targets and coordinate words inside the neighbour universe");
  return compare_stability(space, targets, coordinates, p.config().stability_k);
}

std::vector<std::string> run_discovery(Pipeline& p) {
  return changing_neighbor_candidates(p.neighbor_space(), p.config().candidate_pool, p.config().candidate_k);
}

SlicingAblation ablate_slicing(Pipeline& p, const std::vector<std::string>& alternatives) {
  if (alternatives.empty()) throw ValidationError("no alternative slicing schemes given");
  SlicingAblation out;
  out.schemes.push_back(p.config().slicing_scheme);
  out.schemes.insert(out.schemes.end(), alternatives.begin(), alternatives.end());

  std::vector<std::map<std::string, const TripleResult*>> by_scheme;
  for (const auto& scheme : out.schemes) {
    std::map<std::string, const TripleResult*> m;
    for (const auto& r : p.analyze(scheme).triples) m[r.triple.key()] = &r;
    by_scheme.push_back(std::move(m));
  }
  for (const auto& t : p.triples()) {
    const auto key = t.key();
    if (!std::all_of(by_scheme.begin(), by_scheme.end(), [&](const auto& m) { return m.count(key) > 0; })) continue;
    out.keys.push_back(key);
    std::vector<double> configuration_slopes;
    for (const auto& m : by_scheme) {
      const auto* r = m.at(key);
      out.mean_slopes[key].push_back(r->trend.slope_mean);
      configuration_slopes.insert(configuration_slopes.end(), r->trend.per_seed_slopes.begin(),
                                  r->trend.per_seed_slopes.end());
    }
    out.stable[key] = configuration_slopes.size() >= 2 ? classify_stability(configuration_slopes).stable
                                                       : configuration_slopes.front() != 0.0;
  }
  if (out.keys.empty()) throw Error("no triple is usable under every slicing scheme");
  std::set<std::string> unstable;
  for (const auto& [k, s] : out.stable)
    if (!s) unstable.insert(k);
  for (std::size_t i = 1; i < out.schemes.size(); ++i) {
    std::map<std::string, double> a, b;
    for (const auto& k : out.keys) {
      a[k] = out.mean_slopes[k][0];
      b[k] = out.mean_slopes[k][i];
    }
    out.preservation.push_back({out.schemes[i], sign_preservation_rate(a, b, unstable)});
  }
  return out;
}

std::string format_slicing_ablation(const SlicingAblation& s) {
  std::string out = "target,c1,c2,scheme,slope_mean,stable\n";
  for (const auto& k : s.keys)
    for (std::size_t i = 0; i < s.schemes.size(); ++i)
      out += k + "," + csv_field(s.schemes[i]) + "," + format_real(s.mean_slopes.at(k)[i]) + "," +
             flag(s.stable.at(k)) + "\n";
  out += "# summary: scheme,rate,agreeing,total,rate_excluding_unstable,agreeing_excluding_unstable,"
         "total_excluding_unstable\n";
  for (const auto& p : s.preservation)
    out += "# " + csv_field(p.scheme) + "," + format_real(p.rate.rate) + "," + std::to_string(p.rate.agreeing) + "," +
           std::to_string(p.rate.total) + "," + format_real(p.rate.rate_excluding_unstable) + "," +
           std::to_string(p.rate.agreeing_excluding_unstable) + "," + std::to_string(p.rate.total_excluding_unstable) +
           "\n";
  return out;
}

AcceptanceAblation ablate_acceptance(Pipeline& p) {
  const auto& ac = p.acceptance_embedding(true);
  const auto& nac = p.acceptance_embedding(false);
  const double eps = p.config().epsilon;
  AcceptanceAblation out;
  for (const auto& t : p.triples()) {
    std::string missing;
    for (const auto* w : {&t.target, &t.c1, &t.c2}) {
      if (!ac.find(*w)) missing += " " + *w + "@accepted";
      if (!nac.find(*w)) missing += " " + *w + "@not-accepted";
    }
    if (!missing.empty()) {
      out.skipped.push_back({t, "missing:" + missing});
      continue;
    }
    AcceptanceRow r;
    r.triple = t;
    r.ac_c1 = cosine(ac.vector(t.target), ac.vector(t.c1));
    r.ac_c2 = cosine(ac.vector(t.target), ac.vector(t.c2));
    r.nac_c1 = cosine(nac.vector(t.target), nac.vector(t.c1));
    r.nac_c2 = cosine(nac.vector(t.target), nac.vector(t.c2));
    r.ac_ratio = std::max(eps, r.ac_c1) / std::max(eps, r.ac_c2);
    r.nac_ratio = std::max(eps, r.nac_c1) / std::max(eps, r.nac_c2);
    out.rows.push_back(r);
  }
  if (out.rows.empty()) throw Error("no triple is usable in both acceptance sub-corpora");
  std::vector<double> d1, d2, dr;
  for (const auto& r : out.rows) {
    d1.push_back(r.ac_c1 - r.nac_c1);
    d2.push_back(r.ac_c2 - r.nac_c2);
    dr.push_back(r.ac_ratio - r.nac_ratio);
  }
  out.c1_test = wilcoxon_signed_rank(d1);
  out.c2_test = wilcoxon_signed_rank(d2);
  out.ratio_test = wilcoxon_signed_rank(dr);
  return out;
}

std::string format_acceptance_ablation(const AcceptanceAblation& a) {
  std::string out = "target,c1,c2,cos_c1_ac,cos_c1_nac,cos_c2_ac,cos_c2_nac,ratio_ac,ratio_nac\n";
  for (const auto& r : a.rows)
    out += triple_columns(r.triple) + "," + format_real(r.ac_c1) + "," + format_real(r.nac_c1) + "," +
           format_real(r.ac_c2) + "," + format_real(r.nac_c2) + "," + format_real(r.ac_ratio) + "," +
           format_real(r.nac_ratio) + "\n";
  out += "# summary: quantity,W,p_value,method,n,degenerate\n";
  const auto line = [&](const char* name, const TestResult& t) {
    out += std::string("# ") + name + "," + format_real(t.statistic) + "," + format_real(t.p_value) + "," +
           (t.method == TestMethod::exact ? "exact" : "normal-approximation") + "," + std::to_string(t.n1) + "," +
           flag(t.degenerate) + "\n";
  };
  line("cos_c1", a.c1_test);
  line("cos_c2", a.c2_test);
  line("ratio", a.ratio_test);
  for (const auto& s : a.skipped) out += "# skipped " + s.triple.key() + ": " + s.reason + "\n";
  return out;
}

// --- plots -------------------------------------------------------------------

std::string render_trajectory_plot(const AnalysisResult& a, const TripleResult& r) {
  TrajectoryPlot plot;
  plot.title = r.triple.target + ": " + r.triple.c1 + " (+) vs " + r.triple.c2 + " (-)";
  plot.slice_labels = a.slice_labels;
  const std::size_t n = a.slice_labels.size();
  plot.values.assign(n, 0.0);
  plot.clamped.assign(n, false);
  for (const auto& s : r.series)
    for (std::size_t t = 0; t < n; ++t) {
      plot.values[t] += s.points[t].d_rel / static_cast<double>(r.series.size());
      if (s.points[t].clamped_c1 || s.points[t].clamped_c2) plot.clamped[t] = true;
    }
  plot.fit = {r.trend.slope_mean, r.trend.intercept};
  return render_trajectory_svg(plot);
}

std::string render_pca_plot(Pipeline& p, const TripleResult& r) {
  const auto seed = p.config().seeds.front();
  const auto& slices = p.aligned(p.config().slicing_scheme, seed);
  const auto& base = p.base_embedding(seed);
  const auto& c = p.corpus();
  std::vector<std::vector<double>> rows;
  for (const auto& e : slices) {
    const auto v = e.vector(r.triple.target);
    rows.emplace_back(v.begin(), v.end());
  }
  for (const auto* w : {&r.triple.c1, &r.triple.c2}) {
    const auto v = base.vector(*w);
    rows.emplace_back(v.begin(), v.end());
  }
  const auto pca = pca_2d(rows);
  ScatterPlot plot;
  plot.title = r.triple.target + " across slices, with " + r.triple.c1 + " and " + r.triple.c2;
  char buf[64];
  std::snprintf(buf, sizeof buf, "PC1 (%.1f%%)", 100.0 * pca.explained[0]);
  plot.x_label = buf;
  std::snprintf(buf, sizeof buf, "PC2 (%.1f%%)", 100.0 * pca.explained[1]);
  plot.y_label = buf;
  for (std::size_t i = 0; i < slices.size(); ++i)
    plot.points.push_back({c.slices[i].label, pca.points[i], PointKind::trajectory});
  plot.points.push_back({r.triple.c1, pca.points[slices.size()], PointKind::coordinate});
  plot.points.push_back({r.triple.c2, pca.points[slices.size() + 1], PointKind::coordinate});
  return render_scatter_svg(plot);
}

std::vector<fs::path> emit_plots(Pipeline& p, const std::vector<std::string>& keys) {
  const auto& a = p.analyze();
  std::vector<const TripleResult*> chosen;
  if (keys.empty()) {
    for (const auto& r : a.triples) chosen.push_back(&r);
  } else {
    for (const auto& k : keys) {
      const auto it = std::find_if(a.triples.begin(), a.triples.end(), [&](const auto& r) { return r.triple.key() == k; });
      if (it == a.triples.end()) {
        const bool skipped = std::any_of(a.skipped.begin(), a.skipped.end(), [&](const auto& s) { return s.triple.key() == k; });
        throw ValidationError(skipped ? "triple '" + k + "' is unusable on this corpus" : "unknown triple '" + k + "'");
      }
      chosen.push_back(&*it);
    }
  }
  std::vector<fs::path> out;
  for (const auto* r : chosen) {
    const std::string stem = r->triple.target + "_" + r->triple.c1 + "_" + r->triple.c2;
    const fs::path traj = fs::path("plots") / ("trajectory_" + stem + ".svg");
    const fs::path pca = fs::path("plots") / ("pca_" + stem + ".svg");
    write_report(p.config().output_dir, traj, render_trajectory_plot(a, *r));
    write_report(p.config().output_dir, pca, render_pca_plot(p, *r));
    out.push_back(traj);
    out.push_back(pca);
  }
  return out;
}

// --- full run ----------------------------------------------------------------

RunReport run_pipeline(const RunConfig& config, std::ostream* log) {
  config.validate();
  Pipeline p(config, log);
  p.triples();
  parse_scheme(config.slicing_scheme, p.year_range());
  RunReport report;
  report.config_hash = config.hash();
  const auto& out_dir = config.output_dir;
  const auto emit = [&](const fs::path& rel, const std::string& text) {
    write_report(out_dir, rel, text);
    report.reports.push_back(rel);
  };

  stage("ingest", [&] { return p.corpus().slices.size(); });
  stage("train", [&] {
    p.train_all(config.slicing_scheme);
    return 0;
  });
  stage("align", [&] {
    for (const auto seed : config.seeds) p.aligned(config.slicing_scheme, seed);
    return 0;
  });
  const auto& analysis = stage("analyze", [&]() -> const AnalysisResult& { return p.analyze(); });
  for (const auto& s : analysis.skipped) report.warnings.push_back("skipped " + s.triple.key() + ": " + s.reason);
  if (analysis.triples.empty()) throw StageError("analyze", "no triple is usable on this corpus");
  emit("trend_report.csv", format_trend_report(analysis));
  emit("trajectories.csv", format_trajectories(analysis));
  emit("fits.csv", format_fits(analysis));
  emit("skipped_triples.csv", format_skipped(analysis));
  {
    std::size_t short_maps = 0, fewest = 0;
    for (const auto& r : p.alignment_records())
      if (r.shortfall) fewest = short_maps++ ? std::min(fewest, r.anchors) : r.anchors;
    if (short_maps)
      report.warnings.push_back(std::to_string(short_maps) + " of " + std::to_string(p.alignment_records().size()) +
                                " projections used fewer anchors than anchor_count " +
                                std::to_string(config.anchor_count) + " (fewest " + std::to_string(fewest) + ")");
  }
  emit("alignment.csv", format_alignment(p.alignment_records(), out_dir));

  const auto candidates = stage("discover", [&] { return run_discovery(p); });
  {
    std::string text = "word\n";
    for (const auto& w : candidates) text += w + "\n";
    emit("candidates.csv", text);
  }
  std::vector<std::string> dropped;
  const auto stability = stage("stability", [&] { return run_stability(p, &dropped); });
  for (const auto& w : dropped) report.warnings.push_back("stability: '" + w + "' is outside the neighbour universe");
  emit("stability_report.csv", format_stability_report(stability));

  const auto plots = stage("plot", [&] { return emit_plots(p); });
  report.reports.insert(report.reports.end(), plots.begin(), plots.end());

  std::size_t stable = 0;
  for (const auto& r : analysis.triples) stable += r.trend.stable ? 1 : 0;
  std::string summary = "config_hash " + report.config_hash + "\n";
  summary += "slicing_scheme " + config.slicing_scheme + "\n";
  summary += "slices";
  for (const auto& l : analysis.slice_labels) summary += " " + l;
  summary += "\nseeds";
  for (const auto s : config.seeds) summary += " " + std::to_string(s);
  summary += "\ntriples " + std::to_string(analysis.triples.size()) + " usable, " +
             std::to_string(analysis.skipped.size()) + " skipped, " + std::to_string(stable) + " stable, " +
             std::to_string(analysis.triples.size() - stable) + " unstable\n";
  for (const auto& r : report.reports) summary += "report " + r.generic_string() + "\n";
  std::set<std::string> artifacts;
  for (const auto& a : p.artifacts()) artifacts.insert(fs::relative(a, out_dir).generic_string());
  for (const auto& a : artifacts) summary += "artifact " + a + "\n";
  for (const auto& w : report.warnings) summary += "warning " + w + "\n";
  write_report(out_dir, "run_summary.txt", summary);
  report.reports.push_back("run_summary.txt");
  report.counters = p.counters();
  p.log("run: " + std::to_string(report.counters.trained) + " embeddings trained, " +
        std::to_string(report.counters.reused) + " reused");
  return report;
}

}  // namespace semcoord
