#include "semcoord/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "semcoord/error.hpp"
#include "semcoord/hashing.hpp"

namespace semcoord {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ValidationError("unknown config key '" + where + key + "'");
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

void read_training(const json& j, TrainingConfig& t) {
  if (!j.is_object()) throw ValidationError("config field 'training' must be an object");
  reject_unknown(j,
                 {"dimension", "min_count", "window", "negatives", "epochs", "learning_rate", "min_learning_rate",
                  "subsample", "architecture", "workers"},
                 "training.");
  if (j.contains("dimension")) t.dimension = get<int>(j, "dimension");
  if (j.contains("min_count")) t.min_count = get<std::uint64_t>(j, "min_count");
  if (j.contains("window")) t.window = get<int>(j, "window");
  if (j.contains("negatives")) t.negatives = get<int>(j, "negatives");
  if (j.contains("epochs")) t.epochs = get<int>(j, "epochs");
  if (j.contains("learning_rate")) t.learning_rate = get<double>(j, "learning_rate");
  if (j.contains("min_learning_rate")) t.min_learning_rate = get<double>(j, "min_learning_rate");
  if (j.contains("subsample")) t.subsample = get<double>(j, "subsample");
  if (j.contains("architecture")) t.architecture = parse_architecture(get<std::string>(j, "architecture"));
  if (j.contains("workers")) t.workers = get<int>(j, "workers");
}

}  // namespace

void RunConfig::validate() const {
  if (manifest.empty()) throw ValidationError("no corpus manifest given");
  if (!std::filesystem::is_regular_file(manifest))
    throw ValidationError("manifest not found: " + manifest.string());
  if (triples.empty()) throw ValidationError("no triples file given");
  if (!std::filesystem::is_regular_file(triples)) throw ValidationError("triples file not found: " + triples.string());
  if (year_range && year_range->first > year_range->last)
    throw ValidationError("year range " + year_range->label() + " is reversed");
  if (seeds.empty()) throw ValidationError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ValidationError("seeds must be distinct");
  training.validate();
  if (anchor_count < static_cast<std::size_t>(training.dimension))
    throw ValidationError("anchor_count " + std::to_string(anchor_count) + " is below the dimension " +
                          std::to_string(training.dimension));
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (stability_k.empty()) throw ValidationError("stability_k must list at least one K");
  for (auto k : stability_k)
    if (k < 1) throw ValidationError("stability_k values must be at least 1");
  if (candidate_pool < 1) throw ValidationError("candidate_pool must be at least 1");
  if (candidate_k < 1) throw ValidationError("candidate_k must be at least 1");
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
  if (output_dir.empty()) throw ValidationError("output_dir must not be empty");
  if (slicing_scheme.empty()) throw ValidationError("slicing_scheme must not be empty");
  if (year_range) parse_scheme(slicing_scheme, *year_range);
}

std::string RunConfig::canonical() const {
  TrainingConfig t = training;
  t.seed = 0;
  std::string s = "manifest=" + std::filesystem::absolute(manifest).lexically_normal().string();
  s += ";year_range=" + (year_range ? year_range->label() : std::string("auto"));
  s += ";slicing_scheme=" + slicing_scheme;
  s += ";training={" + t.canonical() + "}";
  s += ";seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "," : "") + std::to_string(seeds[i]);
  s += ";anchor_count=" + std::to_string(anchor_count);
  s += ";epsilon=" + fmt17(epsilon);
  s += ";alignment_mode=" + to_string(alignment_mode);
  s += ";triples=" + std::filesystem::absolute(triples).lexically_normal().string();
  s += ";stability_k=";
  for (std::size_t i = 0; i < stability_k.size(); ++i) s += (i ? "," : "") + std::to_string(stability_k[i]);
  s += ";candidate_pool=" + std::to_string(candidate_pool);
  s += ";candidate_k=" + std::to_string(candidate_k);
  s += ";neighbor_universe=" + std::to_string(neighbor_universe);
  s += ";ablation_schemes=";
  for (std::size_t i = 0; i < ablation_schemes.size(); ++i) s += (i ? "|" : "") + ablation_schemes[i];
  return s;
}

std::string RunConfig::hash() const { return sha256_hex(canonical()); }

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j,
                 {"manifest", "year_range", "slicing_scheme", "training", "seeds", "anchor_count", "epsilon",
                  "alignment_mode", "triples", "stability_k", "output_dir", "candidate_pool", "candidate_k",
                  "neighbor_universe", "ablation_schemes", "jobs"},
                 "");
  RunConfig c;
  if (j.contains("manifest")) c.manifest = resolve(get<std::string>(j, "manifest"), base_dir);
  if (j.contains("triples")) c.triples = resolve(get<std::string>(j, "triples"), base_dir);
  if (j.contains("output_dir")) c.output_dir = resolve(get<std::string>(j, "output_dir"), base_dir);
  if (j.contains("year_range")) {
    const auto r = get<std::vector<int>>(j, "year_range");
    if (r.size() != 2) throw ValidationError("config field 'year_range' must be [first, last]");
    c.year_range = YearRange{r[0], r[1]};
  }
  if (j.contains("slicing_scheme")) c.slicing_scheme = get<std::string>(j, "slicing_scheme");
  if (j.contains("training")) read_training(j.at("training"), c.training);
  if (j.contains("seeds")) c.seeds = get<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("anchor_count")) c.anchor_count = get<std::size_t>(j, "anchor_count");
  if (j.contains("epsilon")) c.epsilon = get<double>(j, "epsilon");
  if (j.contains("alignment_mode")) c.alignment_mode = parse_alignment_mode(get<std::string>(j, "alignment_mode"));
  if (j.contains("stability_k")) c.stability_k = get<std::vector<std::size_t>>(j, "stability_k");
  if (j.contains("candidate_pool")) c.candidate_pool = get<std::size_t>(j, "candidate_pool");
  if (j.contains("candidate_k")) c.candidate_k = get<std::size_t>(j, "candidate_k");
  if (j.contains("neighbor_universe")) c.neighbor_universe = get<std::size_t>(j, "neighbor_universe");
  if (j.contains("ablation_schemes")) c.ablation_schemes = get<std::vector<std::string>>(j, "ablation_schemes");
  if (j.contains("jobs")) c.jobs = get<int>(j, "jobs");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string dump_run_config(const RunConfig& c) {
  json t = {{"dimension", c.training.dimension},
            {"min_count", c.training.min_count},
            {"window", c.training.window},
            {"negatives", c.training.negatives},
            {"epochs", c.training.epochs},
            {"learning_rate", c.training.learning_rate},
            {"min_learning_rate", c.training.min_learning_rate},
            {"subsample", c.training.subsample},
            {"architecture", to_string(c.training.architecture)},
            {"workers", c.training.workers}};
  json j = {{"manifest", c.manifest.string()},
            {"slicing_scheme", c.slicing_scheme},
            {"training", t},
            {"seeds", c.seeds},
            {"anchor_count", c.anchor_count},
            {"epsilon", c.epsilon},
            {"alignment_mode", to_string(c.alignment_mode)},
            {"triples", c.triples.string()},
            {"stability_k", c.stability_k},
            {"output_dir", c.output_dir.string()},
            {"candidate_pool", c.candidate_pool},
            {"candidate_k", c.candidate_k},
            {"neighbor_universe", c.neighbor_universe},
            {"ablation_schemes", c.ablation_schemes},
            {"jobs", c.jobs}};
  if (c.year_range) j["year_range"] = {c.year_range->first, c.year_range->last};
  return j.dump(2) + "\n";
}

}  // namespace semcoord
