#include "semcoord/coordinates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "semcoord/error.hpp"

namespace semcoord {

namespace {

int sign(double x) { return (x > 0) - (x < 0); }

std::string strip(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string to_string(Category c) {
  switch (c) {
    case Category::research_interest: return "research-interest";
    case Category::language_usage: return "language-usage";
    case Category::academic_activity: return "academic-activity";
    case Category::unclassified: return "unclassified";
  }
  return "unclassified";
}

Category parse_category(std::string_view s) {
  if (s == "research-interest") return Category::research_interest;
  if (s == "language-usage") return Category::language_usage;
  if (s == "academic-activity") return Category::academic_activity;
  if (s == "unclassified" || s.empty()) return Category::unclassified;
  throw ValidationError("unknown category '" + std::string(s) + "'");
}

std::string to_string(Direction d) { return d == Direction::toward_c1 ? "toward-c1" : "toward-c2"; }

void validate(const TargetCoordinate& t) {
  if (t.target.empty() || t.c1.empty() || t.c2.empty())
    throw ValidationError("triple '" + t.key() + "' has an empty word");
  if (t.target == t.c1 || t.target == t.c2 || t.c1 == t.c2)
    throw ValidationError("triple '" + t.key() + "' repeats a word");
}

std::size_t TrajectorySeries::clamp_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const auto& p) { return p.clamped_c1 || p.clamped_c2; }));
}

std::vector<double> TrajectorySeries::values() const {
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.d_rel);
  return v;
}

TrajectorySeries coordinate_position(std::span<const EmbeddingMatrix> aligned, const TargetCoordinate& triple,
                                     double epsilon) {
  validate(triple);
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  std::string missing;
  for (const auto& emb : aligned) {
    for (const auto* w : {&triple.target, &triple.c1, &triple.c2}) {
      if (!emb.find(*w)) missing += (missing.empty() ? "" : ", ") + ("(" + *w + ", " + emb.provenance().slice_label + ")");
    }
  }
  if (!missing.empty()) throw Error("triple '" + triple.key() + "' unusable, missing: " + missing);

  TrajectorySeries series;
  series.epsilon = epsilon;
  for (const auto& emb : aligned) {
    const auto w = emb.vector(triple.target);
    TrajectoryPoint p;
    p.slice_label = emb.provenance().slice_label;
    p.cos_c1 = cosine(w, emb.vector(triple.c1));
    p.cos_c2 = cosine(w, emb.vector(triple.c2));
    p.clamped_c1 = p.cos_c1 < epsilon;
    p.clamped_c2 = p.cos_c2 < epsilon;
    p.d_rel = std::log(std::max(epsilon, p.cos_c1)) - std::log(std::max(epsilon, p.cos_c2));
    series.points.push_back(std::move(p));
  }
  return series;
}

LineFit fit_trend(const TrajectorySeries& series) {
  if (series.points.size() < 2) throw Error("fit_trend: need at least two time slices");
  std::vector<double> t(series.points.size());
  std::iota(t.begin(), t.end(), 1.0);
  const auto d = series.values();
  return least_squares_line(t, d);
}

double TrendFit::magnitude() const { return std::abs(slope_mean); }

TrendFit aggregate_seeds(std::span<const LineFit> fits) {
  if (fits.empty()) throw Error("aggregate_seeds: no fits");
  TrendFit out;
  const double n = static_cast<double>(fits.size());
  for (const auto& f : fits) {
    out.per_seed_slopes.push_back(f.slope);
    out.slope_mean += f.slope / n;
    out.intercept += f.intercept / n;
  }
  out.slope = out.slope_mean;
  if (fits.size() > 1) {
    double ss = 0.0;
    for (double s : out.per_seed_slopes) ss += (s - out.slope_mean) * (s - out.slope_mean);
    out.slope_std = std::sqrt(ss / (n - 1.0));
  }
  out.direction = out.slope_mean > 0 ? Direction::toward_c1 : Direction::toward_c2;
  const int agg = sign(out.slope_mean);
  out.stable = agg != 0 && std::all_of(out.per_seed_slopes.begin(), out.per_seed_slopes.end(),
                                       [agg](double s) { return sign(s) == agg; });
  return out;
}

StabilityVerdict classify_stability(std::span<const double> slopes) {
  if (slopes.size() < 2) throw Error("classify_stability: need at least two configurations");
  StabilityVerdict v;
  for (double s : slopes) v.mean_slope += s;
  v.mean_slope /= static_cast<double>(slopes.size());
  v.direction = v.mean_slope > 0 ? Direction::toward_c1 : Direction::toward_c2;
  const int agg = sign(v.mean_slope);
  v.stable = agg != 0 && std::all_of(slopes.begin(), slopes.end(), [agg](double s) { return sign(s) == agg; });
  return v;
}

SignPreservation sign_preservation_rate(const std::map<std::string, double>& a,
                                        const std::map<std::string, double>& b,
                                        const std::set<std::string>& unstable) {
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) { return x.first == y.first; }))
    throw Error("sign_preservation_rate: the two schemes cover different triples");
  if (a.empty()) throw Error("sign_preservation_rate: no triples");
  SignPreservation r;
  for (const auto& [key, slope] : a) {
    const bool agree = sign(slope) == sign(b.at(key));
    ++r.total;
    r.agreeing += agree;
    if (!unstable.contains(key)) {
      ++r.total_excluding_unstable;
      r.agreeing_excluding_unstable += agree;
    }
  }
  r.rate = static_cast<double>(r.agreeing) / static_cast<double>(r.total);
  r.rate_excluding_unstable = r.total_excluding_unstable == 0
                                  ? 1.0
                                  : static_cast<double>(r.agreeing_excluding_unstable) /
                                        static_cast<double>(r.total_excluding_unstable);
  return r;
}

std::vector<TargetCoordinate> parse_triples(std::string_view text) {
  std::vector<TargetCoordinate> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = strip(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(trimmed);
    for (std::string part; std::getline(ss, part, ',');) f.push_back(strip(part));
    if (f.size() == 3) f.emplace_back();
    if (f.size() != 4)
      throw ValidationError("triples line " + std::to_string(lineno) + ": expected target,c1,c2,category");
    if (out.empty() && f[0] == "target" && f[1] == "c1") continue;
    TargetCoordinate t{f[0], f[1], f[2], parse_category(f[3])};
    validate(t);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TargetCoordinate> read_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read triples file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_triples(ss.str());
}

std::string format_triples(std::span<const TargetCoordinate> triples) {
  std::string out;
  for (const auto& t : triples) out += t.key() + "," + to_string(t.category) + "\n";
  return out;
}

}  // namespace semcoord
