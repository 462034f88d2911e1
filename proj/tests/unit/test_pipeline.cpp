#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <regex>

#include "../support.hpp"
#include "semcoord/config.hpp"
#include "semcoord/error.hpp"
#include "semcoord/pipeline.hpp"
#include "semcoord/svg.hpp"
#include "semcoord/synthetic.hpp"

using namespace semcoord;
using testing_support::kDataDir;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

RunConfig fixture_config(const fs::path& out) {
  auto c = load_run_config(kDataDir / "fixture" / "config.json");
  c.output_dir = out;
  return c;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SEMCOORD_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Small synthetic corpus on disk with its drift triples and a quick training setup.
RunConfig synthetic_setup(const fs::path& dir, synthetic::Config sc) {
  RunConfig c;
  c.manifest = synthetic::write_corpus(sc, dir / "corpus");
  spit(dir / "triples.csv", format_triples(synthetic::drift_triples(sc)));
  c.triples = dir / "triples.csv";
  c.training.dimension = 16;
  c.training.epochs = 3;
  c.training.window = 3;
  c.training.negatives = 3;
  c.seeds = {0};
  c.anchor_count = 100;
  c.output_dir = dir / "out";
  return c;
}

}  // namespace

TEST(RunPipeline, FixtureMatchesGoldenReports) {
  TempDir dir;
  const auto report = run_pipeline(fixture_config(dir / "out"));
  EXPECT_EQ(slurp(dir / "out" / "trend_report.csv"), slurp(kDataDir / "golden" / "fixture_trend_report.csv"));
  EXPECT_EQ(slurp(dir / "out" / "plots" / "trajectory_driftba_bababa_bebaba.svg"),
            slurp(kDataDir / "golden" / "fixture_trajectory_driftba.svg"));
  EXPECT_EQ(slurp(dir / "out" / "plots" / "pca_driftba_bababa_bebaba.svg"),
            slurp(kDataDir / "golden" / "fixture_pca_driftba.svg"));
  EXPECT_EQ(report.warnings.size(), 2u);
  EXPECT_NE(slurp(dir / "out" / "skipped_triples.csv").find("absentword"), std::string::npos);
}

TEST(RunPipeline, EveryTrendRowTracesToOneTriple) {
  TempDir dir;
  run_pipeline(fixture_config(dir / "out"));
  const auto text = slurp(dir / "out" / "trend_report.csv");
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    const auto key = line.substr(0, line.find(',', line.find(',', line.find(',') + 1) + 1));
    EXPECT_TRUE(seen.insert(key).second) << key;
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(RunPipeline, MissingManifestFailsBeforeAnyWork) {
  TempDir dir;
  auto c = fixture_config(dir / "out");
  c.manifest = dir / "nope.tsv";
  EXPECT_THROW(run_pipeline(c), ValidationError);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(RunPipeline, RerunReusesArtifactsAndReproducesBytes) {
  TempDir dir;
  const auto c = fixture_config(dir / "out");
  const auto first = run_pipeline(c);
  std::map<fs::path, std::string> bytes;
  for (const auto& r : first.reports) bytes[r] = slurp(dir / "out" / r);
  EXPECT_EQ(first.counters.trained, 6u);

  const auto second = run_pipeline(c);
  EXPECT_EQ(second.counters.trained, 0u);
  EXPECT_EQ(second.counters.reused, 6u);
  EXPECT_EQ(second.counters.fitted, 0u);
  EXPECT_EQ(second.reports, first.reports);
  for (const auto& [r, b] : bytes) EXPECT_EQ(slurp(dir / "out" / r), b) << r;
}

TEST(RunPipeline, CorruptedArtifactIsRecomputed) {
  TempDir dir;
  const auto c = fixture_config(dir / "out");
  run_pipeline(c);
  const auto before = slurp(dir / "out" / "trend_report.csv");
  fs::path victim;
  for (const auto& e : fs::directory_iterator(dir / "out" / "cache"))
    if (e.path().filename().string().starts_with("embedding-") && e.path().extension() == ".txt") {
      victim = e.path();
      break;
    }
  ASSERT_FALSE(victim.empty());
  spit(victim, "1 1\nx 0\n");
  const auto again = run_pipeline(c);
  EXPECT_EQ(again.counters.trained, 1u);
  EXPECT_EQ(slurp(dir / "out" / "trend_report.csv"), before);
}

TEST(RunPipeline, TwoOutputDirectoriesAgree) {
  TempDir dir;
  const auto a = run_pipeline(fixture_config(dir / "a"));
  run_pipeline(fixture_config(dir / "b"));
  for (const auto& r : a.reports) EXPECT_EQ(slurp(dir / "a" / r), slurp(dir / "b" / r)) << r;
}

TEST(RunPipeline, NoUsableTripleIsStageFailure) {
  TempDir dir;
  auto c = fixture_config(dir / "out");
  spit(dir / "bad.csv", "driftba,bababa,absentword,unclassified\n");
  c.triples = dir / "bad.csv";
  EXPECT_THROW(run_pipeline(c), StageError);
}

TEST(ArtifactStore, CommitLookupAndStaleRemoval) {
  TempDir dir;
  const ArtifactStore store(dir / "cache");
  EXPECT_FALSE(store.lookup("thing", "abc123", ".txt"));
  const auto path = store.commit("thing", "abc123", ".txt", [](const fs::path& p) { spit(p, "hello"); });
  EXPECT_EQ(slurp(path), "hello");
  EXPECT_EQ(store.lookup("thing", "abc123", ".txt"), path);
  EXPECT_FALSE(store.lookup("thing", "abc124", ".txt"));
  spit(path, "tampered");
  EXPECT_FALSE(store.lookup("thing", "abc123", ".txt"));
  EXPECT_FALSE(fs::exists(path));
}

TEST(Pipeline, DuplicateTriplesRejected) {
  TempDir dir;
  auto c = fixture_config(dir / "out");
  spit(dir / "dup.csv", "driftba,bababa,bebaba,unclassified\ndriftba,bababa,bebaba,language-usage\n");
  c.triples = dir / "dup.csv";
  Pipeline p(c);
  EXPECT_THROW(p.triples(), ValidationError);
}

TEST(Pipeline, UnusableTriplesAreSkippedWithReason) {
  TempDir dir;
  Pipeline p(fixture_config(dir / "out"));
  const auto& a = p.analyze();
  EXPECT_EQ(a.triples.size(), 4u);
  ASSERT_EQ(a.skipped.size(), 1u);
  EXPECT_NE(a.skipped[0].reason.find("(absentword, 2012)"), std::string::npos);
}

TEST(Pipeline, ProjectionsMapSlicesIntoBaseSpace) {
  TempDir dir;
  Pipeline p(fixture_config(dir / "out"));
  const auto& aligned = p.aligned("1-year", 0);
  ASSERT_EQ(aligned.size(), 5u);
  const auto& base = p.base_embedding(0);
  const auto& raw = p.slice_embedding("1-year", 0, 0);
  double before = 0.0, after = 0.0;
  for (const auto& w : {"we", "the", "bababa", "bebaba"}) {
    before += 1.0 - cosine(raw.vector(w), base.vector(w));
    after += 1.0 - cosine(aligned[0].vector(w), base.vector(w));
  }
  EXPECT_LT(after, before);
  EXPECT_EQ(p.alignment_records().size(), 5u);
}

TEST(AblateSlicing, SameSchemePreservesEverySign) {
  TempDir dir;
  Pipeline p(fixture_config(dir / "out"));
  const auto a = ablate_slicing(p, {"1-year"});
  ASSERT_EQ(a.preservation.size(), 1u);
  EXPECT_EQ(a.preservation[0].rate.rate, 1.0);
  EXPECT_EQ(a.keys.size(), 4u);
  EXPECT_NE(format_slicing_ablation(a).find("# summary"), std::string::npos);
  EXPECT_THROW(ablate_slicing(p, {}), ValidationError);
}

TEST(AblateSlicing, TwoYearSchemeRuns) {
  TempDir dir;
  Pipeline p(fixture_config(dir / "out"));
  const auto a = ablate_slicing(p, {"2-year"});
  EXPECT_EQ(p.corpus("2-year").slices.size(), 2u);
  EXPECT_GE(a.preservation[0].rate.rate, 0.0);
  EXPECT_LE(a.preservation[0].rate.rate, 1.0);
}

TEST(AblateAcceptance, IdenticalSubCorporaAreDegenerate) {
  TempDir dir;
  const auto entries = read_manifest(kDataDir / "fixture" / "manifest.tsv");
  std::vector<ManifestEntry> doubled;
  for (const auto& e : entries) {
    doubled.push_back({e.id + "-a", e.year, true, e.body_path});
    doubled.push_back({e.id + "-n", e.year, false, e.body_path});
  }
  write_manifest(dir / "manifest.tsv", doubled);
  auto c = fixture_config(dir / "out");
  c.manifest = dir / "manifest.tsv";
  Pipeline p(c);
  const auto a = ablate_acceptance(p);
  EXPECT_EQ(a.rows.size(), 4u);
  for (const auto* t : {&a.c1_test, &a.c2_test, &a.ratio_test}) {
    EXPECT_TRUE(t->degenerate);
    EXPECT_EQ(t->p_value, 1.0);
  }
}

TEST(AblateAcceptance, MissingFlagsAreRejected) {
  TempDir dir;
  auto entries = read_manifest(kDataDir / "fixture" / "manifest.tsv");
  entries[3].accepted.reset();
  write_manifest(dir / "manifest.tsv", entries);
  auto c = fixture_config(dir / "out");
  c.manifest = dir / "manifest.tsv";
  Pipeline p(c);
  EXPECT_THROW(ablate_acceptance(p), ValidationError);
}

TEST(AblateAcceptance, PlantedDivergenceIsDetected) {
  TempDir dir;
  synthetic::Config sc;
  sc.seed = 5;
  sc.years = 2;
  sc.documents_per_year = 60;
  sc.sentences_per_document = 40;
  sc.drift_words = 8;
  sc.stationary_words = 2;
  sc.background_topics = 2;
  sc.accepted_divergence = true;
  Pipeline p(synthetic_setup(dir.path(), sc));
  const auto a = ablate_acceptance(p);
  EXPECT_EQ(a.rows.size(), 8u);
  EXPECT_LT(a.c1_test.p_value, 0.05);
  std::size_t larger = 0;
  for (const auto& r : a.rows) larger += r.ac_c1 > r.nac_c1 ? 1 : 0;
  EXPECT_EQ(larger, a.rows.size());
  EXPECT_NE(format_acceptance_ablation(a).find("# cos_c1,"), std::string::npos);
}

TEST(Plots, ConstantSeriesGivesHorizontalFitLine) {
  TrajectoryPlot plot;
  plot.title = "flat";
  plot.slice_labels = {"2007", "2008", "2009", "2010"};
  plot.values = {0.4, 0.4, 0.4, 0.4};
  plot.fit = {0.0, 0.4};
  const auto svg = render_trajectory_svg(plot);
  const std::regex fit_re("<line class=\"fit\" x1=\"[^\"]+\" y1=\"([^\"]+)\" x2=\"[^\"]+\" y2=\"([^\"]+)\"");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, fit_re));
  EXPECT_EQ(m[1].str(), m[2].str());
  const std::regex point_re("<circle class=\"point\" cx=\"[^\"]+\" cy=\"([^\"]+)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), point_re); it != std::sregex_iterator(); ++it)
    EXPECT_EQ((*it)[1].str(), m[1].str());
}

TEST(Plots, PcaOfTwelveSlicesHasFourteenLabeledPoints) {
  TempDir dir;
  synthetic::Config sc;
  sc.years = 12;
  sc.documents_per_year = 4;
  sc.sentences_per_document = 40;
  sc.drift_words = 1;
  sc.stationary_words = 1;
  sc.background_topics = 1;
  auto c = synthetic_setup(dir.path(), sc);
  c.training.dimension = 8;
  c.training.epochs = 2;
  Pipeline p(c);
  const auto& a = p.analyze();
  ASSERT_FALSE(a.triples.empty());
  const auto svg = render_pca_plot(p, a.triples.front());
  EXPECT_EQ(count(svg, "class=\"point\""), 14u);
  EXPECT_EQ(count(svg, "class=\"label\""), 14u);
  EXPECT_EQ(count(svg, "<rect class=\"point\""), 2u);
}

TEST(Plots, UnknownOrUnusableTripleRejected) {
  TempDir dir;
  Pipeline p(fixture_config(dir / "out"));
  EXPECT_THROW(emit_plots(p, {"nothing,here,at"}), ValidationError);
  EXPECT_THROW(emit_plots(p, {"driftba,bababa,absentword"}), ValidationError);
  EXPECT_EQ(emit_plots(p, {"driftba,bababa,bebaba"}).size(), 2u);
}

TEST(Plots, XmlEscaping) { EXPECT_EQ(xml_escape("a<b & \"c\" 'd'>"), "a&lt;b &amp; &quot;c&quot; &apos;d&apos;&gt;"); }

TEST(Stability, FixturePopulations) {
  TempDir dir;
  Pipeline p(fixture_config(dir / "out"));
  const auto report = run_stability(p);
  ASSERT_EQ(report.summaries.size(), 2u);
  std::set<std::string> targets, coords;
  for (const auto& r : report.rows) (r.population == "target" ? targets : coords).insert(r.word);
  EXPECT_EQ(targets, (std::set<std::string>{"driftba", "driftbe", "driftbi", "stillba"}));
  for (const auto& w : coords) EXPECT_FALSE(targets.contains(w));
  for (const auto& r : report.rows) {
    EXPECT_GT(r.score, 0.0);
    EXPECT_LE(r.score, 1.0);
  }
}

TEST(RunConfig, JsonResolvesRelativePaths) {
  const auto c = load_run_config(kDataDir / "fixture" / "config.json");
  EXPECT_EQ(c.manifest, kDataDir / "fixture" / "manifest.tsv");
  EXPECT_EQ(c.training.dimension, 16);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0}));
  EXPECT_EQ(c.stability_k, (std::vector<std::size_t>{5, 10}));
  EXPECT_EQ(c.alignment_mode, AlignmentMode::relaxed);
  EXPECT_EQ(c.epsilon, 1e-6);
}

TEST(RunConfig, UnknownKeysAndBadValuesRejected) {
  EXPECT_THROW(parse_run_config(R"({"manifesto": "x"})"), ValidationError);
  EXPECT_THROW(parse_run_config(R"({"training": {"dims": 3}})"), ValidationError);
  EXPECT_THROW(parse_run_config(R"({"seeds": "zero"})"), ValidationError);
  EXPECT_THROW(parse_run_config("not json"), ValidationError);
}

TEST(RunConfig, ValidateChecksPathsAndValues) {
  auto c = load_run_config(kDataDir / "fixture" / "config.json");
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.seeds.clear();
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.triples = "/nonexistent/triples.csv";
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.epsilon = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.slicing_scheme = "fortnightly";
  bad.year_range = YearRange{2007, 2016};
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(RunPipeline, BadSchemeFailsBeforeAnyWork) {
  TempDir dir;
  auto c = fixture_config(dir / "out");
  c.slicing_scheme = "fortnightly";
  EXPECT_THROW(run_pipeline(c), ValidationError);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(RunConfig, HashCoversNumericFieldsOnly) {
  const auto c = load_run_config(kDataDir / "fixture" / "config.json");
  auto moved = c;
  moved.output_dir = "/somewhere/else";
  EXPECT_EQ(moved.hash(), c.hash());
  auto eps = c;
  eps.epsilon = 1e-5;
  EXPECT_NE(eps.hash(), c.hash());
  auto dim = c;
  dim.training.dimension = 17;
  EXPECT_NE(dim.hash(), c.hash());
  auto seeds = c;
  seeds.seeds = {0, 7};
  EXPECT_NE(seeds.hash(), c.hash());
  auto mode = c;
  mode.alignment_mode = AlignmentMode::orthogonal;
  EXPECT_NE(mode.hash(), c.hash());
}

TEST(RunConfig, DumpRoundTrips) {
  const auto c = load_run_config(kDataDir / "fixture" / "config.json");
  const auto back = parse_run_config(dump_run_config(c));
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(back.output_dir, c.output_dir);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const std::string cfg = (kDataDir / "fixture" / "config.json").string();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("run --no-such-flag"), 2);
  EXPECT_EQ(run_cli("run --config " + cfg + " --manifest " + (dir / "missing.tsv").string()), 2);
  spit(dir / "bad.csv", "driftba,bababa,absentword,unclassified\n");
  EXPECT_EQ(run_cli("run -q --config " + cfg + " --triples " + (dir / "bad.csv").string() + " --output-dir " +
                    (dir / "o1").string()),
            3);
  EXPECT_EQ(run_cli("analyze -q --config " + cfg + " --output-dir " + (dir / "o2").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o2" / "trend_report.csv"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  TempDir dir;
  const std::string cfg = (kDataDir / "fixture" / "config.json").string();
  ASSERT_EQ(run_cli("run -q --config " + cfg + " --output-dir " + (dir / "o").string() + " --epsilon 0.001"), 0);
  auto expected = load_run_config(kDataDir / "fixture" / "config.json");
  expected.epsilon = 0.001;
  const auto summary = slurp(dir / "o" / "run_summary.txt");
  EXPECT_TRUE(summary.starts_with("config_hash " + expected.hash() + "\n")) << summary.substr(0, 80);
}

TEST(Cli, SynthWritesCorpusAndTriples) {
  TempDir dir;
  ASSERT_EQ(run_cli("synth --out " + (dir / "c").string() + " --years 3 --documents-per-year 2 --drift-words 2"), 0);
  EXPECT_EQ(read_manifest(dir / "c" / "manifest.tsv").size(), 6u);
  EXPECT_EQ(read_triples(dir / "c" / "triples.csv").size(), 2u);
}
