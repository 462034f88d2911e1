#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcoord/config.hpp"
#include "semcoord/discovery.hpp"
#include "semcoord/error.hpp"
#include "semcoord/pipeline.hpp"
#include "semcoord/synthetic.hpp"

namespace fs = std::filesystem;
using namespace semcoord;

namespace {

struct Flags {
  std::string config;
  std::string manifest;
  std::vector<int> year_range;
  std::string slicing_scheme;
  std::vector<std::uint64_t> seeds;
  std::size_t anchor_count = 0;
  double epsilon = 0;
  std::string alignment_mode;
  std::string triples;
  std::vector<std::size_t> stability_k;
  std::string output_dir;
  std::size_t candidate_pool = 0;
  std::size_t candidate_k = 0;
  std::size_t neighbor_universe = 0;
  std::vector<std::string> ablation_schemes;
  int jobs = 0;
  int dimension = 0;
  std::uint64_t min_count = 0;
  int window = 0;
  int negatives = 0;
  int epochs = 0;
  double learning_rate = 0;
  double min_learning_rate = 0;
  double subsample = 0;
  std::string architecture;
  int workers = 0;
};

void add_run_options(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON config file; flags override its values");
  app.add_option("--manifest", f.manifest, "corpus manifest (id, year, accepted, path)");
  app.add_option("--year-range", f.year_range, "first and last year")->expected(2);
  app.add_option("--slicing-scheme", f.slicing_scheme, "\"N-year\" or an explicit list like 2007-2010,2011-2016");
  app.add_option("--seeds", f.seeds, "training seeds")->delimiter(',');
  app.add_option("--anchor-count", f.anchor_count, "anchor vocabulary size for alignment");
  app.add_option("--epsilon", f.epsilon, "cosine clamp for the log ratio");
  app.add_option("--alignment-mode", f.alignment_mode, "relaxed or orthogonal");
  app.add_option("--triples", f.triples, "target,c1,c2,category file");
  app.add_option("--stability-k", f.stability_k, "neighbour counts for stability scores")->delimiter(',');
  app.add_option("--output-dir", f.output_dir, "reports and artifact cache");
  app.add_option("--candidate-pool", f.candidate_pool, "most frequent words screened by discover");
  app.add_option("--candidate-k", f.candidate_k, "neighbour count for discover");
  app.add_option("--neighbor-universe", f.neighbor_universe, "words eligible as neighbours (0: all shared)");
  app.add_option("--ablation-schemes", f.ablation_schemes, "alternative slicing schemes")->delimiter(';');
  app.add_option("--jobs", f.jobs, "concurrent training jobs");
  app.add_option("--dimension", f.dimension);
  app.add_option("--min-count", f.min_count);
  app.add_option("--window", f.window);
  app.add_option("--negatives", f.negatives);
  app.add_option("--epochs", f.epochs);
  app.add_option("--learning-rate", f.learning_rate);
  app.add_option("--min-learning-rate", f.min_learning_rate);
  app.add_option("--subsample", f.subsample);
  app.add_option("--architecture", f.architecture, "skip-gram or cbow");
  app.add_option("--workers", f.workers, "threads per training job (reproducible only at 1)");
}

bool given(const CLI::App& app, const char* name) { return app.count(name) > 0; }

RunConfig build_config(const CLI::App& app, const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (given(app, "--manifest")) c.manifest = f.manifest;
  if (given(app, "--year-range")) c.year_range = YearRange{f.year_range[0], f.year_range[1]};
  if (given(app, "--slicing-scheme")) c.slicing_scheme = f.slicing_scheme;
  if (given(app, "--seeds")) c.seeds = f.seeds;
  if (given(app, "--anchor-count")) c.anchor_count = f.anchor_count;
  if (given(app, "--epsilon")) c.epsilon = f.epsilon;
  if (given(app, "--alignment-mode")) c.alignment_mode = parse_alignment_mode(f.alignment_mode);
  if (given(app, "--triples")) c.triples = f.triples;
  if (given(app, "--stability-k")) c.stability_k = f.stability_k;
  if (given(app, "--output-dir")) c.output_dir = f.output_dir;
  if (given(app, "--candidate-pool")) c.candidate_pool = f.candidate_pool;
  if (given(app, "--candidate-k")) c.candidate_k = f.candidate_k;
  if (given(app, "--neighbor-universe")) c.neighbor_universe = f.neighbor_universe;
  if (given(app, "--ablation-schemes")) c.ablation_schemes = f.ablation_schemes;
  if (given(app, "--jobs")) c.jobs = f.jobs;
  if (given(app, "--dimension")) c.training.dimension = f.dimension;
  if (given(app, "--min-count")) c.training.min_count = f.min_count;
  if (given(app, "--window")) c.training.window = f.window;
  if (given(app, "--negatives")) c.training.negatives = f.negatives;
  if (given(app, "--epochs")) c.training.epochs = f.epochs;
  if (given(app, "--learning-rate")) c.training.learning_rate = f.learning_rate;
  if (given(app, "--min-learning-rate")) c.training.min_learning_rate = f.min_learning_rate;
  if (given(app, "--subsample")) c.training.subsample = f.subsample;
  if (given(app, "--architecture")) c.training.architecture = parse_architecture(f.architecture);
  if (given(app, "--workers")) c.training.workers = f.workers;
  c.validate();
  return c;
}

template <class F>
void stage(const char* name, F&& f) {
  try {
    f();
  } catch (const ValidationError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void say(const fs::path& out_dir, const fs::path& rel) { std::cout << (out_dir / rel).string() << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic coordinates analysis over time-sliced word embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  add_run_options(app, f);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress log on stderr");

  auto* ingest = app.add_subcommand("ingest", "strip, tokenize and slice the corpus");
  auto* train = app.add_subcommand("train", "train slice and base embeddings for every seed");
  auto* align = app.add_subcommand("align", "fit projections of every slice into the base space");
  auto* analyze = app.add_subcommand("analyze", "trajectories, trend fits and the trend report");
  auto* discover = app.add_subcommand("discover", "changing-neighbour candidate targets");
  std::vector<std::string> timeline_words;
  discover->add_option("--word", timeline_words, "also write the per-slice neighbours of these words");
  auto* stability = app.add_subcommand("stability", "stability scores, targets vs coordinate words");
  auto* ablate_slicing_cmd = app.add_subcommand("ablate-slicing", "sign preservation under other slicing schemes");
  auto* ablate_acceptance_cmd = app.add_subcommand("ablate-acceptance", "accepted vs not-accepted embeddings");
  auto* plot = app.add_subcommand("plot", "SVG trajectory and PCA plots");
  std::vector<std::string> plot_triples;
  plot->add_option("--triple", plot_triples, "target,c1,c2 (default: every usable triple)");
  auto* run = app.add_subcommand("run", "the full pipeline");

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with planted drift");
  synthetic::Config sc;
  std::string synth_out;
  synth->add_option("--out", synth_out, "directory for manifest.tsv, docs/ and triples.csv")->required();
  synth->add_option("--generator-seed", sc.seed);
  synth->add_option("--first-year", sc.first_year);
  synth->add_option("--years", sc.years);
  synth->add_option("--documents-per-year", sc.documents_per_year);
  synth->add_option("--sentences-per-document", sc.sentences_per_document);
  synth->add_option("--sentence-length", sc.sentence_length);
  synth->add_option("--drift-words", sc.drift_words);
  synth->add_option("--stationary-words", sc.stationary_words);
  synth->add_option("--background-topics", sc.background_topics);
  synth->add_flag("--latex", sc.latex);
  synth->add_flag("--accepted-divergence", sc.accepted_divergence);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      const auto manifest = synthetic::write_corpus(sc, synth_out);
      const auto triples = synthetic::drift_triples(sc);
      const fs::path tpath = fs::path(synth_out) / "triples.csv";
      std::ofstream(tpath, std::ios::binary) << format_triples(triples);
      std::cout << manifest.string() << '\n' << tpath.string() << '\n';
      return 0;
    }

    const RunConfig config = build_config(app, f);
    std::ostream* log = quiet ? nullptr : &std::cerr;
    const auto& out = config.output_dir;

    if (run->parsed()) {
      const auto report = run_pipeline(config, log);
      for (const auto& r : report.reports) say(out, r);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      return 0;
    }

    Pipeline p(config, log);
    p.triples();
    if (ingest->parsed()) {
      stage("ingest", [&] {
        const auto& c = p.corpus();
        for (const auto& s : c.slices)
          std::cout << s.label << '\t' << s.documents.size() << " documents\t" << s.token_count() << " tokens\n";
        for (const auto& a : p.artifacts()) std::cout << a.string() << '\n';
      });
    } else if (train->parsed()) {
      stage("train", [&] {
        p.train_all(config.slicing_scheme);
        for (const auto& a : p.artifacts()) std::cout << a.string() << '\n';
      });
    } else if (align->parsed()) {
      stage("align", [&] {
        for (const auto seed : config.seeds) p.aligned(config.slicing_scheme, seed);
        write_report(out, "alignment.csv", format_alignment(p.alignment_records(), out));
        say(out, "alignment.csv");
      });
    } else if (analyze->parsed()) {
      stage("analyze", [&] {
        const auto& a = p.analyze();
        write_report(out, "trend_report.csv", format_trend_report(a));
        write_report(out, "trajectories.csv", format_trajectories(a));
        write_report(out, "fits.csv", format_fits(a));
        write_report(out, "skipped_triples.csv", format_skipped(a));
        for (const char* r : {"trend_report.csv", "trajectories.csv", "fits.csv", "skipped_triples.csv"}) say(out, r);
      });
    } else if (discover->parsed()) {
      stage("discover", [&] {
        std::string text = "word\n";
        for (const auto& w : run_discovery(p)) text += w + "\n";
        write_report(out, "candidates.csv", text);
        say(out, "candidates.csv");
        if (!timeline_words.empty()) {
          std::string nb = "word,slice,rank,neighbor\n";
          const auto& labels = p.corpus().slices;
          for (const auto& w : timeline_words) {
            const auto tl = neighbor_timeline(p.neighbor_space(), w, config.candidate_k);
            for (std::size_t t = 0; t < tl.neighbors.size(); ++t)
              for (std::size_t i = 0; i < tl.neighbors[t].size(); ++i)
                nb += w + "," + labels[t].label + "," + std::to_string(i + 1) + "," + tl.neighbors[t][i] + "\n";
          }
          write_report(out, "neighbors.csv", nb);
          say(out, "neighbors.csv");
        }
      });
    } else if (stability->parsed()) {
      stage("stability", [&] {
        std::vector<std::string> dropped;
        write_report(out, "stability_report.csv", format_stability_report(run_stability(p, &dropped)));
        for (const auto& w : dropped) std::cerr << "warning: '" << w << "' is outside the neighbour universe\n";
        say(out, "stability_report.csv");
      });
    } else if (ablate_slicing_cmd->parsed()) {
      stage("ablate-slicing", [&] {
        write_report(out, "slicing_ablation.csv", format_slicing_ablation(ablate_slicing(p, config.ablation_schemes)));
        say(out, "slicing_ablation.csv");
      });
    } else if (ablate_acceptance_cmd->parsed()) {
      stage("ablate-acceptance", [&] {
        write_report(out, "acceptance_ablation.csv", format_acceptance_ablation(ablate_acceptance(p)));
        say(out, "acceptance_ablation.csv");
      });
    } else if (plot->parsed()) {
      stage("plot", [&] {
        for (const auto& r : emit_plots(p, plot_triples)) say(out, r);
      });
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
