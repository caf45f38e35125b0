// Command-line front end: `run` experiments, `gen` synthetic datasets and
// export `scatter` score tables.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "selfupdate/harness.hpp"
#include "selfupdate/metrics.hpp"

namespace su = selfupdate;

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c == '\n' ? ' ' : c);
  }
  return out;
}

std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw su::Error(su::ErrorCode::io_error, "cannot write " + path);
  return f;
}

int fail(std::string_view code, std::string_view message, int exit_code = 1) {
  std::cerr << "error: code=" << code << " message=\"" << escape(message) << "\"\n";
  return exit_code;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw su::Error(su::ErrorCode::invalid_argument,
                    "synth key '" + key + "' has bad value '" + value + "'");
  }
  return x;
}

std::size_t to_count(const std::string& key, const std::string& value) {
  const double x = to_double(key, value);
  if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x))) {
    throw su::Error(su::ErrorCode::invalid_argument,
                    "synth key '" + key + "' needs a non-negative integer");
  }
  return static_cast<std::size_t>(x);
}

// "k=20,dim=16,sigma=1,sep=6,eps=0.15,n=42"; unspecified keys keep defaults.
su::SynthParams parse_synth(const std::string& spec, std::uint64_t seed) {
  su::SynthParams p;
  p.seed = seed;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw su::Error(su::ErrorCode::invalid_argument, "synth item '" + item + "' lacks '='");
    }
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    if (key == "k") p.k_users = to_count(key, value);
    else if (key == "dim") p.dim = to_count(key, value);
    else if (key == "sigma") p.sigma = to_double(key, value);
    else if (key == "sep") p.separation = to_double(key, value);
    else if (key == "eps") p.tail_eps = to_double(key, value);
    else if (key == "n") p.samples_per_user = to_count(key, value);
    else throw su::Error(su::ErrorCode::invalid_argument, "unknown synth key '" + key + "'");
  }
  su::validate(p);
  return p;
}

su::ThresholdPolicy parse_threshold(const std::string& text) {
  if (text == "zero-far") return su::ThresholdPolicy::zero_far();
  if (text.rfind("far:", 0) == 0) {
    return su::ThresholdPolicy::far_quantile(to_double("far", text.substr(4)));
  }
  throw su::Error(su::ErrorCode::invalid_argument,
                  "threshold must be zero-far or far:FLOAT, got '" + text + "'");
}

su::DistanceMetric parse_metric(const std::string& text) {
  if (text == "l2") return su::DistanceMetric::euclidean;
  if (text == "l1") return su::DistanceMetric::l1;
  throw su::Error(su::ErrorCode::invalid_argument, "metric must be l2 or l1, got '" + text + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-updating template gallery experiments"};
  app.require_subcommand(1);

  std::string dataset, synth, out, metric = "l2", threshold = "far:0.01";
  std::vector<std::string> methods;
  std::size_t p = 6, batches = 7, runs = 10;
  std::uint64_t seed = 0, bytes_per_template = 0;
  bool chronological = false, relaxed = false, no_timing = false;

  auto* run = app.add_subcommand("run", "Run the batch self-update protocol");
  auto* source = run->add_option_group("source");
  source->add_option("--dataset", dataset, "Feature CSV");
  source->add_option("--synth", synth, "k=..,dim=..,sigma=..,sep=..,eps=..,n=..");
  source->require_option(1);
  run->add_option("--method", methods, "kmeans|mdist|dend|keep_all (repeatable)")
      ->check(CLI::IsMember({"kmeans", "mdist", "dend", "keep_all"}));
  run->add_option("--p", p, "Templates per user");
  run->add_option("--batches", batches, "Total batches (enroll + adaptation + test)");
  run->add_option("--runs", runs, "Repetitions");
  run->add_option("--metric", metric, "l2|l1");
  run->add_option("--threshold", threshold, "zero-far|far:FLOAT");
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--bytes-per-template", bytes_per_template, "Template size S in bytes");
  run->add_option("--out", out, "Output directory")->required();
  run->add_flag("--chronological", chronological, "Split by session order");
  run->add_flag("--relaxed", relaxed, "Drop users with too few samples instead of failing");
  run->add_flag("--no-timing", no_timing, "Write zero timings for reproducible output");

  std::string gen_synth, gen_out;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
  gen->add_option("--synth", gen_synth, "k=..,dim=..,sigma=..,sep=..,eps=..,n=..")->required();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  std::string sc_dataset, sc_gallery, sc_out, sc_metric = "l2";
  std::size_t sc_p = 6, sc_batches = 7;
  std::uint64_t sc_seed = 0;
  auto* scatter = app.add_subcommand("scatter", "Export per-subject genuine/impostor scores");
  scatter->add_option("--dataset", sc_dataset, "Probe feature CSV")->required();
  scatter->add_option("--gallery", sc_gallery,
                      "Gallery feature CSV; when absent the dataset is split and its first "
                      "batch scored against its last");
  scatter->add_option("--p", sc_p, "Samples per user per batch when splitting");
  scatter->add_option("--batches", sc_batches, "Batches when splitting");
  scatter->add_option("--seed", sc_seed, "Split seed");
  scatter->add_option("--metric", sc_metric, "l2|l1");
  scatter->add_option("--out", sc_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*run) {
      su::ExperimentConfig cfg;
      if (!dataset.empty()) cfg.source = std::filesystem::path(dataset);
      else cfg.source = parse_synth(synth, seed);
      cfg.n_batches = batches;
      cfg.p = p;
      if (!methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : methods) cfg.methods.push_back(su::parse_selection_method(m));
      }
      cfg.metric = parse_metric(metric);
      cfg.policy = parse_threshold(threshold);
      cfg.runs = runs;
      cfg.base_seed = seed;
      if (bytes_per_template) cfg.bytes_per_template = bytes_per_template;
      cfg.output_dir = out;
      cfg.strict = !relaxed;
      cfg.chronological = chronological;
      cfg.record_timings = !no_timing;
      const auto result = su::run_experiment(cfg);
      for (const auto& u : result.dropped_users) {
        std::cerr << "dropped user " << u.value << ": too few samples\n";
      }
      std::cout << "wrote " << result.rows.size() << " metric rows for " << result.users
                << " users to " << out << "\n";
    } else if (*gen) {
      const auto ds = su::generate(parse_synth(gen_synth, gen_seed));
      if (gen_out.empty()) {
        su::write_dataset(ds.samples, std::cout);
      } else {
        auto f = open_output(gen_out);
        su::write_dataset(ds.samples, f);
      }
    } else if (*scatter) {
      const auto probes = su::load_dataset(sc_dataset);
      const auto m = parse_metric(sc_metric);
      su::ScoreSets scores;
      if (!sc_gallery.empty()) {
        const auto gallery_samples = su::load_dataset(sc_gallery, probes.front().vector.dim());
        scores = su::score_sets(su::Batch{1, probes}, su::gallery_from_samples(gallery_samples), m);
      } else {
        su::SplitOptions opts{sc_batches, sc_p, sc_seed, true, false};
        const auto split = su::split_batches(probes, opts);
        scores = su::score_sets(split.test, su::gallery_enroll(split.enroll, su::Capacity::of(sc_p)), m);
      }
      for (const auto& d : scores.diagnostics) std::cerr << "skipped: " << d << "\n";
      if (sc_out.empty()) {
        su::export_score_scatter(scores.per_subject, std::cout);
      } else {
        auto f = open_output(sc_out);
        su::export_score_scatter(scores.per_subject, f);
      }
    }
  } catch (const su::Error& e) {
    return fail(su::to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
