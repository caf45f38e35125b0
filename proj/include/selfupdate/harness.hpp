#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "selfupdate/clustering.hpp"
#include "selfupdate/core.hpp"
#include "selfupdate/matching.hpp"
#include "selfupdate/selection.hpp"
#include "selfupdate/synthgen.hpp"

namespace selfupdate {

// ---------------------------------------------------------------------------
// Dataset CSV: `user_id,sample_id,session,f_0,...,f_{d-1}`, one sample per
// row, session may be empty. Features are written with 17 significant digits
// so a written dataset reloads bit-identically.
// ---------------------------------------------------------------------------

std::vector<Sample> parse_dataset(std::istream& in, std::optional<std::size_t> expected_dim = {});
std::vector<Sample> load_dataset(const std::filesystem::path& path,
                                 std::optional<std::size_t> expected_dim = {});
void write_dataset(std::span<const Sample> samples, std::ostream& out);

/// Unbounded gallery holding every sample under its user_id.
Gallery gallery_from_samples(std::span<const Sample> samples);

struct SplitOptions {
  std::size_t n_batches = 7;
  std::size_t p = 6;
  std::uint64_t seed = 0;
  // Strict: every user needs n_batches * p samples. Relaxed: users short of
  // that are dropped and reported; the rest are truncated to n_batches * p.
  bool strict = true;
  // Assign samples to batches by (session, sample_id) instead of randomly.
  bool chronological = false;
};

struct Split {
  std::vector<std::pair<UserId, Sample>> enroll;
  std::vector<Batch> adaptation;  // indices 1 .. n_batches - 2
  Batch test;                     // index n_batches - 1
  std::vector<UserId> dropped_users;
};

/// Per user (ascending id): shuffle with the seeded generator, then deal p
/// samples to each batch in turn. Leftover samples are discarded.
Split split_batches(std::span<const Sample> dataset, const SplitOptions& options);

struct ExperimentConfig {
  std::variant<std::filesystem::path, SynthParams> source;
  std::size_t n_batches = 7;
  std::size_t p = 6;
  std::vector<SelectionMethod> methods{SelectionMethod::kmeans_select, SelectionMethod::mdist};
  DistanceMetric metric = DistanceMetric::euclidean;
  ThresholdPolicy policy;
  KMeansParams kmeans_params;
  std::size_t runs = 10;
  std::uint64_t base_seed = 0;
  std::optional<std::uint64_t> bytes_per_template;  // default 4 * dim
  std::optional<std::filesystem::path> output_dir;
  bool strict = true;
  bool chronological = false;
  // When false, timing columns are written as 0 so outputs are reproducible.
  bool record_timings = true;
};

void validate(const ExperimentConfig& cfg);

/// Name of the frozen baseline that never updates its gallery.
inline constexpr const char* kNoUpdateMethod = "none";

struct MetricsRow {
  std::size_t run = 0;
  std::size_t batch = 0;
  std::string method;
  double eer = 0.0;
  double impostor_fraction = 0.0;
  double classify_ms = 0.0;
  double select_ms = 0.0;
  std::uint64_t gallery_bytes = 0;
};

struct Stat {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single run
};

struct AggregateRow {
  std::string method;
  std::size_t batch = 0;
  std::size_t runs = 0;
  Stat eer, impostor_fraction, classify_ms, select_ms, gallery_bytes;
};

struct SubjectEerRow {
  std::size_t run = 0;
  std::size_t batch = 0;
  std::string method;
  UserId subject;
  double eer = 0.0;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;  // (run, method, batch) order
  std::vector<AggregateRow> aggregate;
  std::vector<SubjectEerRow> subject_eer;
  std::vector<UserId> dropped_users;
  std::uint64_t bytes_per_template = 0;
  std::size_t users = 0;
};

/// Full protocol: for run r = 1..runs the split seed is base_seed + r; the
/// first batch enrolls, the last is the fixed test set and every method
/// (plus the no-update baseline) is evaluated on it after each cycle.
/// When output_dir is set, writes metrics.csv, aggregate.csv,
/// subject_eer.csv and scatter_run<r>.csv there. On failure the rows
/// produced so far are flushed with a trailing `# FAILED:` line.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::vector<AggregateRow> aggregate_rows(std::span<const MetricsRow> rows);

void write_metrics(std::span<const MetricsRow> rows, std::ostream& out);
void write_aggregate(std::span<const AggregateRow> rows, std::ostream& out);
void write_subject_eer(std::span<const SubjectEerRow> rows, std::ostream& out);

}  // namespace selfupdate
