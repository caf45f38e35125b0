#pragma once

#include <chrono>
#include <utility>
#include <vector>

#include "selfupdate/clustering.hpp"
#include "selfupdate/core.hpp"
#include "selfupdate/matching.hpp"
#include "selfupdate/selection.hpp"

namespace selfupdate {

struct EngineConfig {
  SelectionMethod method = SelectionMethod::mdist;
  std::size_t p = 6;
  DistanceMetric metric = DistanceMetric::euclidean;
  ThresholdPolicy policy;
  KMeansParams kmeans_params;
};

struct Insertion {
  std::int64_t sample_id;
  UserId pseudo_label;
};

struct Eviction {
  std::int64_t sample_id;
  UserId user;
};

struct UpdateCycleReport {
  int batch_index = 0;
  double t_star_used = 0.0;
  std::size_t n_accepted = 0;
  std::size_t n_rejected = 0;
  std::vector<Insertion> insertions;
  std::vector<Eviction> evictions;
  std::chrono::nanoseconds elapsed_classify{0};
  std::chrono::nanoseconds elapsed_select{0};
};

/// One classification-selection cycle. Every sample is classified against
/// the pre-cycle gallery, accepted samples are appended to their
/// pseudo-labeled user, then the configured selection runs once per user.
std::pair<Gallery, UpdateCycleReport> run_update_cycle(const Gallery& g, const Batch& b,
                                                       const EngineConfig& cfg, double t_star);

struct SequenceResult {
  Gallery final_gallery;
  std::vector<UpdateCycleReport> reports;
  // snapshots[0] is the initial gallery; snapshots[j] follows cycle j.
  std::vector<Gallery> snapshots;
};

/// Runs all batches in order. t* is estimated from the initial gallery and
/// re-estimated from the post-selection gallery after every cycle.
SequenceResult run_sequence(const Gallery& g0, std::span<const Batch> batches,
                            const EngineConfig& cfg);

}  // namespace selfupdate
