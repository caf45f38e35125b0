#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfupdate/core.hpp"

namespace selfupdate {

enum class DistanceMetric { euclidean, l1 };

/// How the updating threshold t* is derived from the gallery's own
/// cross-user (impostor) template distances.
struct ThresholdPolicy {
  enum class Kind { zero_far, far_quantile };
  Kind kind = Kind::far_quantile;
  double q = 0.01;

  static ThresholdPolicy zero_far() { return {Kind::zero_far, 0.0}; }
  static ThresholdPolicy far_quantile(double q);
};

double distance(const FeatureVector& a, const FeatureVector& b, DistanceMetric m);

struct MatchResult {
  double min_distance;
  std::int64_t nearest_template_id;
};

/// Nearest template of one user. Ties go to the earliest-inserted template.
MatchResult match_score(const Sample& s, const UserGallery& ug, DistanceMetric m);

/// All distances between templates owned by different users, in a fixed
/// enumeration order (user pairs ascending, then insertion order).
std::vector<double> impostor_pool(const Gallery& g, DistanceMetric m);

double estimate_threshold(const Gallery& g, ThresholdPolicy policy, DistanceMetric m);

struct PseudoLabelDecision {
  std::int64_t sample_id;
  // Set iff accepted; then distance < t*.
  std::optional<UserId> label;
  // Distance to the globally nearest template (the accepted distance when
  // accepted, the rejected min distance otherwise).
  double distance;

  bool accepted() const noexcept { return label.has_value(); }
};

/// Pseudo-labels every sample against the whole gallery. A sample is accepted
/// with the label of its globally nearest template iff that distance is
/// strictly below t_star. Output order follows the batch.
std::vector<PseudoLabelDecision> classify_batch(const Batch& b, const Gallery& g,
                                                double t_star, DistanceMetric m);

enum class ScoreKind { genuine, impostor };

struct ScoreRow {
  UserId subject;  // owner of the gallery the score was computed against
  std::int64_t sample_id;
  double score;
  ScoreKind kind;
};

struct ScoreSets {
  std::vector<double> genuine;
  std::vector<double> impostor;
  std::vector<ScoreRow> per_subject;  // grouped by subject, ascending
  // Samples whose true user is not enrolled are skipped and reported here.
  std::vector<std::int64_t> rejected_samples;
  std::vector<std::string> diagnostics;
};

/// Genuine score: min distance of each test sample to its own user's
/// gallery. Impostor scores: min distance to every other user's gallery.
/// This is a metrics-side routine and reads Sample::true_user.
ScoreSets score_sets(const Batch& test, const Gallery& g, DistanceMetric m);

}  // namespace selfupdate
