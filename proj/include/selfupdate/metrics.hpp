#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "selfupdate/core.hpp"
#include "selfupdate/matching.hpp"

namespace selfupdate {

/// Scores are distances: a probe is accepted when its score is < threshold.
struct RocPoint {
  double threshold;
  double far;  // fraction of impostor scores < threshold
  double frr;  // fraction of genuine scores >= threshold
};

/// One point per distinct score (ascending) plus a final point above every
/// score, where far = 1 and frr = 0.
std::vector<RocPoint> compute_roc(std::span<const double> genuine, std::span<const double> impostor);

/// Equal error rate. Takes the first ROC point where far - frr >= 0 and
/// interpolates linearly from the previous point when the sign flips
/// strictly between them.
double compute_eer(std::span<const double> genuine, std::span<const double> impostor);

struct ImpostorFraction {
  double global = 0.0;
  std::map<UserId, double> per_user;
};

/// Share of gallery templates whose true user differs from the owner.
ImpostorFraction impostor_fraction(const Gallery& g);

/// Bound on capped gallery storage: p * k * S bytes.
std::uint64_t storage_capped(std::uint64_t p, std::uint64_t k, std::uint64_t bytes_per_template);

/// Growth model of uncapped galleries: beta * i * m_bar * k * S bytes.
double storage_uncapped(double beta, std::uint64_t iterations, double m_bar, std::uint64_t k,
                        std::uint64_t bytes_per_template);

struct SnapshotMetrics {
  double eer = 0.0;
  double impostor_fraction = 0.0;
  std::uint64_t gallery_bytes = 0;
  std::map<UserId, double> per_subject_eer;
  ScoreSets scores;
};

/// Scores `test` against `g` and derives EER, impostor fraction and
/// storage (template count * bytes_per_template).
SnapshotMetrics evaluate_snapshot(const Gallery& g, const Batch& test, DistanceMetric m,
                                  std::uint64_t bytes_per_template);

/// Writes `subject,score,kind` rows (kind is genuine or impostor), header first.
void export_score_scatter(std::span<const ScoreRow> per_subject, std::ostream& out);

/// Number formatting shared by every CSV writer: '.' decimal point,
/// 9 significant digits.
std::string format_real(double value);

}  // namespace selfupdate
