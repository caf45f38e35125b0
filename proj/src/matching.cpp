#include "selfupdate/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace selfupdate {

ThresholdPolicy ThresholdPolicy::far_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "far quantile q must lie in (0,1)");
  }
  return {Kind::far_quantile, q};
}

double distance(const FeatureVector& a, const FeatureVector& b, DistanceMetric m) {
  require_same_dim(a.dim(), b.dim(), "distance");
  const auto x = a.values();
  const auto y = b.values();
  double acc = 0.0;
  if (m == DistanceMetric::euclidean) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
  return acc;
}

MatchResult match_score(const Sample& s, const UserGallery& ug, DistanceMetric m) {
  if (ug.templates.empty()) {
    throw Error(ErrorCode::empty_input,
                "user " + std::to_string(ug.user.value) + " has no templates");
  }
  MatchResult best{std::numeric_limits<double>::infinity(), -1};
  std::uint64_t best_seq = std::numeric_limits<std::uint64_t>::max();
  for (const auto& t : ug.templates) {
    const double d = distance(s.vector, t.vector(), m);
    if (d < best.min_distance || (d == best.min_distance && t.sequence() < best_seq)) {
      best = {d, t.id()};
      best_seq = t.sequence();
    }
  }
  return best;
}

std::vector<double> impostor_pool(const Gallery& g, DistanceMetric m) {
  std::vector<double> pool;
  const auto& users = g.users();
  for (auto a = users.begin(); a != users.end(); ++a) {
    for (auto b = std::next(a); b != users.end(); ++b) {
      for (const auto& ta : a->second.templates) {
        for (const auto& tb : b->second.templates) {
          pool.push_back(distance(ta.vector(), tb.vector(), m));
        }
      }
    }
  }
  return pool;
}

double estimate_threshold(const Gallery& g, ThresholdPolicy policy, DistanceMetric m) {
  if (g.users().size() < 2) {
    throw Error(ErrorCode::empty_input,
                "threshold estimation needs at least two enrolled users");
  }
  auto pool = impostor_pool(g, m);
  if (pool.empty()) {
    throw Error(ErrorCode::empty_input, "no cross-user template pair to estimate t*");
  }
  if (policy.kind == ThresholdPolicy::Kind::zero_far) {
    return *std::min_element(pool.begin(), pool.end());
  }
  // Lower empirical quantile: element at floor(q * (n - 1)) of the sorted pool.
  const auto idx = static_cast<std::size_t>(
      std::floor(policy.q * static_cast<double>(pool.size() - 1)));
  std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(idx), pool.end());
  return pool[idx];
}

namespace {

struct Nearest {
  double distance = std::numeric_limits<double>::infinity();
  std::uint64_t sequence = std::numeric_limits<std::uint64_t>::max();
  UserId owner;
};

Nearest global_nearest(const Sample& s, const Gallery& g, DistanceMetric m) {
  Nearest best;
  for (const auto& [user, ug] : g.users()) {
    for (const auto& t : ug.templates) {
      const double d = distance(s.vector, t.vector(), m);
      if (d < best.distance || (d == best.distance && t.sequence() < best.sequence)) {
        best = {d, t.sequence(), user};
      }
    }
  }
  return best;
}

}  // namespace

std::vector<PseudoLabelDecision> classify_batch(const Batch& b, const Gallery& g,
                                                double t_star, DistanceMetric m) {
  if (!(t_star >= 0.0)) throw Error(ErrorCode::invalid_argument, "t* must be >= 0");
  if (g.template_count() == 0) throw Error(ErrorCode::empty_input, "gallery is empty");
  std::vector<PseudoLabelDecision> out;
  out.reserve(b.samples.size());
  for (const auto& s : b.samples) {
    require_same_dim(g.dim(), s.vector.dim(), "batch sample");
    const auto nearest = global_nearest(s, g, m);
    PseudoLabelDecision d{s.id, std::nullopt, nearest.distance};
    if (nearest.distance < t_star) d.label = nearest.owner;
    out.push_back(d);
  }
  return out;
}

ScoreSets score_sets(const Batch& test, const Gallery& g, DistanceMetric m) {
  ScoreSets out;
  std::map<UserId, std::vector<ScoreRow>> grouped;
  for (const auto& s : test.samples) {
    require_same_dim(g.dim(), s.vector.dim(), "test sample");
    if (!g.users().contains(s.true_user)) {
      out.rejected_samples.push_back(s.id);
      out.diagnostics.push_back("test sample " + std::to_string(s.id) +
                                " belongs to unenrolled user " +
                                std::to_string(s.true_user.value));
      continue;
    }
    for (const auto& [user, ug] : g.users()) {
      const double score = match_score(s, ug, m).min_distance;
      const bool genuine = user == s.true_user;
      (genuine ? out.genuine : out.impostor).push_back(score);
      grouped[user].push_back(
          {user, s.id, score, genuine ? ScoreKind::genuine : ScoreKind::impostor});
    }
  }
  for (auto& [_, rows] : grouped) {
    out.per_subject.insert(out.per_subject.end(), rows.begin(), rows.end());
  }
  return out;
}

}  // namespace selfupdate
