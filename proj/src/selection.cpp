#include "selfupdate/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace selfupdate {

std::string_view to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::kmeans_select: return "kmeans";
    case SelectionMethod::mdist: return "mdist";
    case SelectionMethod::dend: return "dend";
    case SelectionMethod::keep_all: return "keep_all";
  }
  return "unknown";
}

SelectionMethod parse_selection_method(std::string_view name) {
  if (name == "kmeans" || name == "kmeans_select") return SelectionMethod::kmeans_select;
  if (name == "mdist") return SelectionMethod::mdist;
  if (name == "dend") return SelectionMethod::dend;
  if (name == "keep_all") return SelectionMethod::keep_all;
  throw Error(ErrorCode::invalid_argument, "unknown selection method '" + std::string(name) + "'");
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    // result * (n - r + i) / i is exact at every step; guard the multiply.
    const std::uint64_t factor = n - r + i;
    if (result > UINT64_MAX / factor) return UINT64_MAX;
    result = result * factor / i;
  }
  return result;
}

double subset_objective(std::span<const Template> subset) {
  double total = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      total += squared_euclidean(subset[i].vector(), subset[j].vector());
    }
  }
  return total;
}

namespace {

bool improves(double candidate, double incumbent, SubsetObjective obj) {
  const double gap = kObjectiveTieRelTol * std::max(std::abs(candidate), std::abs(incumbent));
  return obj == SubsetObjective::min_sum_pairwise_sq ? candidate < incumbent - gap
                                                     : candidate > incumbent + gap;
}

void validate(std::span<const Template> candidates, std::size_t p) {
  if (p < 1) throw Error(ErrorCode::invalid_argument, "selection size p must be >= 1");
  if (candidates.empty()) throw Error(ErrorCode::empty_input, "no candidates to select from");
  const std::size_t dim = candidates.front().vector().dim();
  for (const auto& t : candidates) require_same_dim(dim, t.vector().dim(), "candidate");
}

// Candidate positions sorted by ascending sample id.
std::vector<std::size_t> id_order(std::span<const Template> candidates) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].id() < candidates[b].id();
  });
  return order;
}

std::vector<std::vector<double>> pairwise_sq(std::span<const Template> candidates,
                                             const std::vector<std::size_t>& order) {
  const std::size_t n = order.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i][j] = d[j][i] = squared_euclidean(candidates[order[i]].vector(),
                                            candidates[order[j]].vector());
    }
  }
  return d;
}

SubsetSelection materialize(std::span<const Template> candidates,
                            const std::vector<std::size_t>& order,
                            std::vector<std::size_t> chosen_ranks, double objective, bool exact) {
  std::vector<std::size_t> positions;
  positions.reserve(chosen_ranks.size());
  for (auto r : chosen_ranks) positions.push_back(order[r]);
  std::sort(positions.begin(), positions.end());
  SubsetSelection out;
  for (auto pos : positions) out.selected.push_back(candidates[pos]);
  out.objective = objective;
  out.exact = exact;
  return out;
}

class BranchEnumerator {
 public:
  BranchEnumerator(const std::vector<std::vector<double>>& d, std::size_t p, SubsetObjective obj)
      : d_(d), p_(p), obj_(obj) {}

  std::vector<std::size_t> run() {
    current_.reserve(p_);
    descend(0, 0.0);
    return best_;
  }

  double best_objective() const { return best_obj_; }

 private:
  void descend(std::size_t start, double partial) {
    if (current_.size() == p_) {
      if (best_.empty() || improves(partial, best_obj_, obj_)) {
        best_ = current_;
        best_obj_ = partial;
      }
      return;
    }
    // Pairwise terms are non-negative, so a partial sum already beyond the
    // incumbent minimum cannot recover.
    if (obj_ == SubsetObjective::min_sum_pairwise_sq && !best_.empty() &&
        improves(best_obj_, partial, obj_)) {
      return;
    }
    const std::size_t n = d_.size();
    const std::size_t remaining = p_ - current_.size();
    for (std::size_t i = start; i + remaining <= n; ++i) {
      double added = 0.0;
      for (auto s : current_) added += d_[s][i];
      current_.push_back(i);
      descend(i + 1, partial + added);
      current_.pop_back();
    }
  }

  const std::vector<std::vector<double>>& d_;
  std::size_t p_;
  SubsetObjective obj_;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> best_;
  double best_obj_ = 0.0;
};

SubsetSelection greedy_ranks(std::span<const Template> candidates,
                             const std::vector<std::size_t>& order, std::size_t p,
                             SubsetObjective obj) {
  const auto d = pairwise_sq(candidates, order);
  const std::size_t n = order.size();
  const bool minimize = obj == SubsetObjective::min_sum_pairwise_sq;
  const auto better = [minimize](double a, double b) { return minimize ? a < b : a > b; };

  std::vector<std::size_t> chosen;
  if (p == 1) {
    chosen.push_back(0);
    return materialize(candidates, order, chosen, 0.0, false);
  }
  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (better(d[i][j], d[bi][bj])) {
        bi = i;
        bj = j;
      }
    }
  }
  chosen = {bi, bj};
  std::vector<bool> taken(n, false);
  taken[bi] = taken[bj] = true;
  double objective = d[bi][bj];
  while (chosen.size() < p) {
    std::size_t pick = n;
    double pick_delta = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      if (taken[x]) continue;
      double delta = 0.0;
      for (auto s : chosen) delta += d[s][x];
      if (pick == n || better(delta, pick_delta)) {
        pick = x;
        pick_delta = delta;
      }
    }
    chosen.push_back(pick);
    taken[pick] = true;
    objective += pick_delta;
  }
  return materialize(candidates, order, chosen, objective, false);
}

SubsetSelection take_all(std::span<const Template> candidates) {
  SubsetSelection out;
  out.selected.assign(candidates.begin(), candidates.end());
  out.objective = subset_objective(candidates);
  return out;
}

}  // namespace

SubsetSelection select_subset_greedy(std::span<const Template> candidates, std::size_t p,
                                     SubsetObjective obj) {
  validate(candidates, p);
  if (candidates.size() <= p) return take_all(candidates);
  return greedy_ranks(candidates, id_order(candidates), p, obj);
}

SubsetSelection select_subset(std::span<const Template> candidates, std::size_t p,
                              SubsetObjective obj) {
  validate(candidates, p);
  if (candidates.size() <= p) return take_all(candidates);
  const auto order = id_order(candidates);
  if (binomial(candidates.size(), p) > kExactSubsetBudget) {
    return greedy_ranks(candidates, order, p, obj);
  }
  const auto d = pairwise_sq(candidates, order);
  BranchEnumerator search(d, p, obj);
  auto ranks = search.run();
  return materialize(candidates, order, std::move(ranks), search.best_objective(), true);
}

std::vector<Template> select_mdist(std::span<const Template> candidates, std::size_t p) {
  return select_subset(candidates, p, SubsetObjective::min_sum_pairwise_sq).selected;
}

std::vector<Template> select_dend(std::span<const Template> candidates, std::size_t p) {
  return select_subset(candidates, p, SubsetObjective::max_sum_pairwise_sq).selected;
}

std::vector<Template> oracle_subset_select(std::span<const Template> candidates, std::size_t p,
                                           SubsetObjective obj) {
  validate(candidates, p);
  const std::size_t n = candidates.size();
  if (n <= p) return {candidates.begin(), candidates.end()};
  if (binomial(n, p) > kOracleSubsetBudget) {
    throw Error(ErrorCode::budget_exceeded,
                "oracle enumeration of C(" + std::to_string(n) + ", " + std::to_string(p) +
                    ") subsets exceeds the budget");
  }
  std::vector<Template> sorted(candidates.begin(), candidates.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Template& a, const Template& b) { return a.id() < b.id(); });

  // Lexicographic walk over index combinations c[0] < c[1] < ... < c[p-1].
  std::vector<std::size_t> c(p);
  std::iota(c.begin(), c.end(), 0);
  std::vector<std::size_t> best;
  double best_obj = 0.0;
  std::vector<Template> subset;
  while (true) {
    subset.clear();
    for (auto i : c) subset.push_back(sorted[i]);
    const double value = subset_objective(subset);
    if (best.empty() || improves(value, best_obj, obj)) {
      best = c;
      best_obj = value;
    }
    std::size_t pos = p;
    while (pos > 0 && c[pos - 1] == n - p + (pos - 1)) --pos;
    if (pos == 0) break;
    ++c[pos - 1];
    for (std::size_t j = pos; j < p; ++j) c[j] = c[j - 1] + 1;
  }
  std::vector<std::int64_t> ids;
  for (auto i : best) ids.push_back(sorted[i].id());
  std::vector<Template> out;
  for (const auto& t : candidates) {
    if (std::find(ids.begin(), ids.end(), t.id()) != ids.end()) out.push_back(t);
  }
  return out;
}

std::map<UserId, std::vector<Template>> select_kmeans(const Gallery& accumulated, std::size_t p,
                                                      const KMeansParams& params) {
  if (p < 1) throw Error(ErrorCode::invalid_argument, "selection size p must be >= 1");
  std::vector<FeatureVector> points;
  std::vector<UserId> labels;
  for (const auto& [user, ug] : accumulated.users()) {
    if (ug.templates.empty()) {
      throw Error(ErrorCode::empty_input,
                  "user " + std::to_string(user.value) + " has no candidates");
    }
    for (const auto& t : ug.templates) {
      points.push_back(t.vector());
      labels.push_back(user);
    }
  }
  KMeansParams run = params;
  run.k = accumulated.users().size();
  const auto clustering = kmeans(points, run, labels);

  std::map<UserId, std::vector<Template>> out;
  for (const auto& [user, ug] : accumulated.users()) {
    const auto u = dominant_cluster_for_user(clustering, labels, user);
    const auto& centroid = clustering.centroids[u];
    const auto& cands = ug.templates;
    std::vector<std::size_t> idx(cands.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> dist(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
      dist[i] = squared_euclidean(cands[i].vector(), centroid);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (dist[a] != dist[b]) return dist[a] < dist[b];
      return cands[a].id() < cands[b].id();
    });
    idx.resize(std::min(p, idx.size()));
    std::sort(idx.begin(), idx.end());
    auto& chosen = out[user];
    for (auto i : idx) chosen.push_back(cands[i]);
  }
  return out;
}

std::map<UserId, std::vector<Template>> select_templates(const Gallery& accumulated,
                                                         SelectionMethod method, std::size_t p,
                                                         const KMeansParams& params) {
  if (method == SelectionMethod::kmeans_select) return select_kmeans(accumulated, p, params);
  std::map<UserId, std::vector<Template>> out;
  for (const auto& [user, ug] : accumulated.users()) {
    switch (method) {
      case SelectionMethod::mdist: out[user] = select_mdist(ug.templates, p); break;
      case SelectionMethod::dend: out[user] = select_dend(ug.templates, p); break;
      default: out[user] = ug.templates; break;
    }
  }
  return out;
}

}  // namespace selfupdate
