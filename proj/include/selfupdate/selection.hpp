#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "selfupdate/clustering.hpp"
#include "selfupdate/core.hpp"

namespace selfupdate {

enum class SelectionMethod { kmeans_select, mdist, dend, keep_all };

std::string_view to_string(SelectionMethod m);
SelectionMethod parse_selection_method(std::string_view name);

/// Objective over the squared euclidean distances of every unordered pair
/// in a subset. MDIST minimizes it, DEND maximizes it.
enum class SubsetObjective { min_sum_pairwise_sq, max_sum_pairwise_sq };

inline constexpr std::uint64_t kExactSubsetBudget = 1'000'000;
inline constexpr std::uint64_t kOracleSubsetBudget = 10'000'000;

/// Objectives closer than this relative gap are ties; ties go to the subset
/// whose ascending sample-id list is lexicographically smallest.
inline constexpr double kObjectiveTieRelTol = 1e-12;

/// C(n, r), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t r);

double subset_objective(std::span<const Template> subset);

struct SubsetSelection {
  std::vector<Template> selected;  // candidate order
  double objective = 0.0;
  bool exact = true;
};

/// Size-min(p, n) subset optimizing `obj`. Exact branch enumeration when
/// C(n, p) <= kExactSubsetBudget, otherwise the greedy heuristic.
SubsetSelection select_subset(std::span<const Template> candidates, std::size_t p,
                              SubsetObjective obj);

/// Greedy heuristic: seed with the best pair (closest for MDIST, farthest for
/// DEND), then repeatedly add the candidate with the best objective change.
SubsetSelection select_subset_greedy(std::span<const Template> candidates, std::size_t p,
                                     SubsetObjective obj);

std::vector<Template> select_mdist(std::span<const Template> candidates, std::size_t p);
std::vector<Template> select_dend(std::span<const Template> candidates, std::size_t p);

/// Test oracle: plain enumeration of all C(n, p) subsets, objective
/// recomputed from the vectors for each. Same tie rule as select_subset.
std::vector<Template> oracle_subset_select(std::span<const Template> candidates, std::size_t p,
                                           SubsetObjective obj);

/// K-Means proximity selection over the accumulated gallery. All templates
/// are clustered together with k = number of users; each user keeps its
/// min(p, n) own templates closest to the centroid of the cluster that holds
/// most of that user's templates. params.k is ignored.
std::map<UserId, std::vector<Template>> select_kmeans(const Gallery& accumulated, std::size_t p,
                                                      const KMeansParams& params);

/// Dispatches on `method`. keep_all returns every user's templates as-is.
std::map<UserId, std::vector<Template>> select_templates(const Gallery& accumulated,
                                                         SelectionMethod method, std::size_t p,
                                                         const KMeansParams& params);

}  // namespace selfupdate
