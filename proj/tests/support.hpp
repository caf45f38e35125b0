#pragma once

// Test helpers and independent oracles. Nothing here calls the code paths it
// is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "selfupdate/core.hpp"
#include "selfupdate/random.hpp"

namespace selfupdate::testing {

inline FeatureVector fv(std::initializer_list<double> xs) { return FeatureVector(std::vector<double>(xs)); }

inline Sample sample(std::int64_t id, std::initializer_list<double> xs, std::int64_t user = 1) {
  return Sample{id, fv(xs), UserId{user}, std::nullopt};
}

inline Sample sample(std::int64_t id, std::vector<double> xs, std::int64_t user = 1) {
  return Sample{id, FeatureVector(std::move(xs)), UserId{user}, std::nullopt};
}

inline Template tmpl(std::int64_t id, std::initializer_list<double> xs, std::int64_t user = 1) {
  return Template(sample(id, xs, user), TemplateOrigin::enrolled, 0, static_cast<std::uint64_t>(id));
}

inline Template tmpl(std::int64_t id, std::vector<double> xs, std::int64_t user = 1) {
  return Template(sample(id, std::move(xs), user), TemplateOrigin::enrolled, 0,
                  static_cast<std::uint64_t>(id));
}

/// Enrolls (user, 1-D value) pairs with sample ids in input order.
inline Gallery gallery_1d(std::initializer_list<std::pair<std::int64_t, double>> entries,
                          Capacity cap = Capacity::unbounded()) {
  std::vector<std::pair<UserId, Sample>> slice;
  std::int64_t id = 0;
  for (const auto& [user, x] : entries) slice.emplace_back(UserId{user}, sample(id++, {x}, user));
  return gallery_enroll(slice, cap);
}

inline std::vector<double> random_vector(Rng& rng, std::size_t dim, double scale = 1.0) {
  std::vector<double> v(dim);
  for (auto& x : v) x = scale * rng.gaussian();
  return v;
}

inline std::set<std::int64_t> ids_of(const std::vector<Template>& ts) {
  std::set<std::int64_t> out;
  for (const auto& t : ts) out.insert(t.id());
  return out;
}

/// Brute-force EER: evaluate FAR/FRR by direct counting at every midpoint
/// between consecutive distinct scores (plus one point below and one above
/// the range), then interpolate linearly at the first sign change of
/// FAR - FRR.
inline double brute_force_eer(const std::vector<double>& genuine, const std::vector<double>& impostor) {
  std::vector<double> all = genuine;
  all.insert(all.end(), impostor.begin(), impostor.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<double> probes{all.front() - 1.0};
  for (std::size_t i = 0; i + 1 < all.size(); ++i) probes.push_back(0.5 * (all[i] + all[i + 1]));
  probes.push_back(all.back() + 1.0);
  std::vector<std::pair<double, double>> pts;
  for (double t : probes) {
    double fa = 0, fr = 0;
    for (double s : impostor) fa += s < t ? 1 : 0;
    for (double s : genuine) fr += s >= t ? 1 : 0;
    pts.emplace_back(fa / static_cast<double>(impostor.size()),
                     fr / static_cast<double>(genuine.size()));
  }
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double d = pts[j].first - pts[j].second;
    if (d < 0) continue;
    if (d == 0 || j == 0) return pts[j].first;
    const double dp = pts[j - 1].first - pts[j - 1].second;
    const double a = -dp / (d - dp);
    return pts[j - 1].first + a * (pts[j].first - pts[j - 1].first);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace selfupdate::testing
