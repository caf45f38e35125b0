#include "selfupdate/engine.hpp"

#include <set>
#include <string>

namespace selfupdate {

namespace {

using Clock = std::chrono::steady_clock;

void validate(const EngineConfig& cfg) {
  if (cfg.p < 1) throw Error(ErrorCode::invalid_argument, "engine p must be >= 1");
}

}  // namespace

std::pair<Gallery, UpdateCycleReport> run_update_cycle(const Gallery& g, const Batch& b,
                                                       const EngineConfig& cfg, double t_star) {
  validate(cfg);
  if (!(t_star >= 0.0)) throw Error(ErrorCode::invalid_argument, "t* must be >= 0");
  for (const auto& s : b.samples) require_same_dim(g.dim(), s.vector.dim(), "batch sample");

  UpdateCycleReport report;
  report.batch_index = b.index;
  report.t_star_used = t_star;

  const auto t0 = Clock::now();
  const auto decisions = classify_batch(b, g, t_star, cfg.metric);
  report.elapsed_classify = Clock::now() - t0;

  Gallery accumulated = g;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    if (!d.accepted()) {
      ++report.n_rejected;
      continue;
    }
    ++report.n_accepted;
    accumulated = accumulated.with_inserted(*d.label, b.samples[i], b.index);
    report.insertions.push_back({d.sample_id, *d.label});
  }

  if (cfg.method == SelectionMethod::keep_all) return {std::move(accumulated), std::move(report)};

  const auto t1 = Clock::now();
  const auto selected = select_templates(accumulated, cfg.method, cfg.p, cfg.kmeans_params);
  report.elapsed_select = Clock::now() - t1;

  Gallery result = accumulated;
  for (const auto& [user, kept] : selected) {
    std::set<std::int64_t> kept_ids;
    for (const auto& t : kept) kept_ids.insert(t.id());
    for (const auto& t : accumulated.user(user).templates) {
      if (!kept_ids.contains(t.id())) report.evictions.push_back({t.id(), user});
    }
    result = gallery_replace_user_set(result, user, kept);
  }
  return {std::move(result), std::move(report)};
}

SequenceResult run_sequence(const Gallery& g0, std::span<const Batch> batches,
                            const EngineConfig& cfg) {
  validate(cfg);
  for (std::size_t i = 1; i < batches.size(); ++i) {
    if (batches[i].index <= batches[i - 1].index) {
      throw Error(ErrorCode::invalid_argument,
                  "batches must be consumed in increasing index order");
    }
  }
  SequenceResult out{g0, {}, {g0}};
  if (batches.empty()) return out;

  double t_star = estimate_threshold(g0, cfg.policy, cfg.metric);
  for (const auto& b : batches) {
    auto [next, report] = run_update_cycle(out.final_gallery, b, cfg, t_star);
    out.final_gallery = std::move(next);
    out.reports.push_back(std::move(report));
    out.snapshots.push_back(out.final_gallery);
    t_star = estimate_threshold(out.final_gallery, cfg.policy, cfg.metric);
  }
  return out;
}

}  // namespace selfupdate
