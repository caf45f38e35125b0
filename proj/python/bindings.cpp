#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "selfupdate/engine.hpp"
#include "selfupdate/harness.hpp"
#include "selfupdate/metrics.hpp"
#include "selfupdate/synthgen.hpp"

namespace py = pybind11;
namespace su = selfupdate;
using namespace pybind11::literals;

namespace {

using Rows = std::vector<std::vector<double>>;

std::vector<su::Sample> to_samples(const Rows& features, const std::vector<std::int64_t>& users,
                                   std::optional<std::vector<std::int64_t>> ids) {
  if (features.size() != users.size()) {
    throw su::Error(su::ErrorCode::dimension_mismatch, "features and users differ in length");
  }
  if (ids && ids->size() != features.size()) {
    throw su::Error(su::ErrorCode::dimension_mismatch, "features and ids differ in length");
  }
  std::vector<su::Sample> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    out.push_back(su::Sample{ids ? (*ids)[i] : static_cast<std::int64_t>(i), su::FeatureVector(features[i]),
                             su::UserId{users[i]}, std::nullopt});
  }
  return out;
}

std::vector<su::Template> to_candidates(const Rows& points) {
  std::vector<su::Template> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    su::Sample s{static_cast<std::int64_t>(i), su::FeatureVector(points[i]), su::UserId{0}, std::nullopt};
    out.emplace_back(std::move(s), su::TemplateOrigin::enrolled, 0, i);
  }
  return out;
}

std::vector<std::int64_t> ids(const std::vector<su::Template>& ts) {
  std::vector<std::int64_t> out;
  for (const auto& t : ts) out.push_back(t.id());
  return out;
}

su::ThresholdPolicy to_policy(const py::object& policy) {
  if (py::isinstance<py::str>(policy)) {
    const auto s = policy.cast<std::string>();
    if (s == "zero_far" || s == "zero-far") return su::ThresholdPolicy::zero_far();
    throw su::Error(su::ErrorCode::invalid_argument, "policy must be 'zero_far' or a quantile");
  }
  return su::ThresholdPolicy::far_quantile(policy.cast<double>());
}

su::DistanceMetric to_metric(const std::string& m) {
  if (m == "l2" || m == "euclidean") return su::DistanceMetric::euclidean;
  if (m == "l1") return su::DistanceMetric::l1;
  throw su::Error(su::ErrorCode::invalid_argument, "metric must be 'l2' or 'l1'");
}

su::SynthParams to_synth(const py::dict& d) {
  su::SynthParams p;
  for (const auto& [key, value] : d) {
    const auto k = key.cast<std::string>();
    if (k == "k_users") p.k_users = value.cast<std::size_t>();
    else if (k == "dim") p.dim = value.cast<std::size_t>();
    else if (k == "sigma") p.sigma = value.cast<double>();
    else if (k == "separation") p.separation = value.cast<double>();
    else if (k == "tail_eps") p.tail_eps = value.cast<double>();
    else if (k == "samples_per_user") p.samples_per_user = value.cast<std::size_t>();
    else if (k == "seed") p.seed = value.cast<std::uint64_t>();
    else throw su::Error(su::ErrorCode::invalid_argument, "unknown synth key '" + k + "'");
  }
  return p;
}

py::dict row_dict(const su::MetricsRow& r) {
  return py::dict("run"_a = r.run, "batch"_a = r.batch, "method"_a = r.method, "eer"_a = r.eer,
                  "impostor_fraction"_a = r.impostor_fraction, "classify_ms"_a = r.classify_ms,
                  "select_ms"_a = r.select_ms, "gallery_bytes"_a = r.gallery_bytes);
}

}  // namespace

PYBIND11_MODULE(_selfupdate, m) {
  m.doc() = "Self-updating template galleries for distance-based verification";

  // Lives as long as the interpreter; never released.
  static py::handle error_type =
      PyErr_NewException("selfupdate._selfupdate.SelfUpdateError", PyExc_RuntimeError, nullptr);
  m.attr("SelfUpdateError") = error_type;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const su::Error& e) {
      py::object inst = error_type(e.what());
      inst.attr("code") = std::string(su::to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  m.def("compute_eer", [](const std::vector<double>& g, const std::vector<double>& i) { return su::compute_eer(g, i); },
        "genuine"_a, "impostor"_a);
  m.def(
      "compute_roc",
      [](const std::vector<double>& g, const std::vector<double>& i) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& r : su::compute_roc(g, i)) out.emplace_back(r.threshold, r.far, r.frr);
        return out;
      },
      "genuine"_a, "impostor"_a, "(threshold, far, frr) per distinct score plus +inf.");
  m.def("storage_capped", &su::storage_capped, "p"_a, "k"_a, "bytes_per_template"_a);
  m.def("storage_uncapped", &su::storage_uncapped, "beta"_a, "iterations"_a, "m_bar"_a, "k"_a,
        "bytes_per_template"_a);

  // Subset selection over a plain point list; results are point indices.
  m.def("select_mdist", [](const Rows& pts, std::size_t p) { return ids(su::select_mdist(to_candidates(pts), p)); },
        "points"_a, "p"_a);
  m.def("select_dend", [](const Rows& pts, std::size_t p) { return ids(su::select_dend(to_candidates(pts), p)); },
        "points"_a, "p"_a);
  m.def(
      "oracle_subset_select",
      [](const Rows& pts, std::size_t p, bool maximize) {
        return ids(su::oracle_subset_select(to_candidates(pts), p,
                                            maximize ? su::SubsetObjective::max_sum_pairwise_sq
                                                     : su::SubsetObjective::min_sum_pairwise_sq));
      },
      "points"_a, "p"_a, "maximize"_a = false);

  m.def(
      "kmeans",
      [](const Rows& pts, std::size_t k, std::optional<std::vector<std::int64_t>> labels,
         std::optional<std::uint64_t> seed, std::size_t max_iter, double rel_tol) {
        std::vector<su::FeatureVector> points(pts.begin(), pts.end());
        su::KMeansParams params{k, max_iter, rel_tol,
                                seed ? su::KMeansInit::seeded_random(*seed) : su::KMeansInit::user_means()};
        std::vector<su::UserId> lab;
        if (labels)
          for (auto l : *labels) lab.push_back(su::UserId{l});
        const auto c = su::kmeans(points, params, lab);
        Rows centroids;
        for (const auto& cv : c.centroids) centroids.emplace_back(cv.values().begin(), cv.values().end());
        return py::dict("assignment"_a = c.assignment, "centroids"_a = centroids, "inertia"_a = c.inertia,
                        "inertia_history"_a = c.inertia_history, "iterations"_a = c.iterations,
                        "converged"_a = c.converged);
      },
      "points"_a, "k"_a, "labels"_a = py::none(), "seed"_a = py::none(), "max_iter"_a = 100,
      "rel_tol"_a = 1e-6,
      "Lloyd's algorithm. Seeds from per-label means unless a random seed is given.");

  m.def(
      "generate",
      [](const py::dict& params) {
        const auto ds = su::generate(to_synth(params));
        Rows features, means;
        std::vector<std::int64_t> users, sample_ids;
        for (const auto& s : ds.samples) {
          features.emplace_back(s.vector.values().begin(), s.vector.values().end());
          users.push_back(s.true_user.value);
          sample_ids.push_back(s.id);
        }
        for (const auto& mv : ds.means) means.emplace_back(mv.values().begin(), mv.values().end());
        return py::dict("features"_a = features, "users"_a = users, "ids"_a = sample_ids, "means"_a = means,
                        "from_mode"_a = ds.from_mode);
      },
      "params"_a, "Synthetic dominating-mode dataset. Keys: k_users, dim, sigma, separation, tail_eps, "
                  "samples_per_user, seed.");

  py::class_<su::Gallery>(m, "Gallery")
      .def_static(
          "enroll",
          [](const Rows& features, const std::vector<std::int64_t>& users,
             std::optional<std::vector<std::int64_t>> ids, std::optional<std::size_t> cap) {
            std::vector<std::pair<su::UserId, su::Sample>> slice;
            for (auto& s : to_samples(features, users, ids)) slice.emplace_back(s.true_user, std::move(s));
            return su::gallery_enroll(slice, cap ? su::Capacity::of(*cap) : su::Capacity::unbounded());
          },
          "features"_a, "users"_a, "ids"_a = py::none(), "cap"_a = py::none())
      .def_property_readonly("dim", &su::Gallery::dim)
      .def_property_readonly("template_count", &su::Gallery::template_count)
      .def_property_readonly("user_ids", [](const su::Gallery& g) {
        std::vector<std::int64_t> out;
        for (const auto& u : g.user_ids()) out.push_back(u.value);
        return out;
      })
      .def("template_ids", [](const su::Gallery& g, std::int64_t user) { return ids(g.user(su::UserId{user}).templates); },
           "user"_a)
      .def("impostor_fraction", [](const su::Gallery& g) { return su::impostor_fraction(g).global; })
      .def(
          "estimate_threshold",
          [](const su::Gallery& g, const py::object& policy, const std::string& metric) {
            return su::estimate_threshold(g, to_policy(policy), to_metric(metric));
          },
          "policy"_a = 0.01, "metric"_a = "l2")
      .def(
          "classify",
          [](const su::Gallery& g, const Rows& features, double t_star, std::optional<std::vector<std::int64_t>> ids,
             const std::string& metric) {
            std::vector<std::int64_t> users(features.size(), 0);
            const su::Batch b{1, to_samples(features, users, ids)};
            std::vector<std::tuple<std::int64_t, std::optional<std::int64_t>, double>> out;
            for (const auto& d : su::classify_batch(b, g, t_star, to_metric(metric))) {
              out.emplace_back(d.sample_id, d.label ? std::optional<std::int64_t>(d.label->value) : std::nullopt,
                               d.distance);
            }
            return out;
          },
          "features"_a, "t_star"_a, "ids"_a = py::none(), "metric"_a = "l2",
          "(sample_id, label or None, distance) per probe against the nearest template.")
      .def(
          "update",
          [](const su::Gallery& g, const Rows& features, const std::vector<std::int64_t>& true_users,
             const std::vector<std::int64_t>& ids, int batch_index, const std::string& method, std::size_t p,
             double t_star, const std::string& metric) {
            const su::Batch b{batch_index, to_samples(features, true_users, ids)};
            su::EngineConfig cfg;
            cfg.method = su::parse_selection_method(method);
            cfg.p = p;
            cfg.metric = to_metric(metric);
            auto [out, report] = su::run_update_cycle(g, b, cfg, t_star);
            return py::make_tuple(out, py::dict("n_accepted"_a = report.n_accepted,
                                                "n_rejected"_a = report.n_rejected,
                                                "inserted"_a = report.insertions.size(),
                                                "evicted"_a = report.evictions.size()));
          },
          "features"_a, "true_users"_a, "ids"_a, "batch_index"_a, "method"_a = "mdist", "p"_a = 6,
          "t_star"_a, "metric"_a = "l2", "One classify-insert-select cycle; returns (gallery, report).");

  m.def(
      "run_experiment",
      [](std::optional<std::filesystem::path> dataset, std::optional<py::dict> synth,
         const std::vector<std::string>& methods, std::size_t p, std::size_t n_batches, std::size_t runs,
         const py::object& policy, const std::string& metric, std::uint64_t seed,
         std::optional<std::filesystem::path> output_dir, bool record_timings) {
        if (dataset.has_value() == synth.has_value()) {
          throw su::Error(su::ErrorCode::invalid_argument, "give exactly one of dataset or synth");
        }
        su::ExperimentConfig cfg;
        if (dataset) cfg.source = *dataset;
        else cfg.source = to_synth(*synth);
        cfg.methods.clear();
        for (const auto& name : methods) cfg.methods.push_back(su::parse_selection_method(name));
        cfg.p = p;
        cfg.n_batches = n_batches;
        cfg.runs = runs;
        cfg.policy = to_policy(policy);
        cfg.metric = to_metric(metric);
        cfg.base_seed = seed;
        cfg.output_dir = output_dir;
        cfg.record_timings = record_timings;
        const auto r = su::run_experiment(cfg);
        py::list rows;
        for (const auto& row : r.rows) rows.append(row_dict(row));
        return rows;
      },
      py::kw_only(), "dataset"_a = py::none(), "synth"_a = py::none(),
      "methods"_a = std::vector<std::string>{"kmeans", "mdist"}, "p"_a = 6, "n_batches"_a = 7, "runs"_a = 10,
      "policy"_a = 0.01, "metric"_a = "l2", "seed"_a = 0, "output_dir"_a = py::none(), "record_timings"_a = true,
      "Full batch protocol; returns one dict per (run, method, batch).");
}
