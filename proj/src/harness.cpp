#include "selfupdate/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <map>
#include <set>
#include <sstream>

#include "selfupdate/engine.hpp"
#include "selfupdate/metrics.hpp"
#include "selfupdate/random.hpp"

namespace selfupdate {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* column) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    parse_fail(line, std::string("bad ") + column + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<Sample> parse_dataset(std::istream& in, std::optional<std::size_t> expected_dim) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) parse_fail(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 4 || header[0] != "user_id" || header[1] != "sample_id" ||
      header[2] != "session") {
    parse_fail(1, "header must be user_id,sample_id,session,f_0,...");
  }
  const std::size_t dim = header.size() - 3;
  for (std::size_t d = 0; d < dim; ++d) {
    if (header[3 + d] != "f_" + std::to_string(d)) {
      parse_fail(1, "feature column " + std::to_string(d) + " must be named f_" +
                        std::to_string(d));
    }
  }
  if (expected_dim && *expected_dim != dim) {
    throw Error(ErrorCode::dimension_mismatch, "dataset has dim " + std::to_string(dim) +
                                                   ", expected " +
                                                   std::to_string(*expected_dim));
  }

  std::vector<Sample> samples;
  std::set<std::int64_t> ids;
  std::set<UserId> users;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != dim + 3) {
      parse_fail(line_no, "expected " + std::to_string(dim + 3) + " fields, got " +
                              std::to_string(fields.size()));
    }
    Sample s;
    s.true_user = UserId{parse_number<std::int64_t>(fields[0], line_no, "user_id")};
    s.id = parse_number<std::int64_t>(fields[1], line_no, "sample_id");
    if (!fields[2].empty()) {
      const auto session = parse_number<std::int64_t>(fields[2], line_no, "session");
      if (session < 0) parse_fail(line_no, "session must be non-negative");
      s.session = session;
    }
    std::vector<double> values(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      values[d] = parse_number<double>(fields[3 + d], line_no, "feature");
      if (!std::isfinite(values[d])) {
        parse_fail(line_no, "non-finite value in f_" + std::to_string(d));
      }
    }
    s.vector = FeatureVector(std::move(values));
    if (!ids.insert(s.id).second) {
      parse_fail(line_no, "duplicate sample_id " + std::to_string(s.id));
    }
    users.insert(s.true_user);
    samples.push_back(std::move(s));
  }
  if (users.size() < 2) {
    throw Error(ErrorCode::parse_error, "dataset needs at least two distinct user_ids");
  }
  return samples;
}

std::vector<Sample> load_dataset(const std::filesystem::path& path,
                                 std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open dataset " + path.string());
  return parse_dataset(in, expected_dim);
}

void write_dataset(std::span<const Sample> samples, std::ostream& out) {
  if (samples.empty()) throw Error(ErrorCode::empty_input, "no samples to write");
  const std::size_t dim = samples.front().vector.dim();
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "user_id,sample_id,session";
  for (std::size_t d = 0; d < dim; ++d) os << ",f_" << d;
  os << '\n';
  for (const auto& s : samples) {
    require_same_dim(dim, s.vector.dim(), "dataset row");
    os << s.true_user.value << ',' << s.id << ',';
    if (s.session) os << *s.session;
    for (double x : s.vector.values()) os << ',' << x;
    os << '\n';
  }
  out << os.str();
  if (!out) throw Error(ErrorCode::io_error, "failed writing dataset");
}

Gallery gallery_from_samples(std::span<const Sample> samples) {
  std::vector<std::pair<UserId, Sample>> slice;
  slice.reserve(samples.size());
  for (const auto& s : samples) slice.emplace_back(s.true_user, s);
  return gallery_enroll(slice, Capacity::unbounded());
}

Split split_batches(std::span<const Sample> dataset, const SplitOptions& options) {
  if (options.n_batches < 3) {
    throw Error(ErrorCode::invalid_argument, "need at least 3 batches (enroll, adapt, test)");
  }
  if (options.p < 1) throw Error(ErrorCode::invalid_argument, "p must be >= 1");
  const std::size_t need = options.n_batches * options.p;

  std::map<UserId, std::vector<const Sample*>> by_user;
  for (const auto& s : dataset) by_user[s.true_user].push_back(&s);

  Split split;
  Rng rng(options.seed);
  std::vector<std::vector<Sample>> batches(options.n_batches);
  std::size_t kept_users = 0;
  for (auto& [user, list] : by_user) {
    if (list.size() < need) {
      if (options.strict) {
        throw Error(ErrorCode::infeasible,
                    "user " + std::to_string(user.value) + " has " +
                        std::to_string(list.size()) + " samples, needs " + std::to_string(need));
      }
      split.dropped_users.push_back(user);
      continue;
    }
    if (options.chronological) {
      for (const auto* s : list) {
        if (!s->session) {
          throw Error(ErrorCode::invalid_argument,
                      "chronological split needs a session on sample " + std::to_string(s->id));
        }
      }
      std::stable_sort(list.begin(), list.end(), [](const Sample* a, const Sample* b) {
        return std::tie(*a->session, a->id) < std::tie(*b->session, b->id);
      });
    } else {
      for (std::size_t i = list.size() - 1; i > 0; --i) {
        std::swap(list[i], list[rng.uniform_index(i + 1)]);
      }
    }
    for (std::size_t b = 0; b < options.n_batches; ++b) {
      for (std::size_t j = 0; j < options.p; ++j) {
        batches[b].push_back(*list[b * options.p + j]);
      }
    }
    ++kept_users;
  }
  if (kept_users < 2) {
    throw Error(ErrorCode::infeasible, "fewer than two users have enough samples to split");
  }

  for (auto& s : batches.front()) split.enroll.emplace_back(s.true_user, std::move(s));
  for (std::size_t b = 1; b + 1 < options.n_batches; ++b) {
    split.adaptation.push_back(Batch{static_cast<int>(b), std::move(batches[b])});
  }
  split.test = Batch{static_cast<int>(options.n_batches - 1), std::move(batches.back())};
  return split;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_batches < 3) {
    throw Error(ErrorCode::invalid_argument, "n_batches must be >= 3 (enroll, adapt, test)");
  }
  if (cfg.p < 1) throw Error(ErrorCode::invalid_argument, "p must be >= 1");
  if (cfg.runs < 1) throw Error(ErrorCode::invalid_argument, "runs must be >= 1");
  if (cfg.bytes_per_template && *cfg.bytes_per_template == 0) {
    throw Error(ErrorCode::invalid_argument, "bytes per template must be positive");
  }
  if (const auto* synth = std::get_if<SynthParams>(&cfg.source)) validate(*synth);
}

namespace {

double to_ms(std::chrono::nanoseconds ns) {
  return std::chrono::duration<double, std::milli>(ns).count();
}

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

void open_and_write(const std::filesystem::path& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  writer(out);
}

class Recorder {
 public:
  Recorder(const ExperimentConfig& cfg, std::uint64_t bytes_per_template)
      : cfg_(cfg), bytes_(bytes_per_template) {}

  void record(std::size_t run, std::size_t batch, const std::string& method, const Gallery& g,
              const Batch& test, const UpdateCycleReport* report) {
    const auto m = evaluate_snapshot(g, test, cfg_.metric, bytes_);
    MetricsRow row{run, batch, method, m.eer, m.impostor_fraction, 0.0, 0.0, m.gallery_bytes};
    if (report && cfg_.record_timings) {
      row.classify_ms = to_ms(report->elapsed_classify);
      row.select_ms = to_ms(report->elapsed_select);
    }
    result.rows.push_back(row);
    for (const auto& [subject, eer] : m.per_subject_eer) {
      result.subject_eer.push_back({run, batch, method, subject, eer});
    }
  }

  ExperimentResult result;

 private:
  const ExperimentConfig& cfg_;
  std::uint64_t bytes_;
};

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                   const std::string& failure) {
  if (!cfg.output_dir) return;
  std::filesystem::create_directories(*cfg.output_dir);
  open_and_write(*cfg.output_dir / "metrics.csv", [&](std::ostream& out) {
    write_metrics(result.rows, out);
    if (!failure.empty()) out << "# FAILED: " << failure << '\n';
  });
  if (!failure.empty()) return;
  open_and_write(*cfg.output_dir / "aggregate.csv",
                 [&](std::ostream& out) { write_aggregate(result.aggregate, out); });
  open_and_write(*cfg.output_dir / "subject_eer.csv",
                 [&](std::ostream& out) { write_subject_eer(result.subject_eer, out); });
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::vector<Sample> dataset =
      std::holds_alternative<SynthParams>(cfg.source)
          ? generate(std::get<SynthParams>(cfg.source)).samples
          : load_dataset(std::get<std::filesystem::path>(cfg.source));
  const std::size_t dim = dataset.front().vector.dim();
  const std::uint64_t bytes = cfg.bytes_per_template.value_or(4 * dim);

  Recorder rec(cfg, bytes);
  rec.result.bytes_per_template = bytes;
  try {
    for (std::size_t run = 1; run <= cfg.runs; ++run) {
      SplitOptions opts{cfg.n_batches, cfg.p, cfg.base_seed + run, cfg.strict, cfg.chronological};
      const Split split = split_batches(dataset, opts);
      if (run == 1) rec.result.dropped_users = split.dropped_users;
      const Gallery g0 = gallery_enroll(split.enroll, Capacity::of(cfg.p));
      rec.result.users = g0.users().size();

      if (cfg.output_dir) {
        std::filesystem::create_directories(*cfg.output_dir);
        const auto scores = score_sets(split.test, g0, cfg.metric);
        open_and_write(*cfg.output_dir / ("scatter_run" + std::to_string(run) + ".csv"),
                       [&](std::ostream& out) { export_score_scatter(scores.per_subject, out); });
      }

      for (std::size_t b = 0; b <= split.adaptation.size(); ++b) {
        rec.record(run, b, kNoUpdateMethod, g0, split.test, nullptr);
      }
      for (const auto method : cfg.methods) {
        EngineConfig ecfg{method, cfg.p, cfg.metric, cfg.policy, cfg.kmeans_params};
        const Gallery start = method == SelectionMethod::keep_all
                                  ? gallery_enroll(split.enroll, Capacity::unbounded())
                                  : g0;
        const auto seq = run_sequence(start, split.adaptation, ecfg);
        for (std::size_t b = 0; b < seq.snapshots.size(); ++b) {
          rec.record(run, b, std::string(to_string(method)), seq.snapshots[b], split.test,
                     b == 0 ? nullptr : &seq.reports[b - 1]);
        }
      }
    }
  } catch (const std::exception& e) {
    write_outputs(cfg, rec.result, e.what());
    throw;
  }
  rec.result.aggregate = aggregate_rows(rec.result.rows);
  write_outputs(cfg, rec.result, "");
  return std::move(rec.result);
}

std::vector<AggregateRow> aggregate_rows(std::span<const MetricsRow> rows) {
  // Keyed by first appearance of the method, then batch.
  std::vector<std::string> method_order;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const MetricsRow*>> groups;
  for (const auto& r : rows) {
    auto it = std::find(method_order.begin(), method_order.end(), r.method);
    if (it == method_order.end()) it = method_order.insert(method_order.end(), r.method);
    const auto m = static_cast<std::size_t>(it - method_order.begin());
    groups[{m, r.batch}].push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, members] : groups) {
    std::vector<double> eer, imp, cls, sel, bytes;
    for (const auto* r : members) {
      eer.push_back(r->eer);
      imp.push_back(r->impostor_fraction);
      cls.push_back(r->classify_ms);
      sel.push_back(r->select_ms);
      bytes.push_back(static_cast<double>(r->gallery_bytes));
    }
    out.push_back({method_order[key.first], key.second, members.size(), stat_of(eer),
                   stat_of(imp), stat_of(cls), stat_of(sel), stat_of(bytes)});
  }
  return out;
}

void write_metrics(std::span<const MetricsRow> rows, std::ostream& out) {
  out << "run,batch,method,eer,impostor_fraction,classify_ms,select_ms,gallery_bytes\n";
  for (const auto& r : rows) {
    out << r.run << ',' << r.batch << ',' << r.method << ',' << format_real(r.eer) << ','
        << format_real(r.impostor_fraction) << ',' << format_real(r.classify_ms) << ','
        << format_real(r.select_ms) << ',' << r.gallery_bytes << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "failed writing metrics");
}

void write_aggregate(std::span<const AggregateRow> rows, std::ostream& out) {
  out << "method,batch,runs,eer_mean,eer_sd,impostor_fraction_mean,impostor_fraction_sd,"
         "classify_ms_mean,classify_ms_sd,select_ms_mean,select_ms_sd,gallery_bytes_mean,"
         "gallery_bytes_sd\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.batch << ',' << r.runs;
    for (const Stat* s : {&r.eer, &r.impostor_fraction, &r.classify_ms, &r.select_ms,
                          &r.gallery_bytes}) {
      out << ',' << format_real(s->mean) << ',' << format_real(s->sd);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "failed writing aggregate");
}

void write_subject_eer(std::span<const SubjectEerRow> rows, std::ostream& out) {
  out << "run,batch,method,subject,eer\n";
  for (const auto& r : rows) {
    out << r.run << ',' << r.batch << ',' << r.method << ',' << r.subject.value << ','
        << format_real(r.eer) << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "failed writing subject eer");
}

}  // namespace selfupdate
