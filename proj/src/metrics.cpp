#include "selfupdate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <locale>
#include <sstream>

namespace selfupdate {

std::vector<RocPoint> compute_roc(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty()) {
    throw Error(ErrorCode::empty_input, "EER needs non-empty genuine and impostor score sets");
  }
  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> im(impostor.begin(), impostor.end());
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  std::vector<double> thresholds;
  thresholds.reserve(g.size() + im.size());
  std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const auto ng = static_cast<double>(g.size());
  const auto ni = static_cast<double>(im.size());
  std::vector<RocPoint> roc;
  roc.reserve(thresholds.size() + 1);
  auto gi = g.begin();
  auto ii = im.begin();
  for (double t : thresholds) {
    gi = std::lower_bound(gi, g.end(), t);
    ii = std::lower_bound(ii, im.end(), t);
    roc.push_back({t, static_cast<double>(ii - im.begin()) / ni,
                   static_cast<double>(g.end() - gi) / ng});
  }
  roc.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return roc;
}

double compute_eer(std::span<const double> genuine, std::span<const double> impostor) {
  const auto roc = compute_roc(genuine, impostor);
  for (std::size_t j = 0; j < roc.size(); ++j) {
    const double diff = roc[j].far - roc[j].frr;
    if (diff < 0.0) continue;
    if (diff == 0.0 || j == 0) return roc[j].far;
    const double prev = roc[j - 1].far - roc[j - 1].frr;
    const double alpha = -prev / (diff - prev);
    return roc[j - 1].far + alpha * (roc[j].far - roc[j - 1].far);
  }
  return 0.0;  // unreachable: the last ROC point has far - frr = 1
}

ImpostorFraction impostor_fraction(const Gallery& g) {
  ImpostorFraction out;
  std::size_t total = 0;
  std::size_t wrong = 0;
  for (const auto& [user, ug] : g.users()) {
    std::size_t mine = 0;
    for (const auto& t : ug.templates) {
      if (t.sample().true_user != user) ++mine;
    }
    out.per_user[user] =
        ug.templates.empty() ? 0.0
                             : static_cast<double>(mine) / static_cast<double>(ug.templates.size());
    total += ug.templates.size();
    wrong += mine;
  }
  out.global = total == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(total);
  return out;
}

std::uint64_t storage_capped(std::uint64_t p, std::uint64_t k, std::uint64_t bytes_per_template) {
  if (p == 0 || k == 0 || bytes_per_template == 0) {
    throw Error(ErrorCode::invalid_argument, "storage_capped needs positive p, k and S");
  }
  return p * k * bytes_per_template;
}

double storage_uncapped(double beta, std::uint64_t iterations, double m_bar, std::uint64_t k,
                        std::uint64_t bytes_per_template) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "storage_uncapped needs beta in (0, 1]");
  }
  if (!(m_bar >= 0.0) || k == 0 || bytes_per_template == 0) {
    throw Error(ErrorCode::invalid_argument,
                "storage_uncapped needs m_bar >= 0 and positive k and S");
  }
  return beta * static_cast<double>(iterations) * m_bar * static_cast<double>(k) *
         static_cast<double>(bytes_per_template);
}

SnapshotMetrics evaluate_snapshot(const Gallery& g, const Batch& test, DistanceMetric m,
                                  std::uint64_t bytes_per_template) {
  SnapshotMetrics out;
  out.scores = score_sets(test, g, m);
  out.eer = compute_eer(out.scores.genuine, out.scores.impostor);
  out.impostor_fraction = impostor_fraction(g).global;
  out.gallery_bytes = g.template_count() * bytes_per_template;

  std::map<UserId, std::pair<std::vector<double>, std::vector<double>>> by_subject;
  for (const auto& row : out.scores.per_subject) {
    auto& [gen, imp] = by_subject[row.subject];
    (row.kind == ScoreKind::genuine ? gen : imp).push_back(row.score);
  }
  for (const auto& [subject, sets] : by_subject) {
    if (sets.first.empty() || sets.second.empty()) continue;
    out.per_subject_eer[subject] = compute_eer(sets.first, sets.second);
  }
  return out;
}

std::string format_real(double value) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(9) << value;
  return os.str();
}

void export_score_scatter(std::span<const ScoreRow> per_subject, std::ostream& out) {
  out << "subject,score,kind\n";
  for (const auto& row : per_subject) {
    out << row.subject.value << ',' << format_real(row.score) << ','
        << (row.kind == ScoreKind::genuine ? "genuine" : "impostor") << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "failed writing score scatter");
}

}  // namespace selfupdate
