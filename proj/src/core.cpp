#include "selfupdate/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace selfupdate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::infeasible: return "infeasible";
  }
  return "unknown";
}

FeatureVector::FeatureVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorCode::invalid_argument, "feature vector must have dim >= 1");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::invalid_argument,
                  "non-finite feature coordinate at index " + std::to_string(i));
    }
  }
}

Template::Template(Sample sample, TemplateOrigin origin, int inserted_at_batch,
                   std::uint64_t sequence)
    : sample_(std::move(sample)),
      origin_(origin),
      inserted_at_batch_(inserted_at_batch),
      sequence_(sequence) {
  if (inserted_at_batch_ < 0) {
    throw Error(ErrorCode::invalid_argument, "inserted_at_batch must be non-negative");
  }
  if ((inserted_at_batch_ == 0) != (origin_ == TemplateOrigin::enrolled)) {
    throw Error(ErrorCode::invalid_argument,
                "inserted_at_batch is 0 iff the template is enrolled");
  }
}

Capacity Capacity::of(std::size_t p) {
  if (p == 0) throw Error(ErrorCode::invalid_argument, "capacity p must be >= 1");
  return Capacity{p};
}

void require_same_dim(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": expected dim " + std::to_string(expected) +
                    ", got " + std::to_string(actual));
  }
}

Gallery::Gallery(std::map<UserId, UserGallery> users, std::size_t dim,
                 std::uint64_t next_sequence)
    : users_(std::move(users)), dim_(dim), next_sequence_(next_sequence) {}

const UserGallery& Gallery::user(UserId id) const {
  auto it = users_.find(id);
  if (it == users_.end()) {
    throw Error(ErrorCode::not_found, "user " + std::to_string(id.value) + " not enrolled");
  }
  return it->second;
}

std::vector<UserId> Gallery::user_ids() const {
  std::vector<UserId> ids;
  ids.reserve(users_.size());
  for (const auto& [id, _] : users_) ids.push_back(id);
  return ids;
}

std::size_t Gallery::template_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, ug] : users_) n += ug.templates.size();
  return n;
}

Gallery Gallery::with_inserted(UserId owner, const Sample& sample, int batch_index) const {
  require_same_dim(dim_, sample.vector.dim(), "inserted sample");
  auto users = users_;
  auto it = users.find(owner);
  if (it == users.end()) {
    throw Error(ErrorCode::not_found, "user " + std::to_string(owner.value) + " not enrolled");
  }
  it->second.templates.emplace_back(sample, TemplateOrigin::self_updated, batch_index,
                                    next_sequence_);
  return Gallery(std::move(users), dim_, next_sequence_ + 1);
}

Gallery gallery_enroll(std::span<const std::pair<UserId, Sample>> slice, Capacity cap) {
  if (slice.empty()) throw Error(ErrorCode::empty_input, "enrollment slice is empty");
  const std::size_t dim = slice.front().second.vector.dim();
  std::map<UserId, UserGallery> users;
  std::set<std::int64_t> seen_ids;
  std::uint64_t seq = 0;
  for (const auto& [user, sample] : slice) {
    require_same_dim(dim, sample.vector.dim(), "enrollment sample");
    if (!seen_ids.insert(sample.id).second) {
      throw Error(ErrorCode::invalid_argument,
                  "duplicate sample id " + std::to_string(sample.id) + " in enrollment");
    }
    auto& ug = users[user];
    ug.user = user;
    ug.cap = cap;
    ug.templates.emplace_back(sample, TemplateOrigin::enrolled, 0, seq++);
  }
  for (const auto& [id, ug] : users) {
    if (!cap.allows(ug.templates.size())) {
      throw Error(ErrorCode::invalid_argument,
                  "user " + std::to_string(id.value) + " enrolls " +
                      std::to_string(ug.templates.size()) + " samples, above the cap");
    }
  }
  return Gallery(std::move(users), dim, seq);
}

Gallery gallery_replace_user_set(const Gallery& gallery, UserId user,
                                 std::span<const Template> selected) {
  const auto& current = gallery.user(user);
  if (selected.empty()) {
    throw Error(ErrorCode::empty_input,
                "selection for user " + std::to_string(user.value) + " is empty");
  }
  if (!current.cap.allows(selected.size())) {
    throw Error(ErrorCode::invalid_argument,
                "selection of " + std::to_string(selected.size()) + " templates exceeds cap " +
                    std::to_string(*current.cap.limit));
  }
  std::set<std::int64_t> wanted;
  for (const auto& t : selected) {
    if (!wanted.insert(t.id()).second) {
      throw Error(ErrorCode::invalid_argument,
                  "template " + std::to_string(t.id()) + " selected twice");
    }
  }
  std::vector<Template> kept;
  kept.reserve(selected.size());
  for (const auto& t : current.templates) {
    if (wanted.contains(t.id())) kept.push_back(t);
  }
  if (kept.size() != wanted.size()) {
    throw Error(ErrorCode::invalid_argument,
                "selection contains a template foreign to user " + std::to_string(user.value));
  }
  auto users = gallery.users();
  users[user].templates = std::move(kept);
  return Gallery(std::move(users), gallery.dim(), gallery.next_sequence());
}

}  // namespace selfupdate
