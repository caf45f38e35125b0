#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "selfupdate/error.hpp"

namespace selfupdate {

/// Identity of an enrolled user. Opaque; only ordering and equality matter.
struct UserId {
  std::int64_t value = 0;

  auto operator<=>(const UserId&) const = default;
};

/// A d-dimensional vector of finite coordinates. Construction validates.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<double> values_;
};

struct Sample {
  std::int64_t id = 0;
  FeatureVector vector;
  // Ground truth. Only metrics and synthgen are allowed to read it.
  UserId true_user;
  std::optional<std::int64_t> session;

  bool operator==(const Sample&) const = default;
};

enum class TemplateOrigin { enrolled, self_updated };

class Template {
 public:
  /// inserted_at_batch must be 0 exactly when origin is enrolled.
  Template(Sample sample, TemplateOrigin origin, int inserted_at_batch,
           std::uint64_t sequence);

  const Sample& sample() const noexcept { return sample_; }
  std::int64_t id() const noexcept { return sample_.id; }
  const FeatureVector& vector() const noexcept { return sample_.vector; }
  TemplateOrigin origin() const noexcept { return origin_; }
  int inserted_at_batch() const noexcept { return inserted_at_batch_; }
  // Gallery-wide insertion order; lower means inserted earlier.
  std::uint64_t sequence() const noexcept { return sequence_; }

  bool operator==(const Template&) const = default;

 private:
  Sample sample_;
  TemplateOrigin origin_;
  int inserted_at_batch_;
  std::uint64_t sequence_;
};

/// Per-user template cap. An empty value means unbounded.
struct Capacity {
  std::optional<std::size_t> limit;

  static Capacity unbounded() { return {}; }
  static Capacity of(std::size_t p);

  bool allows(std::size_t n) const noexcept { return !limit || n <= *limit; }
  bool operator==(const Capacity&) const = default;
};

struct UserGallery {
  UserId user;
  std::vector<Template> templates;  // insertion order
  Capacity cap;

  bool operator==(const UserGallery&) const = default;
};

/// Immutable-by-convention gallery. Every mutating operation returns a new
/// value; the accumulated (pre-selection) state may exceed the cap.
class Gallery {
 public:
  Gallery(std::map<UserId, UserGallery> users, std::size_t dim,
          std::uint64_t next_sequence);

  std::size_t dim() const noexcept { return dim_; }
  const std::map<UserId, UserGallery>& users() const noexcept { return users_; }
  const UserGallery& user(UserId id) const;
  std::vector<UserId> user_ids() const;
  std::size_t template_count() const noexcept;
  std::uint64_t next_sequence() const noexcept { return next_sequence_; }

  /// Appends a self-updated template to `owner`. Does not enforce the cap.
  Gallery with_inserted(UserId owner, const Sample& sample, int batch_index) const;

  bool operator==(const Gallery&) const = default;

 private:
  std::map<UserId, UserGallery> users_;
  std::size_t dim_;
  std::uint64_t next_sequence_;
};

struct Batch {
  int index = 0;
  std::vector<Sample> samples;
};

/// Builds the initial gallery. Templates keep the order of `slice`.
Gallery gallery_enroll(std::span<const std::pair<UserId, Sample>> slice,
                       Capacity cap);

/// Replaces one user's templates by `selected`, which must be a non-empty
/// subset (by sample id) of that user's current templates and fit the cap.
/// Relative insertion order of the kept templates is preserved.
Gallery gallery_replace_user_set(const Gallery& gallery, UserId user,
                                 std::span<const Template> selected);

/// Throws dimension_mismatch when the two dims differ.
void require_same_dim(std::size_t expected, std::size_t actual,
                      const char* what);

}  // namespace selfupdate
