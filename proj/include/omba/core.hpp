#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace omba {

// ---------------------------------------------------------------------------
// Domain vocabulary shared by every module: units (products and users),
// baskets, day windows, and the embedding store that backs online training.
// ---------------------------------------------------------------------------

enum class UnitKind : std::uint8_t { Product = 0, User = 1 };

/// A unit is anything that gets an embedding. The same string may name a
/// product and a user without clashing; identity is (kind, id).
struct UnitId {
  UnitKind kind;
  std::string id;

  bool operator==(const UnitId& other) const {
    return kind == other.kind && id == other.id;
  }
};

struct BasketItem {
  std::string product;
  /// Unit price in dollars. Absent when the source data carries no price
  /// column value; training then falls back to a neutral context weight.
  std::optional<double> price;
};

/// One shopping transaction: a timestamped set of products bought by a user.
/// items never contains the same product id twice. The id is plumbing for
/// file round-trips; synthetic streams may leave it empty.
struct Basket {
  std::string id;
  std::int64_t timestamp = 0;  // seconds since epoch
  std::string user;
  std::vector<BasketItem> items;
};

/// One day (or window_days) of baskets. Indices are contiguous from zero;
/// empty windows are materialized so the stream has no gaps.
struct Window {
  std::int64_t index = 0;
  std::vector<Basket> baskets;
};

struct Hyperparameters {
  int dimension = 300;
  double eta = 0.05;        // base SGD learning rate
  int negatives = 3;        // |N_z|
  int epochs = 50;          // passes per window
  double tau = 0.1;         // intra-agreement damping strength
  double price_clip = 10.0; // price cap inside the value weight
  std::uint64_t seed = 42;
};

// ---------------------------------------------------------------------------
// Deterministic randomness. std's engines are portable but its distributions
// are not, so all transforms are hand-rolled on top of splitmix64. Every
// consumer derives a named sub-stream from one master seed.
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent, documented sub-seed from a master seed and a role
/// name ("init", "negatives", "shuffle", "ensemble", "eval", ...).
std::uint64_t sub_seed(std::uint64_t master, std::string_view role);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be > 0. Rejection sampled, unbiased.
  std::uint64_t next_below(std::uint64_t n);

  /// Standard normal via Box-Muller; one spare value is cached.
  double next_gaussian();

  /// Uniform double in [lo, hi).
  double next_in(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Small numeric helpers used across modules.
// ---------------------------------------------------------------------------

/// Logistic function, safe against overflow for any finite input.
double sigmoid(double x);

/// log(1 + exp(x)) without overflow; -log(sigmoid(x)) == softplus(-x).
double softplus(double x);

struct NormalizeResult {
  std::vector<double> value;
  bool degenerate = false;  // true when the input norm was below 1e-12
};

/// Returns v / ||v||_2. A vector with norm below 1e-12 is returned unchanged
/// and flagged degenerate rather than failing.
NormalizeResult normalize(std::span<const double> v);

/// In-place variant; returns false (leaving v untouched) when degenerate.
bool normalize_in_place(std::span<double> v);

double dot(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// EmbeddingStore: d-dimensional vectors plus per-coordinate squared-gradient
// accumulators for every unit. Unit ids are interned to dense indices; the
// string <-> index mapping is part of persisted state.
//
// Concurrency: reads may run concurrently; mutation requires an exclusive
// writer. The lossy-race parallel training mode deliberately violates the
// writer rule on vector payloads only (never on the intern tables).
// ---------------------------------------------------------------------------

class EmbeddingStore {
 public:
  explicit EmbeddingStore(int dimension);

  int dimension() const { return dim_; }
  std::uint32_t unit_count() const { return static_cast<std::uint32_t>(units_.size()); }
  std::uint64_t step_count() const { return step_count_; }
  void set_step_count(std::uint64_t n) { step_count_ = n; }

  /// Interns a unit, zero-initializing its vector and accumulator if new.
  /// The unit stays uninitialized: it scores as degenerate (zero similarity)
  /// until training first sees it.
  std::uint32_t intern(UnitKind kind, std::string_view id);

  /// Interns a unit; an uninitialized unit's coordinates are drawn uniform
  /// in [-0.5/d, +0.5/d] from `init_rng` (accumulator stays zero).
  std::uint32_t ensure_unit(UnitKind kind, std::string_view id, Rng& init_rng);

  bool is_initialized(std::uint32_t index) const { return initialized_[index] != 0; }
  void mark_initialized(std::uint32_t index) { initialized_[index] = 1; }

  std::optional<std::uint32_t> find(UnitKind kind, std::string_view id) const;
  bool contains(UnitKind kind, std::string_view id) const { return find(kind, id).has_value(); }

  const UnitId& unit(std::uint32_t index) const { return units_[index]; }

  std::span<double> vec(std::uint32_t index) {
    return {vectors_.data() + std::size_t(index) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> vec(std::uint32_t index) const {
    return {vectors_.data() + std::size_t(index) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> accum(std::uint32_t index) {
    return {accum_.data() + std::size_t(index) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> accum(std::uint32_t index) const {
    return {accum_.data() + std::size_t(index) * dim_, static_cast<std::size_t>(dim_)};
  }

  /// Dense indices of every unit of one kind, in intern order.
  std::vector<std::uint32_t> units_of_kind(UnitKind kind) const;

 private:
  int dim_;
  std::vector<UnitId> units_;
  std::vector<double> vectors_;
  std::vector<double> accum_;
  std::vector<std::uint8_t> initialized_;
  std::unordered_map<std::string, std::uint32_t> product_index_;
  std::unordered_map<std::string, std::uint32_t> user_index_;
  std::uint64_t step_count_ = 0;
};

}  // namespace omba
