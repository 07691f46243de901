#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omba/core.hpp"

namespace omba::ome {

// ---------------------------------------------------------------------------
// Online multi-modal embedding trainer: a recovery objective over basket
// units, approximated by negative sampling, with price-based context
// weighting, an intra-agreement adaptive learning rate, and AdaGrad-scaled
// per-coordinate updates.
// ---------------------------------------------------------------------------

/// One recovery task: predict `target` from the rest of its basket.
/// context_products carries precomputed context weights; `user` is present
/// exactly when the target is a product.
struct TrainTask {
  std::uint32_t target = 0;
  UnitKind target_kind = UnitKind::Product;
  std::vector<std::pair<std::uint32_t, double>> context_products;  // (unit, weight)
  std::optional<std::uint32_t> user;
};

/// Per-kind empirical unigram frequency over all units seen so far.
/// Sampling is a binary search over cumulative counts, O(log n).
class NoiseDistribution {
 public:
  void add(UnitKind kind, std::uint32_t unit, std::int64_t count = 1);

  /// Draws one unit proportional to its accumulated count.
  std::uint32_t sample(UnitKind kind, Rng& rng) const;

  /// Draws from the distribution conditioned on not being `exclude`.
  /// Returns `exclude` itself only when it carries the table's entire mass.
  std::uint32_t sample_excluding(UnitKind kind, std::uint32_t exclude, Rng& rng) const;

  /// Rebuilds the cumulative tables now. Concurrent sampling after a batch
  /// of adds must be preceded by this.
  void prepare() const;
  /// Draws uniformly over the distinct units of the kind (ablation mode).
  std::uint32_t sample_uniform(UnitKind kind, Rng& rng) const;

  std::int64_t total(UnitKind kind) const;
  std::size_t distinct(UnitKind kind) const;
  std::int64_t count_of(UnitKind kind, std::uint32_t unit) const;
  std::span<const std::uint32_t> units(UnitKind kind) const;

 private:
  struct Table {
    std::vector<std::uint32_t> units;        // first-seen order
    std::vector<std::int64_t> counts;        // per unit
    mutable std::vector<std::int64_t> cumulative;
    mutable bool dirty = false;
    std::int64_t total = 0;
    std::unordered_map<std::uint32_t, std::size_t> position;
    void rebuild() const;
  };
  const Table& table(UnitKind kind) const {
    return kind == UnitKind::Product ? products_ : users_;
  }
  Table& table(UnitKind kind) {
    return kind == UnitKind::Product ? products_ : users_;
  }
  Table products_, users_;
};

/// Price-derived context weight: the reciprocal of the fitted power-law
/// appearance probability 1.3 * price^-2.3, with the price capped at `clip`
/// and floored at 0.01 so free items get a minimal weight, not an infinite
/// one.
double value_weight(double price, double clip = 10.0);

/// Weight used for a basket item: missing prices weigh neutrally (1.0), and
/// the whole scheme can be disabled for ablation.
double item_weight(const std::optional<double>& price, double clip, bool value_weighting);

/// Weighted context average followed by the target-kind combination rule:
/// product targets mix the user vector with the weighted product average,
/// user targets take the product average alone, and a product target with no
/// sibling products falls back to the user vector.
std::vector<double> context_vector(const TrainTask& task, const EmbeddingStore& store);

/// Draws `count` negatives of the task's kind, resampling draws equal to
/// `exclude` (up to 100 attempts each, then accepted). Throws when the noise
/// table for the kind is empty.
std::vector<std::uint32_t> sample_negatives(UnitKind kind, int count, std::uint32_t exclude,
                                            const NoiseDistribution& noise, Rng& rng,
                                            bool uniform = false);

struct TaskGradients {
  double loss = 0.0;
  /// Accumulated dL/dv per touched unit. A unit appears once even when it
  /// plays several roles (e.g. a repeated negative).
  std::vector<std::pair<std::uint32_t, std::vector<double>>> grads;
};

/// Negative-sampling reconstruction loss and its exact gradients through the
/// weighted context average. Context weights are constants, not trained.
/// Dot products are clamped to [-30, 30] before the log terms.
TaskGradients task_loss_and_grads(const TrainTask& task,
                                  std::span<const std::uint32_t> negatives,
                                  const EmbeddingStore& store);

/// Mean sigmoid of pairwise dots over the basket's units (raw embeddings).
/// Fewer than two units yields the neutral 0.5.
double intra_agreement(std::span<const std::uint32_t> units, const EmbeddingStore& store);

/// exp(-tau * psi) * eta.
double adaptive_lr(double psi, double tau, double eta);

/// AdaGrad step: the squared gradient is accumulated first, then the
/// coordinate is moved by lr / sqrt(accum + eps) * gradient. Non-finite
/// gradients are skipped (returns false) rather than applied.
bool apply_update(std::uint32_t unit, std::span<const double> gradient, double lr,
                  EmbeddingStore& store, double eps = 1e-8);

struct TrainReport {
  std::int64_t window_index = 0;
  std::size_t baskets = 0;
  std::size_t tasks = 0;
  double mean_loss = 0.0;
  std::size_t units_initialized = 0;
  std::size_t skipped_updates = 0;  // non-finite gradients dropped
};

struct TrainerOptions {
  Hyperparameters hp;
  bool value_weighting = true;   // power-law price weights vs all-ones
  bool uniform_negatives = false;
  /// Lossy-race parallel mode: baskets within a window are trained
  /// concurrently with unsynchronized updates. Statistical convergence only;
  /// never the default and never used by the acceptance suite.
  bool parallel = false;
};

/// Drives the per-window training loop over an EmbeddingStore and a
/// NoiseDistribution it shares with evaluation. Deterministic mode replays
/// bitwise-identically for a fixed master seed.
class OnlineTrainer {
 public:
  OnlineTrainer(EmbeddingStore& store, NoiseDistribution& noise, TrainerOptions options,
                std::uint64_t master_seed);

  /// Runs options.hp.epochs shuffled passes over the window's baskets.
  /// Unseen units are interned and initialized lazily; the window's counts
  /// enter the noise distribution before any task trains.
  TrainReport train_window(const Window& window);

  EmbeddingStore& store() { return store_; }
  NoiseDistribution& noise() { return noise_; }
  const TrainerOptions& options() const { return options_; }

 private:
  struct DenseBasket {
    std::vector<std::uint32_t> product_units;
    std::vector<double> weights;
    std::uint32_t user_unit = 0;
    std::vector<std::uint32_t> all_units;  // products + user
  };

  DenseBasket densify(const Basket& basket);
  // Returns (tasks, summed loss, skipped updates).
  std::tuple<std::size_t, double, std::size_t> train_basket(const DenseBasket& b, Rng& rng);

  EmbeddingStore& store_;
  NoiseDistribution& noise_;
  TrainerOptions options_;
  Rng init_rng_;
  Rng negative_rng_;
  Rng shuffle_rng_;
  std::uint64_t parallel_seed_;
};

}  // namespace omba::ome
