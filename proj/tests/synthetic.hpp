#pragma once

// Deterministic synthetic transaction streams for tests: planted product
// pairs over per-user preference pools, optional mid-stream pair swaps, and
// optional rare expensive pairs. Background items are drawn independently of
// the planted structure.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "omba/core.hpp"

namespace omba::testing {

using ProductPair = std::pair<std::string, std::string>;

struct StreamSpec {
  int products = 1000;  // total catalog; reserved blocks carved from the front
  int users = 200;
  int baskets = 20000;
  int windows = 30;

  int planted_pairs = 50;
  /// Scheduled deterministically: basket i carries an active pair iff
  /// i % planted_modulo < planted_hits (defaults give exactly 60%).
  int planted_modulo = 5;
  int planted_hits = 3;

  /// Per-user preference pool for background draws; 0 disables pools
  /// (background then draws uniformly from the background block).
  int pool_size = 12;
  double pool_affinity = 0.8;  // probability a background item comes from the pool
  int bg_min = 1;
  int bg_max = 3;
  /// Background items inside pair-carrying baskets; -1 mirrors bg_min/bg_max.
  int planted_bg_min = -1;
  int planted_bg_max = -1;

  /// Window at which half the planted pairs retire; their member products
  /// are rewired into as many new pairs with different partners (products
  /// persist, associations change). -1 disables.
  int swap_window = -1;
  /// Post-swap schedule slots per fresh pair (retained pairs keep one):
  /// fresh associations sell harder while they are new.
  int swap_boost = 1;
  /// Post-swap schedule slots per decoy rewiring of retired products.
  int decoy_boost = 3;

  /// Rare expensive pairs: scheduled on baskets with i % rare_every ==
  /// rare_offset; their members appear nowhere else. Their baskets carry
  /// several cheap fillers, so only price weighting makes the partner stand
  /// out of the context.
  int rare_pairs = 0;
  int rare_every = 55;
  int rare_offset = 7;
  double rare_price_min = 9.0;
  double rare_price_max = 10.0;
  int rare_bg_min = 4;
  int rare_bg_max = 6;

  std::uint64_t seed = 1;
};

struct SyntheticStream {
  std::vector<Basket> baskets;            // timestamp-sorted, one window per day
  std::vector<ProductPair> planted;       // the initial planted pairs
  std::vector<ProductPair> swapped_in;    // pairs active from swap_window on
  std::vector<ProductPair> retired;       // pairs inactive from swap_window on
  std::vector<ProductPair> rare;          // expensive rare pairs
};

SyntheticStream make_stream(const StreamSpec& spec);

/// Users rebuy only from private disjoint pools of `pool_size` products.
std::vector<Basket> pools_rebuy_corpus(int users, int baskets_per_user, int pool_size,
                                       std::uint64_t seed);

/// Exchangeable users: every basket draws uniformly from one shared catalog.
std::vector<Basket> exchangeable_corpus(int users, int baskets_per_user, int catalog,
                                        std::uint64_t seed);

}  // namespace omba::testing
