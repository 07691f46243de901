#include "synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

namespace omba::testing {

namespace {

std::string product_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%04d", i);
  return buf;
}

std::string user_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%04d", i);
  return buf;
}

}  // namespace

SyntheticStream make_stream(const StreamSpec& spec) {
  SyntheticStream stream;
  Rng rng(sub_seed(spec.seed, "stream"));

  const int swap_pairs = spec.swap_window >= 0 ? spec.planted_pairs / 2 : 0;
  const int planted_block = 2 * spec.planted_pairs;
  const int fresh_block = 2 * swap_pairs;  // products unseen before the swap
  const int rare_block = 2 * spec.rare_pairs;
  const int bg_start = planted_block + fresh_block + rare_block;
  if (bg_start + 10 > spec.products)
    throw std::invalid_argument("StreamSpec: catalog too small for the reserved blocks");
  const int bg_count = spec.products - bg_start;

  for (int i = 0; i < spec.planted_pairs; ++i)
    stream.planted.emplace_back(product_name(2 * i), product_name(2 * i + 1));
  // The swap retires the first half of the pairs. The new pairs sell fresh
  // products; the retired products do not vanish - they re-associate among
  // themselves (decoy pairs below), so their old pairings actively dissolve.
  for (int i = 0; i < swap_pairs; ++i) {
    stream.retired.push_back(stream.planted[i]);
    stream.swapped_in.emplace_back(product_name(planted_block + 2 * i),
                                   product_name(planted_block + 2 * i + 1));
  }
  for (int i = 0; i < spec.rare_pairs; ++i)
    stream.rare.emplace_back(product_name(planted_block + fresh_block + 2 * i),
                             product_name(planted_block + fresh_block + 2 * i + 1));

  // Decoy rewiring: retired pair j's first member re-associates with pair
  // j+1's second member, a shifted chain in which every retired product
  // keeps selling with exactly one different partner. Both members of every
  // retired pair are pulled toward distinct new directions, so the old
  // pairings dissolve instead of freezing in place.
  std::vector<std::pair<int, int>> decoys;
  for (int i = 0; i < swap_pairs; ++i)
    decoys.emplace_back(2 * i, 2 * ((i + 1) % swap_pairs) + 1);

  // Per-product prices, fixed for the whole stream. Rare-block members are
  // expensive; everything else is cheap.
  std::vector<double> prices(static_cast<std::size_t>(spec.products));
  for (int i = 0; i < spec.products; ++i) {
    const bool rare = i >= planted_block && i < bg_start;
    prices[static_cast<std::size_t>(i)] =
        rare ? rng.next_in(spec.rare_price_min, spec.rare_price_max) : rng.next_in(0.5, 4.0);
  }

  // Per-user preference pools over the background block.
  std::vector<std::vector<int>> pools(static_cast<std::size_t>(spec.users));
  if (spec.pool_size > 0) {
    for (auto& pool : pools) {
      std::unordered_set<int> chosen;
      while (static_cast<int>(chosen.size()) < spec.pool_size)
        chosen.insert(bg_start + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(bg_count))));
      pool.assign(chosen.begin(), chosen.end());
      std::sort(pool.begin(), pool.end());
    }
  }

  const int per_window = (spec.baskets + spec.windows - 1) / spec.windows;
  int planted_counter = 0;
  int rare_counter = 0;

  for (int i = 0; i < spec.baskets; ++i) {
    const int window = i / per_window;
    Basket basket;
    basket.timestamp = static_cast<std::int64_t>(window) * 86400 + (i % per_window);
    const int user = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(spec.users)));
    basket.user = user_name(user);

    std::unordered_set<int> members;
    auto add_product = [&](int p) {
      if (members.insert(p).second)
        basket.items.push_back(BasketItem{product_name(p), prices[static_cast<std::size_t>(p)]});
    };

    const bool rare_basket =
        spec.rare_pairs > 0 && (i % spec.rare_every) == spec.rare_offset;
    const bool planted_basket = !rare_basket && (i % spec.planted_modulo) < spec.planted_hits;

    if (rare_basket) {
      const int pair = rare_counter++ % spec.rare_pairs;
      add_product(planted_block + 2 * pair);
      add_product(planted_block + 2 * pair + 1);
    } else if (planted_basket) {
      const bool post_swap = spec.swap_window >= 0 && window >= spec.swap_window;
      if (!post_swap) {
        const int pair = planted_counter++ % spec.planted_pairs;
        add_product(2 * pair);
        add_product(2 * pair + 1);
      } else {
        // active set: retained old pairs (one slot each) + fresh pairs
        // (swap_boost slots each) + decoy rewirings (one slot each)
        const int retained = spec.planted_pairs - swap_pairs;
        const int fresh_slots = swap_pairs * spec.swap_boost;
        const int decoy_slots = static_cast<int>(decoys.size()) * spec.decoy_boost;
        const int cycle = retained + fresh_slots + decoy_slots;
        const int slot = planted_counter++ % cycle;
        if (slot < retained) {
          const int pair = swap_pairs + slot;
          add_product(2 * pair);
          add_product(2 * pair + 1);
        } else if (slot < retained + fresh_slots) {
          const int pair = (slot - retained) % swap_pairs;
          add_product(planted_block + 2 * pair);
          add_product(planted_block + 2 * pair + 1);
        } else {
          const auto& decoy =
              decoys[static_cast<std::size_t>(slot - retained - fresh_slots) % decoys.size()];
          add_product(decoy.first);
          add_product(decoy.second);
        }
      }
    }

    int lo = spec.bg_min, hi = spec.bg_max;
    if (rare_basket) {
      lo = spec.rare_bg_min;
      hi = spec.rare_bg_max;
    } else if (planted_basket && spec.planted_bg_min >= 0) {
      lo = spec.planted_bg_min;
      hi = std::max(spec.planted_bg_min, spec.planted_bg_max);
    }
    const int bg_items =
        lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    for (int b = 0; b < bg_items; ++b) {
      int p;
      if (spec.pool_size > 0 && rng.next_double() < spec.pool_affinity) {
        const auto& pool = pools[static_cast<std::size_t>(user)];
        p = pool[rng.next_below(pool.size())];
      } else {
        p = bg_start + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(bg_count)));
      }
      add_product(p);
    }

    stream.baskets.push_back(std::move(basket));
  }
  return stream;
}

std::vector<Basket> pools_rebuy_corpus(int users, int baskets_per_user, int pool_size,
                                       std::uint64_t seed) {
  Rng rng(sub_seed(seed, "rebuy"));
  std::vector<Basket> baskets;
  std::int64_t t = 0;
  for (int u = 0; u < users; ++u) {
    for (int b = 0; b < baskets_per_user; ++b) {
      Basket basket;
      basket.timestamp = t++;
      basket.user = user_name(u);
      const int size = 4 + static_cast<int>(rng.next_below(3));  // 4..6 of the pool
      std::unordered_set<int> chosen;
      while (static_cast<int>(chosen.size()) < size)
        chosen.insert(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pool_size))));
      std::vector<int> sorted(chosen.begin(), chosen.end());
      std::sort(sorted.begin(), sorted.end());
      for (int c : sorted)
        basket.items.push_back(BasketItem{product_name(u * pool_size + c), 1.0});
      baskets.push_back(std::move(basket));
    }
  }
  std::sort(baskets.begin(), baskets.end(),
            [](const Basket& a, const Basket& b) { return a.timestamp < b.timestamp; });
  return baskets;
}

std::vector<Basket> exchangeable_corpus(int users, int baskets_per_user, int catalog,
                                        std::uint64_t seed) {
  Rng rng(sub_seed(seed, "null"));
  std::vector<Basket> baskets;
  std::int64_t t = 0;
  for (int u = 0; u < users; ++u) {
    for (int b = 0; b < baskets_per_user; ++b) {
      Basket basket;
      basket.timestamp = t++;
      basket.user = user_name(u);
      const int size = 4 + static_cast<int>(rng.next_below(3));
      std::unordered_set<int> chosen;
      while (static_cast<int>(chosen.size()) < size)
        chosen.insert(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(catalog))));
      std::vector<int> sorted(chosen.begin(), chosen.end());
      std::sort(sorted.begin(), sorted.end());
      for (int c : sorted) basket.items.push_back(BasketItem{product_name(c), 1.0});
      baskets.push_back(std::move(basket));
    }
  }
  return baskets;
}

}  // namespace omba::testing
