#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "omba/core.hpp"

namespace omba::stats {

/// Thrown by lift() when a marginal support is zero. Distinct from a lift of
/// 0.0, which means two individually-present products never co-purchased.
struct LiftUndefined : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact basket/item/pair occurrence counts over a transaction stream.
/// Pair counts are stored sparsely keyed by the ordered (min,max) id pair;
/// dense |P|^2 storage is infeasible for real catalogs.
///
/// Building is additive: feeding windows one at a time yields exactly the
/// same index as one batch pass. Single writer while building; lookups are
/// freely concurrent afterwards.
class CooccurrenceIndex {
 public:
  void add_basket(const Basket& basket);
  void add_window(const Window& window);

  std::size_t basket_count() const { return basket_count_; }
  std::int64_t item_count(const std::string& product) const;
  std::int64_t pair_count(const std::string& a, const std::string& b) const;

  /// support of a single product or an unordered pair; throws on an empty
  /// index or an itemset size outside {1, 2}.
  double support(std::span<const std::string> itemset) const;
  double support(const std::string& x) const;
  double support(const std::string& x, const std::string& y) const;

  /// Joint support over the product of marginals. Symmetric. Throws
  /// LiftUndefined when either marginal support is zero.
  double lift(const std::string& x, const std::string& y) const;

  /// As lift(), but absent instead of throwing.
  std::optional<double> try_lift(const std::string& x, const std::string& y) const;

  /// Debug dump: `product_a,product_b,pair_count` rows, sorted.
  void dump_pairs_csv(std::ostream& out) const;

  const std::unordered_map<std::string, std::int64_t>& item_counts() const {
    return item_counts_;
  }

 private:
  std::size_t basket_count_ = 0;
  std::unordered_map<std::string, std::int64_t> item_counts_;
  std::unordered_map<std::string, std::int64_t> pair_counts_;  // key "a\x1fb", a < b
};

CooccurrenceIndex build_index(std::span<const Basket> baskets);

enum class BaselineMethod { Pop, Sup, Lift };

/// Count-based candidate score given the query context. Pop ignores the
/// context; Sup and Lift average pairwise support/lift over the context
/// products, treating undefined lift terms as 0. Unseen candidates score 0.
double baseline_score(const std::string& candidate,
                      std::span<const std::string> context_products,
                      const CooccurrenceIndex& index, BaselineMethod method);

}  // namespace omba::stats
