#include "omba/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace omba::stats {

namespace {

std::string pair_key(const std::string& a, const std::string& b) {
  // \x1f never occurs in ids coming from delimiter-separated sources
  if (a < b) return a + '\x1f' + b;
  return b + '\x1f' + a;
}

}  // namespace

void CooccurrenceIndex::add_basket(const Basket& basket) {
  ++basket_count_;
  const auto& items = basket.items;
  for (const BasketItem& item : items) ++item_counts_[item.product];
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i + 1; j < items.size(); ++j)
      ++pair_counts_[pair_key(items[i].product, items[j].product)];
}

void CooccurrenceIndex::add_window(const Window& window) {
  for (const Basket& b : window.baskets) add_basket(b);
}

std::int64_t CooccurrenceIndex::item_count(const std::string& product) const {
  auto it = item_counts_.find(product);
  return it == item_counts_.end() ? 0 : it->second;
}

std::int64_t CooccurrenceIndex::pair_count(const std::string& a, const std::string& b) const {
  auto it = pair_counts_.find(pair_key(a, b));
  return it == pair_counts_.end() ? 0 : it->second;
}

double CooccurrenceIndex::support(const std::string& x) const {
  if (basket_count_ == 0) throw std::runtime_error("support: empty index");
  return static_cast<double>(item_count(x)) / static_cast<double>(basket_count_);
}

double CooccurrenceIndex::support(const std::string& x, const std::string& y) const {
  if (basket_count_ == 0) throw std::runtime_error("support: empty index");
  return static_cast<double>(pair_count(x, y)) / static_cast<double>(basket_count_);
}

double CooccurrenceIndex::support(std::span<const std::string> itemset) const {
  if (itemset.size() == 1) return support(itemset[0]);
  if (itemset.size() == 2) return support(itemset[0], itemset[1]);
  throw std::invalid_argument("support: itemset size must be 1 or 2");
}

double CooccurrenceIndex::lift(const std::string& x, const std::string& y) const {
  const double sx = support(x);
  const double sy = support(y);
  if (sx == 0.0 || sy == 0.0)
    throw LiftUndefined("lift(" + x + ", " + y + "): zero marginal support");
  return support(x, y) / (sx * sy);
}

std::optional<double> CooccurrenceIndex::try_lift(const std::string& x,
                                                  const std::string& y) const {
  if (basket_count_ == 0) return std::nullopt;
  const double sx = static_cast<double>(item_count(x)) / basket_count_;
  const double sy = static_cast<double>(item_count(y)) / basket_count_;
  if (sx == 0.0 || sy == 0.0) return std::nullopt;
  return support(x, y) / (sx * sy);
}

void CooccurrenceIndex::dump_pairs_csv(std::ostream& out) const {
  out << "product_a,product_b,pair_count\n";
  std::vector<std::pair<std::string, std::int64_t>> rows(pair_counts_.begin(),
                                                         pair_counts_.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [key, count] : rows) {
    const auto sep = key.find('\x1f');
    out << key.substr(0, sep) << ',' << key.substr(sep + 1) << ',' << count << '\n';
  }
}

CooccurrenceIndex build_index(std::span<const Basket> baskets) {
  CooccurrenceIndex index;
  for (const Basket& b : baskets) index.add_basket(b);
  return index;
}

double baseline_score(const std::string& candidate,
                      std::span<const std::string> context_products,
                      const CooccurrenceIndex& index, BaselineMethod method) {
  switch (method) {
    case BaselineMethod::Pop:
      return static_cast<double>(index.item_count(candidate));
    case BaselineMethod::Sup: {
      if (context_products.empty() || index.basket_count() == 0) return 0.0;
      double sum = 0.0;
      for (const std::string& c : context_products) sum += index.support(candidate, c);
      return sum / static_cast<double>(context_products.size());
    }
    case BaselineMethod::Lift: {
      if (context_products.empty()) return 0.0;
      double sum = 0.0;
      for (const std::string& c : context_products)
        sum += index.try_lift(candidate, c).value_or(0.0);
      return sum / static_cast<double>(context_products.size());
    }
  }
  return 0.0;
}

}  // namespace omba::stats
