#include "omba/arm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace omba::arm {

HashEnsemble::HashEnsemble(int num_functions, int num_tables, int dimension, std::uint64_t seed)
    : num_functions_(num_functions), num_tables_(num_tables), dim_(dimension), seed_(seed) {
  if (num_functions < 1 || num_functions > 32)
    throw std::invalid_argument("HashEnsemble: |F| must be in [1, 32]");
  if (num_tables < 1) throw std::invalid_argument("HashEnsemble: |H| must be >= 1");
  if (dimension < 1) throw std::invalid_argument("HashEnsemble: dimension must be >= 1");
  Rng rng(sub_seed(seed, "ensemble"));
  projections_.resize(static_cast<std::size_t>(num_tables) * num_functions * dimension);
  for (double& x : projections_) x = rng.next_gaussian();
}

std::span<const double> HashEnsemble::projection(int table, int function) const {
  const std::size_t offset =
      (static_cast<std::size_t>(table) * num_functions_ + function) * dim_;
  return {projections_.data() + offset, static_cast<std::size_t>(dim_)};
}

std::uint32_t HashEnsemble::signature(std::span<const double> v, int table) const {
  std::uint32_t bits = 0;
  for (int f = 0; f < num_functions_; ++f) {
    if (dot(projection(table, f), v) >= 0.0) bits |= (1u << f);
  }
  return bits;
}

double collision_probability(double cosine, int num_functions, int num_tables) {
  const double c = std::clamp(cosine, -1.0, 1.0);
  const double per_function = 1.0 - std::acos(c) / M_PI;
  return 1.0 - std::pow(1.0 - std::pow(per_function, num_functions), num_tables);
}

double lift_likelihood(double dot_product, double scale) {
  return sigmoid(scale * dot_product);
}

double calibration_gap(int num_functions, int num_tables, double scale, double grid_step) {
  if (grid_step <= 0) throw std::invalid_argument("calibration_gap: grid_step must be > 0");
  const long steps = std::lround(2.0 / grid_step);
  double gap = 0.0;
  for (long i = 0; i <= steps; ++i) {
    const double c = -1.0 + static_cast<double>(i) * grid_step;
    const double diff =
        std::fabs(collision_probability(c, num_functions, num_tables) - lift_likelihood(c, scale));
    gap = std::max(gap, diff);
  }
  return gap;
}

namespace {

struct PairHash {
  std::size_t operator()(std::uint64_t key) const {
    key ^= key >> 33;
    key *= 0xFF51AFD7ED558CCDULL;
    key ^= key >> 33;
    return static_cast<std::size_t>(key);
  }
};

using PairCounts = std::unordered_map<std::uint64_t, int, PairHash>;

std::uint64_t pack_pair(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

MineResult mine_rules(const EmbeddingStore& store, const HashEnsemble& ensemble,
                      const MineOptions& options, const stats::CooccurrenceIndex* index,
                      const ome::NoiseDistribution* appearances, bool dump_buckets) {
  if (options.top_k < 1) throw std::invalid_argument("mine_rules: top_k must be >= 1");
  if (ensemble.dimension() != store.dimension())
    throw std::invalid_argument("mine_rules: ensemble/store dimension mismatch");

  MineResult result;

  // Normalized snapshot of the product embeddings; the trainer's raw vectors
  // stay untouched. Degenerate (zero) embeddings are excluded up front.
  std::vector<std::uint32_t> products;   // dense store indices
  std::vector<double> normalized;        // parallel to products, d each
  const int d = store.dimension();
  for (std::uint32_t unit : store.units_of_kind(UnitKind::Product)) {
    result.diagnostics.products_considered++;
    if (options.min_appearances > 0 && appearances != nullptr &&
        appearances->count_of(UnitKind::Product, unit) < options.min_appearances)
      continue;
    auto norm = normalize(store.vec(unit));
    if (norm.degenerate) {
      result.diagnostics.degenerate_excluded++;
      continue;
    }
    products.push_back(unit);
    normalized.insert(normalized.end(), norm.value.begin(), norm.value.end());
  }

  const std::size_t n = products.size();
  if (n < 2) return result;

  auto vec_of = [&](std::size_t i) {
    return std::span<const double>(normalized.data() + i * d, static_cast<std::size_t>(d));
  };

  // Guard against pathological bucket concentration (near-duplicate
  // embeddings make pair enumeration quadratic). A bucket only counts as
  // pathological well above the uniform expectation n / 2^|F|; with few hash
  // bits that expectation can exceed 2*sqrt(n) for ordinary data.
  const double uniform_bucket =
      static_cast<double>(n) / std::pow(2.0, ensemble.num_functions());
  const std::size_t giant_bucket_limit = static_cast<std::size_t>(
      std::max(2.0 * std::sqrt(static_cast<double>(n)), 3.0 * uniform_bucket)) + 1;

  const int tables = ensemble.num_tables();
  std::vector<PairCounts> per_table(static_cast<std::size_t>(tables));
  std::vector<std::size_t> giant_skips(static_cast<std::size_t>(tables), 0);
  std::vector<std::vector<BucketGroup>> per_table_buckets(
      dump_buckets ? static_cast<std::size_t>(tables) : 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (options.parallel)
#endif
  for (int t = 0; t < tables; ++t) {
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> buckets;
    for (std::size_t i = 0; i < n; ++i) {
      buckets[ensemble.signature(vec_of(i), t)].push_back(static_cast<std::uint32_t>(i));
    }
    PairCounts& counts = per_table[static_cast<std::size_t>(t)];
    for (const auto& [sig, members] : buckets) {
      if (dump_buckets) {
        BucketGroup group;
        group.table = t;
        group.signature = sig;
        for (std::uint32_t m : members) group.products.push_back(store.unit(products[m]).id);
        std::sort(group.products.begin(), group.products.end());
        per_table_buckets[static_cast<std::size_t>(t)].push_back(std::move(group));
      }
      if (members.size() > giant_bucket_limit) {
        ++giant_skips[static_cast<std::size_t>(t)];
        continue;
      }
      for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
          ++counts[pack_pair(members[i], members[j])];
    }
  }

  // Deterministic merge in table order; addition is commutative so the
  // parallel and serial paths agree exactly.
  PairCounts merged;
  for (int t = 0; t < tables; ++t) {
    for (const auto& [key, count] : per_table[static_cast<std::size_t>(t)]) merged[key] += count;
    result.diagnostics.giant_buckets_skipped += giant_skips[static_cast<std::size_t>(t)];
  }
  result.diagnostics.colliding_pairs = merged.size();

  std::vector<AssociationRule> rules;
  rules.reserve(merged.size());
  for (const auto& [key, count] : merged) {
    const std::uint32_t i = static_cast<std::uint32_t>(key >> 32);
    const std::uint32_t j = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
    AssociationRule rule;
    rule.collision_count = count;
    rule.cosine = dot(vec_of(i), vec_of(j));
    const std::string& id_i = store.unit(products[i]).id;
    const std::string& id_j = store.unit(products[j]).id;
    if (id_i < id_j) {
      rule.product_a = id_i;
      rule.product_b = id_j;
    } else {
      rule.product_a = id_j;
      rule.product_b = id_i;
    }
    if (index != nullptr) rule.lift = index->try_lift(rule.product_a, rule.product_b);
    rules.push_back(std::move(rule));
  }

  std::sort(rules.begin(), rules.end(), [](const AssociationRule& a, const AssociationRule& b) {
    if (a.collision_count != b.collision_count) return a.collision_count > b.collision_count;
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    if (a.product_a != b.product_a) return a.product_a < b.product_a;
    return a.product_b < b.product_b;
  });
  if (rules.size() > static_cast<std::size_t>(options.top_k))
    rules.resize(static_cast<std::size_t>(options.top_k));
  result.rules = std::move(rules);

  if (dump_buckets) {
    for (auto& groups : per_table_buckets)
      for (auto& g : groups) result.buckets.push_back(std::move(g));
  }
  return result;
}

void write_rules_jsonl(std::ostream& out, std::span<const AssociationRule> rules) {
  for (const AssociationRule& rule : rules) {
    nlohmann::json line;
    line["product_a"] = rule.product_a;
    line["product_b"] = rule.product_b;
    line["collision_count"] = rule.collision_count;
    line["cosine"] = rule.cosine;
    if (rule.lift.has_value())
      line["lift"] = *rule.lift;
    else
      line["lift"] = nullptr;
    out << line.dump() << '\n';
  }
}

}  // namespace omba::arm
