#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "omba/core.hpp"
#include "omba/ome.hpp"
#include "omba/stats.hpp"

namespace omba::arm {

// ---------------------------------------------------------------------------
// Association rule mining by sign-random-projection LSH over normalized
// product embeddings. Products whose signatures agree within a table share a
// bucket; pairs are ranked by how many of the |H| tables they collide in.
// ---------------------------------------------------------------------------

/// |H| tables of |F| signed-projection functions each. Projection vectors are
/// i.i.d. standard normal; the same seed always regenerates the same vectors.
class HashEnsemble {
 public:
  HashEnsemble(int num_functions, int num_tables, int dimension, std::uint64_t seed);

  int num_functions() const { return num_functions_; }
  int num_tables() const { return num_tables_; }
  int dimension() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  /// The table's |F| sign bits packed into one word; bit i is set when
  /// f_i . v >= 0 (an exact zero dot maps to 1).
  std::uint32_t signature(std::span<const double> v, int table) const;

  /// Projection vector f_i of one table.
  std::span<const double> projection(int table, int function) const;

 private:
  int num_functions_;
  int num_tables_;
  int dim_;
  std::uint64_t seed_;
  std::vector<double> projections_;  // [table][function][dim] flattened
};

/// Probability that two embeddings at the given cosine collide in at least
/// one of |H| tables of |F| sign projections:
/// 1 - (1 - (1 - arccos(c)/pi)^|F|)^|H|. The cosine is clamped to [-1, 1].
double collision_probability(double cosine, int num_functions, int num_tables);

/// Likelihood of a strong association implied by the lift model of the
/// negative-sampling objective: sigmoid(A * dot). A compensates for the dot
/// being taken between unnormalized trained embeddings.
double lift_likelihood(double dot_product, double scale = 4.3);

/// Max absolute deviation between the two association likelihoods over a
/// cosine grid on [-1, 1]. Used to check that (|F|, |H|, A) = (4, 11, 4.3)
/// is a near-optimal matching triple.
double calibration_gap(int num_functions, int num_tables, double scale,
                       double grid_step = 0.001);

struct AssociationRule {
  std::string product_a;  // lexicographically smaller id
  std::string product_b;
  int collision_count = 0;          // in [0, |H|]
  double cosine = 0.0;              // of the normalized embeddings
  std::optional<double> lift;       // absent when undefined, not 0
};

struct MineOptions {
  int top_k = 100;
  /// Products seen fewer than this many times are excluded (0 = keep all;
  /// rare products are usually the interesting ones).
  std::int64_t min_appearances = 0;
  bool parallel = true;  // tables are independent; the merge is exact either way
};

struct MineDiagnostics {
  std::size_t products_considered = 0;
  std::size_t degenerate_excluded = 0;   // zero embeddings
  std::size_t giant_buckets_skipped = 0; // buckets over the 2*sqrt(N) guard
  std::size_t colliding_pairs = 0;
};

struct BucketGroup {
  int table = 0;
  std::uint32_t signature = 0;
  std::vector<std::string> products;
};

struct MineResult {
  std::vector<AssociationRule> rules;
  MineDiagnostics diagnostics;
  std::vector<BucketGroup> buckets;  // only when MineOptions requests a dump
};

/// Buckets every product by per-table signature, counts pairwise collisions
/// across tables, and returns the top_k pairs ranked by (collision count
/// desc, cosine desc, pair id asc). Never does an all-pairs scan. When an
/// index is supplied, each rule carries its empirical lift; `appearances`
/// enables the min_appearances filter.
MineResult mine_rules(const EmbeddingStore& store, const HashEnsemble& ensemble,
                      const MineOptions& options = {},
                      const stats::CooccurrenceIndex* index = nullptr,
                      const ome::NoiseDistribution* appearances = nullptr,
                      bool dump_buckets = false);

/// One JSON object per line: product_a, product_b, collision_count, cosine,
/// lift (null when undefined), in rank order.
void write_rules_jsonl(std::ostream& out, std::span<const AssociationRule> rules);

}  // namespace omba::arm
