#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "omba/core.hpp"
#include "omba/ome.hpp"
#include "omba/stats.hpp"

namespace omba::eval {

// ---------------------------------------------------------------------------
// Intra-basket item retrieval: hold out one product of a test basket, rank it
// against M sampled negatives given the remaining products and the user.
// ---------------------------------------------------------------------------

struct EvalQuery {
  std::string target;
  std::vector<std::string> context_products;  // basket minus target
  std::string user;
  std::vector<std::string> candidates;  // target + M distinct negatives
};

struct EvalReport {
  double mrr = 0.0;
  std::map<int, double> recall_at;
  double dcg = 0.0;
  std::size_t query_count = 0;
};

enum class Scorer { Embedding, Pop, Sup, Lift };

std::string scorer_name(Scorer s);

struct BuildQueriesResult {
  std::vector<EvalQuery> queries;
  std::size_t skipped_small_baskets = 0;  // baskets with < 2 products
};

/// One query per (basket, target product) combination; baskets with fewer
/// than two products are skipped and counted. Negatives are drawn from the
/// noise distribution (or uniformly), are distinct, and never coincide with
/// any product of the basket. Throws when the known catalog cannot supply M
/// negatives outside the basket.
BuildQueriesResult build_queries(std::span<const Basket> baskets, int num_negatives,
                                 const ome::NoiseDistribution& negative_source,
                                 const EmbeddingStore& store, Rng& rng,
                                 bool uniform_negatives = false,
                                 bool single_target_per_basket = false);

/// 1-based rank of the query target. The embedding scorer averages the
/// cosine between the candidate and every context unit (products and user);
/// units absent from the store contribute zero similarity. Count-based
/// scorers delegate to stats::baseline_score. Ties break by product id
/// ascending, so candidate insertion order never matters.
int rank_candidates(const EvalQuery& query, const EmbeddingStore& store, Scorer scorer,
                    const stats::CooccurrenceIndex* baseline_index = nullptr);

/// MRR, Recall@k for each requested k, and DCG averaged over ranks.
EvalReport metrics(std::span<const int> ranks, std::span<const int> ks);

struct ProtocolOptions {
  ome::TrainerOptions trainer;
  int num_negatives = 10;                    // M
  std::vector<int> ks = {1, 2, 3, 4, 5};     // M+1 is always added
  std::vector<Scorer> scorers = {Scorer::Embedding, Scorer::Pop, Scorer::Sup, Scorer::Lift};
  bool single_target_per_basket = false;
  bool uniform_eval_negatives = false;
  bool parallel_ranking = true;  // queries are independent; result is exact
  bool keep_per_query_ranks = false;
};

struct ProtocolResult {
  std::map<Scorer, EvalReport> reports;
  std::size_t skipped_small_baskets = 0;
  /// (window, query index within window, scorer, rank), when requested.
  std::vector<std::tuple<std::int64_t, std::size_t, Scorer, int>> per_query_ranks;
};

/// Streams the windows in order. Before a query window is evaluated, the
/// trainer and the baseline index have consumed exactly the preceding
/// windows; the query window's baskets are evaluated against that frozen
/// state and only afterwards join the training stream. Reports aggregate all
/// query windows. Negative pools at a query window include the window's own
/// products (the window has arrived; it just has not been trained on).
ProtocolResult run_protocol(std::span<const Window> windows,
                            std::span<const std::int64_t> query_windows,
                            const ProtocolOptions& options, std::uint64_t master_seed);

// ---------------------------------------------------------------------------
// User-repetition analysis: do users rebuy the same products? Baskets are
// TFIDF vectors (baskets as documents, products as words); same-user basket
// pair similarities are compared against different-user pairs with a
// one-tailed Welch t-test of H0: mean_same <= mean_diff.
// ---------------------------------------------------------------------------

struct RepetitionTestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  double mean_same = 0.0;
  double mean_diff = 0.0;
  std::size_t pairs = 0;  // per side
};

/// Requires at least two users with two or more baskets each.
RepetitionTestResult user_repetition_test(std::span<const Basket> baskets, int sample_pairs,
                                          Rng& rng);

/// Upper-tail p-value of Student's t with (possibly fractional) df.
double t_upper_tail(double t, double df);

}  // namespace omba::eval
