#include "omba/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace omba::eval {

std::string scorer_name(Scorer s) {
  switch (s) {
    case Scorer::Embedding: return "Embedding";
    case Scorer::Pop: return "Pop";
    case Scorer::Sup: return "Sup";
    case Scorer::Lift: return "Lift";
  }
  return "?";
}

BuildQueriesResult build_queries(std::span<const Basket> baskets, int num_negatives,
                                 const ome::NoiseDistribution& negative_source,
                                 const EmbeddingStore& store, Rng& rng,
                                 bool uniform_negatives, bool single_target_per_basket) {
  if (num_negatives < 1) throw std::invalid_argument("build_queries: M must be >= 1");
  BuildQueriesResult out;

  for (const Basket& basket : baskets) {
    if (basket.items.size() < 2) {
      ++out.skipped_small_baskets;
      continue;
    }
    std::unordered_set<std::string> basket_products;
    for (const BasketItem& item : basket.items) basket_products.insert(item.product);

    // The pool must be able to supply M negatives outside this basket.
    std::size_t outside = 0;
    for (std::uint32_t unit : negative_source.units(UnitKind::Product)) {
      if (!basket_products.contains(store.unit(unit).id)) ++outside;
    }
    if (outside < static_cast<std::size_t>(num_negatives))
      throw std::runtime_error(
          "build_queries: candidate catalog too small for M=" + std::to_string(num_negatives) +
          " negatives outside a basket of " + std::to_string(basket.items.size()) + " products");

    std::size_t target_index = 0;
    if (single_target_per_basket) target_index = rng.next_below(basket.items.size());

    for (std::size_t t = 0; t < basket.items.size(); ++t) {
      if (single_target_per_basket && t != target_index) continue;
      EvalQuery q;
      q.target = basket.items[t].product;
      q.user = basket.user;
      for (std::size_t j = 0; j < basket.items.size(); ++j)
        if (j != t) q.context_products.push_back(basket.items[j].product);

      q.candidates.push_back(q.target);
      std::unordered_set<std::string> chosen;
      while (chosen.size() < static_cast<std::size_t>(num_negatives)) {
        const std::uint32_t unit = uniform_negatives
                                       ? negative_source.sample_uniform(UnitKind::Product, rng)
                                       : negative_source.sample(UnitKind::Product, rng);
        const std::string& id = store.unit(unit).id;
        if (basket_products.contains(id)) continue;
        if (chosen.insert(id).second) q.candidates.push_back(id);
      }
      out.queries.push_back(std::move(q));
    }
  }
  return out;
}

namespace {

double embedding_score(const EvalQuery& query, const std::string& candidate,
                       const EmbeddingStore& store) {
  const auto cand = store.find(UnitKind::Product, candidate);
  if (!cand.has_value()) return 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const std::string& c : query.context_products) {
    const auto unit = store.find(UnitKind::Product, c);
    sum += unit.has_value() ? cosine(store.vec(*cand), store.vec(*unit)) : 0.0;
    ++count;
  }
  const auto user = store.find(UnitKind::User, query.user);
  sum += user.has_value() ? cosine(store.vec(*cand), store.vec(*user)) : 0.0;
  ++count;
  return sum / static_cast<double>(count);
}

}  // namespace

int rank_candidates(const EvalQuery& query, const EmbeddingStore& store, Scorer scorer,
                    const stats::CooccurrenceIndex* baseline_index) {
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(query.candidates.size());
  for (const std::string& candidate : query.candidates) {
    double score = 0.0;
    switch (scorer) {
      case Scorer::Embedding:
        score = embedding_score(query, candidate, store);
        break;
      case Scorer::Pop:
      case Scorer::Sup:
      case Scorer::Lift: {
        if (baseline_index == nullptr)
          throw std::invalid_argument("rank_candidates: count-based scorer needs an index");
        const auto method = scorer == Scorer::Pop   ? stats::BaselineMethod::Pop
                            : scorer == Scorer::Sup ? stats::BaselineMethod::Sup
                                                    : stats::BaselineMethod::Lift;
        score = stats::baseline_score(candidate, query.context_products, *baseline_index, method);
        break;
      }
    }
    scored.emplace_back(score, &candidate);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  for (std::size_t i = 0; i < scored.size(); ++i)
    if (*scored[i].second == query.target) return static_cast<int>(i) + 1;
  throw std::logic_error("rank_candidates: target not among candidates");
}

EvalReport metrics(std::span<const int> ranks, std::span<const int> ks) {
  if (ranks.empty()) throw std::invalid_argument("metrics: rank list is empty");
  EvalReport report;
  report.query_count = ranks.size();

  // Aggregate through a rank histogram so the averages are exactly
  // permutation-invariant, not just up to floating-point reordering.
  std::map<int, std::size_t> histogram;
  for (int r : ranks) {
    if (r < 1) throw std::invalid_argument("metrics: ranks are 1-based");
    ++histogram[r];
  }
  double mrr = 0.0, dcg = 0.0;
  for (const auto& [r, count] : histogram) {
    mrr += static_cast<double>(count) / r;
    dcg += static_cast<double>(count) / std::log2(static_cast<double>(r) + 1.0);
  }
  report.mrr = mrr / static_cast<double>(ranks.size());
  report.dcg = dcg / static_cast<double>(ranks.size());
  for (int k : ks) {
    std::size_t hits = 0;
    for (const auto& [r, count] : histogram)
      if (r <= k) hits += count;
    report.recall_at[k] = static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return report;
}

ProtocolResult run_protocol(std::span<const Window> windows,
                            std::span<const std::int64_t> query_windows,
                            const ProtocolOptions& options, std::uint64_t master_seed) {
  for (std::size_t i = 1; i < query_windows.size(); ++i)
    if (query_windows[i] <= query_windows[i - 1])
      throw std::invalid_argument("run_protocol: query windows must be strictly ascending");
  for (std::int64_t q : query_windows)
    if (q < 0 || q >= static_cast<std::int64_t>(windows.size()))
      throw std::out_of_range("run_protocol: query window index " + std::to_string(q) +
                              " out of range");

  EmbeddingStore store(options.trainer.hp.dimension);
  ome::NoiseDistribution noise;
  ome::OnlineTrainer trainer(store, noise, options.trainer, master_seed);
  stats::CooccurrenceIndex index;
  Rng eval_rng(sub_seed(master_seed, "eval"));

  std::unordered_set<std::int64_t> query_set(query_windows.begin(), query_windows.end());
  std::map<Scorer, std::vector<int>> all_ranks;
  ProtocolResult result;

  for (const Window& window : windows) {
    if (query_set.contains(window.index)) {
      // Negative pools may draw on the query window's own products: the
      // window has arrived, it just has not been trained on. Tracked
      // separately so the training noise stays untouched.
      ome::NoiseDistribution query_noise = noise;
      for (const Basket& b : window.baskets) {
        for (const BasketItem& item : b.items)
          query_noise.add(UnitKind::Product, store.intern(UnitKind::Product, item.product));
        query_noise.add(UnitKind::User, store.intern(UnitKind::User, b.user));
      }
      query_noise.prepare();

      auto built = build_queries(window.baskets, options.num_negatives, query_noise, store,
                                 eval_rng, options.uniform_eval_negatives,
                                 options.single_target_per_basket);
      result.skipped_small_baskets += built.skipped_small_baskets;

      for (Scorer scorer : options.scorers) {
        std::vector<int> ranks(built.queries.size(), 0);
        const bool needs_index = scorer != Scorer::Embedding;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 32) if (options.parallel_ranking)
#endif
        for (std::size_t qi = 0; qi < built.queries.size(); ++qi) {
          ranks[qi] = rank_candidates(built.queries[qi], store, scorer,
                                      needs_index ? &index : nullptr);
        }
        auto& sink = all_ranks[scorer];
        sink.insert(sink.end(), ranks.begin(), ranks.end());
        if (options.keep_per_query_ranks) {
          for (std::size_t qi = 0; qi < ranks.size(); ++qi)
            result.per_query_ranks.emplace_back(window.index, qi, scorer, ranks[qi]);
        }
      }
    }
    // Query windows join the training stream only after being evaluated.
    trainer.train_window(window);
    index.add_window(window);
  }

  std::vector<int> ks = options.ks;
  if (std::find(ks.begin(), ks.end(), options.num_negatives + 1) == ks.end())
    ks.push_back(options.num_negatives + 1);
  std::sort(ks.begin(), ks.end());

  for (Scorer scorer : options.scorers) {
    const auto& ranks = all_ranks[scorer];
    if (!ranks.empty()) result.reports[scorer] = metrics(ranks, ks);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Welch t-test machinery
// ---------------------------------------------------------------------------

namespace {

// Regularized incomplete beta via Lentz's continued fraction.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double t_upper_tail(double t, double df) {
  if (!std::isfinite(t)) return t > 0 ? 0.0 : 1.0;
  if (df <= 0) throw std::invalid_argument("t_upper_tail: df must be positive");
  const double x = df / (df + t * t);
  const double half_tail = 0.5 * reg_inc_beta(df / 2.0, 0.5, x);
  return t >= 0 ? half_tail : 1.0 - half_tail;
}

RepetitionTestResult user_repetition_test(std::span<const Basket> baskets, int sample_pairs,
                                          Rng& rng) {
  if (sample_pairs < 2) throw std::invalid_argument("user_repetition_test: need k >= 2");

  // TFIDF vectors: baskets are documents, products are words. Items are sets
  // so tf is 1; idf = ln(#baskets / #baskets containing the product).
  const std::size_t n = baskets.size();
  std::unordered_map<std::string, std::int64_t> doc_freq;
  for (const Basket& b : baskets)
    for (const BasketItem& item : b.items) ++doc_freq[item.product];

  std::vector<std::unordered_map<std::string, double>> tfidf(n);
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const BasketItem& item : baskets[i].items) {
      const double idf =
          std::log(static_cast<double>(n) / static_cast<double>(doc_freq[item.product]));
      tfidf[i][item.product] = idf;
      norms[i] += idf * idf;
    }
    norms[i] = std::sqrt(norms[i]);
  }

  auto basket_cosine = [&](std::size_t i, std::size_t j) {
    if (norms[i] < 1e-24 || norms[j] < 1e-24) return 0.0;
    const auto& small = tfidf[i].size() <= tfidf[j].size() ? tfidf[i] : tfidf[j];
    const auto& large = tfidf[i].size() <= tfidf[j].size() ? tfidf[j] : tfidf[i];
    double s = 0.0;
    for (const auto& [product, w] : small) {
      auto it = large.find(product);
      if (it != large.end()) s += w * it->second;
    }
    return s / (norms[i] * norms[j]);
  };

  std::unordered_map<std::string, std::vector<std::size_t>> by_user;
  for (std::size_t i = 0; i < n; ++i) by_user[baskets[i].user].push_back(i);
  std::vector<const std::vector<std::size_t>*> multi;  // users with >= 2 baskets
  std::vector<std::string> multi_names;
  for (auto& [user, indices] : by_user) {
    if (indices.size() >= 2) {
      multi.push_back(&indices);
      multi_names.push_back(user);
    }
  }
  if (multi.size() < 2)
    throw std::runtime_error("user_repetition_test: need >= 2 users with >= 2 baskets each");
  if (by_user.size() < 2)
    throw std::runtime_error("user_repetition_test: need >= 2 distinct users");

  std::vector<double> same, diff;
  same.reserve(static_cast<std::size_t>(sample_pairs));
  diff.reserve(static_cast<std::size_t>(sample_pairs));

  for (int k = 0; k < sample_pairs; ++k) {
    const auto& indices = *multi[rng.next_below(multi.size())];
    const std::size_t a = rng.next_below(indices.size());
    std::size_t b = rng.next_below(indices.size() - 1);
    if (b >= a) ++b;
    same.push_back(basket_cosine(indices[a], indices[b]));
  }
  for (int k = 0; k < sample_pairs; ++k) {
    for (;;) {
      const std::size_t i = rng.next_below(n);
      const std::size_t j = rng.next_below(n);
      if (baskets[i].user != baskets[j].user) {
        diff.push_back(basket_cosine(i, j));
        break;
      }
    }
  }

  auto mean_var = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return std::pair{mean, var};
  };

  const auto [m1, v1] = mean_var(same);
  const auto [m2, v2] = mean_var(diff);
  const double n1 = static_cast<double>(same.size()), n2 = static_cast<double>(diff.size());

  RepetitionTestResult result;
  result.mean_same = m1;
  result.mean_diff = m2;
  result.pairs = same.size();

  const double se2 = v1 / n1 + v2 / n2;
  if (se2 <= 0.0) {
    // zero variance on both sides: perfect separation one way or the other
    result.t_stat = m1 > m2 ? std::numeric_limits<double>::infinity()
                   : m1 < m2 ? -std::numeric_limits<double>::infinity()
                             : 0.0;
    result.p_value = m1 > m2 ? 0.0 : 1.0;
    return result;
  }
  result.t_stat = (m1 - m2) / std::sqrt(se2);
  const double df = se2 * se2 /
                    ((v1 / n1) * (v1 / n1) / (n1 - 1.0) + (v2 / n2) * (v2 / n2) / (n2 - 1.0));
  result.p_value = t_upper_tail(result.t_stat, df);
  return result;
}

}  // namespace omba::eval
