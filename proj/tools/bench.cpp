// Benchmark comparing the serial reference paths against the OpenMP-parallel
// kernels: window training (lossy-race mode), rule mining (exact), and query
// ranking (exact).

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "omba/arm.hpp"
#include "omba/eval.hpp"
#include "omba/ingest.hpp"
#include "omba/ome.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace omba;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<Basket> random_stream(int baskets, int products, int users, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Basket> out;
  out.reserve(static_cast<std::size_t>(baskets));
  for (int i = 0; i < baskets; ++i) {
    Basket b;
    b.timestamp = i / (baskets / 2 + 1) * 86400 + i;
    b.user = "u" + std::to_string(rng.next_below(static_cast<std::uint64_t>(users)));
    const int items = 3 + static_cast<int>(rng.next_below(4));
    for (int k = 0; k < items; ++k) {
      std::string p = "p" + std::to_string(rng.next_below(static_cast<std::uint64_t>(products)));
      bool dup = false;
      for (const auto& item : b.items) dup |= item.product == p;
      if (!dup) b.items.push_back(BasketItem{p, rng.next_in(0.5, 12.0)});
    }
    out.push_back(std::move(b));
  }
  return out;
}

double bench_train(bool parallel, const std::vector<Window>& windows, int dim) {
  EmbeddingStore store(dim);
  ome::NoiseDistribution noise;
  ome::TrainerOptions options;
  options.hp.dimension = dim;
  options.hp.epochs = 5;
  options.parallel = parallel;
  ome::OnlineTrainer trainer(store, noise, options, 7);
  const auto start = std::chrono::steady_clock::now();
  for (const Window& w : windows) trainer.train_window(w);
  return seconds_since(start);
}

}  // namespace

int main(int argc, char** argv) {
  int baskets = 6000, products = 2000, users = 300, dim = 64;
  if (argc > 1) baskets = std::stoi(argv[1]);
  if (argc > 2) dim = std::stoi(argv[2]);

#ifdef _OPENMP
  std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
  std::printf("openmp: unavailable (serial build)\n");
#endif

  const auto stream = random_stream(baskets, products, users, 99);
  const auto windows = ingest::window_stream(stream);
  std::printf("stream: %d baskets, %d products, d=%d\n\n", baskets, products, dim);

  const double t_serial = bench_train(false, windows, dim);
  const double t_parallel = bench_train(true, windows, dim);
  std::printf("train   serial %8.3fs   parallel %8.3fs   speedup %.2fx\n", t_serial, t_parallel,
              t_serial / t_parallel);

  // Mining over a trained store; parallel and serial must agree exactly.
  EmbeddingStore store(dim);
  {
    ome::NoiseDistribution noise;
    ome::TrainerOptions options;
    options.hp.dimension = dim;
    options.hp.epochs = 5;
    ome::OnlineTrainer trainer(store, noise, options, 7);
    for (const Window& w : windows) trainer.train_window(w);
  }
  arm::HashEnsemble ensemble(4, 11, dim, 1234);
  arm::MineOptions mine_options;
  mine_options.top_k = 100;

  mine_options.parallel = false;
  auto start = std::chrono::steady_clock::now();
  const auto serial_rules = arm::mine_rules(store, ensemble, mine_options);
  const double m_serial = seconds_since(start);

  mine_options.parallel = true;
  start = std::chrono::steady_clock::now();
  const auto parallel_rules = arm::mine_rules(store, ensemble, mine_options);
  const double m_parallel = seconds_since(start);

  bool same = serial_rules.rules.size() == parallel_rules.rules.size();
  for (std::size_t i = 0; same && i < serial_rules.rules.size(); ++i)
    same = serial_rules.rules[i].product_a == parallel_rules.rules[i].product_a &&
           serial_rules.rules[i].product_b == parallel_rules.rules[i].product_b &&
           serial_rules.rules[i].collision_count == parallel_rules.rules[i].collision_count;
  std::printf("mine    serial %8.3fs   parallel %8.3fs   speedup %.2fx   identical: %s\n",
              m_serial, m_parallel, m_serial / m_parallel, same ? "yes" : "NO");

  // Query ranking across a window of baskets.
  {
    ome::NoiseDistribution noise;
    for (const Basket& b : stream)
      for (const BasketItem& item : b.items)
        noise.add(UnitKind::Product, store.intern(UnitKind::Product, item.product));
    noise.prepare();
    Rng rng(5);
    auto built = eval::build_queries(
        std::span<const Basket>(stream.data(), std::min<std::size_t>(stream.size(), 2000)), 10,
        noise, store, rng);

    std::vector<int> ranks_serial(built.queries.size());
    start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < built.queries.size(); ++i)
      ranks_serial[i] = eval::rank_candidates(built.queries[i], store, eval::Scorer::Embedding);
    const double e_serial = seconds_since(start);

    std::vector<int> ranks_parallel(built.queries.size());
    start = std::chrono::steady_clock::now();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 32)
#endif
    for (std::size_t i = 0; i < built.queries.size(); ++i)
      ranks_parallel[i] = eval::rank_candidates(built.queries[i], store, eval::Scorer::Embedding);
    const double e_parallel = seconds_since(start);

    same = ranks_serial == ranks_parallel;
    std::printf("rank    serial %8.3fs   parallel %8.3fs   speedup %.2fx   identical: %s\n",
                e_serial, e_parallel, e_serial / e_parallel, same ? "yes" : "NO");
  }
  return 0;
}
