#include "omba/ome.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace omba::ome {

// ---------------------------------------------------------------------------
// NoiseDistribution
// ---------------------------------------------------------------------------

void NoiseDistribution::Table::rebuild() const {
  cumulative.resize(counts.size());
  std::int64_t running = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    running += counts[i];
    cumulative[i] = running;
  }
  dirty = false;
}

void NoiseDistribution::add(UnitKind kind, std::uint32_t unit, std::int64_t count) {
  Table& t = table(kind);
  auto it = t.position.find(unit);
  if (it == t.position.end()) {
    t.position.emplace(unit, t.units.size());
    t.units.push_back(unit);
    t.counts.push_back(count);
  } else {
    t.counts[it->second] += count;
  }
  t.total += count;
  t.dirty = true;
}

std::uint32_t NoiseDistribution::sample(UnitKind kind, Rng& rng) const {
  const Table& t = table(kind);
  if (t.units.empty()) throw std::runtime_error("NoiseDistribution: empty table");
  if (t.dirty) t.rebuild();
  const std::int64_t r = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(t.total)));
  auto it = std::upper_bound(t.cumulative.begin(), t.cumulative.end(), r);
  return t.units[static_cast<std::size_t>(it - t.cumulative.begin())];
}

std::uint32_t NoiseDistribution::sample_excluding(UnitKind kind, std::uint32_t exclude,
                                                  Rng& rng) const {
  const Table& t = table(kind);
  if (t.units.empty()) throw std::runtime_error("NoiseDistribution: empty table");
  if (t.dirty) t.rebuild();
  auto pos = t.position.find(exclude);
  if (pos == t.position.end()) return sample(kind, rng);
  const std::int64_t excluded_mass = t.counts[pos->second];
  const std::int64_t remaining = t.total - excluded_mass;
  if (remaining <= 0) return exclude;  // nothing else to draw
  const std::int64_t before = pos->second == 0 ? 0 : t.cumulative[pos->second - 1];
  std::int64_t r = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(remaining)));
  if (r >= before) r += excluded_mass;
  auto it = std::upper_bound(t.cumulative.begin(), t.cumulative.end(), r);
  return t.units[static_cast<std::size_t>(it - t.cumulative.begin())];
}

void NoiseDistribution::prepare() const {
  if (products_.dirty) products_.rebuild();
  if (users_.dirty) users_.rebuild();
}

std::uint32_t NoiseDistribution::sample_uniform(UnitKind kind, Rng& rng) const {
  const Table& t = table(kind);
  if (t.units.empty()) throw std::runtime_error("NoiseDistribution: empty table");
  return t.units[rng.next_below(t.units.size())];
}

std::int64_t NoiseDistribution::total(UnitKind kind) const { return table(kind).total; }

std::size_t NoiseDistribution::distinct(UnitKind kind) const { return table(kind).units.size(); }

std::int64_t NoiseDistribution::count_of(UnitKind kind, std::uint32_t unit) const {
  const Table& t = table(kind);
  auto it = t.position.find(unit);
  return it == t.position.end() ? 0 : t.counts[it->second];
}

std::span<const std::uint32_t> NoiseDistribution::units(UnitKind kind) const {
  return table(kind).units;
}

// ---------------------------------------------------------------------------
// Weighting and the context vector
// ---------------------------------------------------------------------------

double value_weight(double price, double clip) {
  const double p = std::min(std::max(price, 0.01), clip);
  return std::pow(p, 2.3) / 1.3;
}

double item_weight(const std::optional<double>& price, double clip, bool value_weighting) {
  if (!value_weighting || !price.has_value()) return 1.0;
  return value_weight(*price, clip);
}

std::vector<double> context_vector(const TrainTask& task, const EmbeddingStore& store) {
  const int d = store.dimension();
  std::vector<double> h(static_cast<std::size_t>(d), 0.0);

  const bool have_products = !task.context_products.empty();
  std::vector<double> avg;
  if (have_products) {
    avg.assign(static_cast<std::size_t>(d), 0.0);
    double weight_sum = 0.0;
    for (const auto& [unit, w] : task.context_products) {
      auto v = store.vec(unit);
      for (int i = 0; i < d; ++i) avg[static_cast<std::size_t>(i)] += w * v[static_cast<std::size_t>(i)];
      weight_sum += w;
    }
    for (double& x : avg) x /= weight_sum;
  }

  if (task.target_kind == UnitKind::User) {
    if (!have_products) throw std::invalid_argument("context_vector: user task needs context products");
    return avg;
  }

  if (!task.user.has_value())
    throw std::invalid_argument("context_vector: product task needs a user unit");
  auto vu = store.vec(*task.user);
  if (!have_products) {
    h.assign(vu.begin(), vu.end());
    return h;
  }
  for (int i = 0; i < d; ++i)
    h[static_cast<std::size_t>(i)] = 0.5 * (vu[static_cast<std::size_t>(i)] + avg[static_cast<std::size_t>(i)]);
  return h;
}

std::vector<std::uint32_t> sample_negatives(UnitKind kind, int count, std::uint32_t exclude,
                                            const NoiseDistribution& noise, Rng& rng,
                                            bool uniform) {
  if (count < 1) throw std::invalid_argument("sample_negatives: count must be >= 1");
  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::uint32_t draw = exclude;
    for (int attempt = 0; attempt < 100 && draw == exclude; ++attempt) {
      draw = uniform ? noise.sample_uniform(kind, rng) : noise.sample(kind, rng);
    }
    // A heavily skewed table can exhaust the rejection budget; fall back to
    // an exact conditional draw. Only a single-unit table yields the target.
    if (draw == exclude && !uniform) draw = noise.sample_excluding(kind, exclude, rng);
    out.push_back(draw);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loss and gradients
// ---------------------------------------------------------------------------

namespace {

constexpr double kDotClamp = 30.0;

struct GradAccumulator {
  // Tasks touch a handful of units; linear scan beats hashing here.
  std::vector<std::pair<std::uint32_t, std::vector<double>>> entries;
  int dim;

  explicit GradAccumulator(int d) : dim(d) {}

  std::vector<double>& slot(std::uint32_t unit) {
    for (auto& [u, g] : entries)
      if (u == unit) return g;
    entries.emplace_back(unit, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    return entries.back().second;
  }

  void add_scaled(std::uint32_t unit, std::span<const double> v, double scale) {
    auto& g = slot(unit);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * v[i];
  }
};

}  // namespace

TaskGradients task_loss_and_grads(const TrainTask& task,
                                  std::span<const std::uint32_t> negatives,
                                  const EmbeddingStore& store) {
  const int d = store.dimension();
  const std::vector<double> h = context_vector(task, store);
  auto vz = store.vec(task.target);

  GradAccumulator acc(d);
  TaskGradients out;

  const double s_pos = std::clamp(dot(vz, h), -kDotClamp, kDotClamp);
  out.loss = softplus(-s_pos);
  const double pos_coeff = sigmoid(s_pos) - 1.0;  // dL/ds for the positive term
  acc.add_scaled(task.target, h, pos_coeff);

  std::vector<double> grad_h(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i)
    grad_h[static_cast<std::size_t>(i)] = pos_coeff * vz[static_cast<std::size_t>(i)];

  for (std::uint32_t n : negatives) {
    auto vn = store.vec(n);
    const double s_neg = std::clamp(dot(vn, h), -kDotClamp, kDotClamp);
    out.loss += softplus(s_neg);
    const double neg_coeff = sigmoid(s_neg);
    acc.add_scaled(n, h, neg_coeff);
    for (int i = 0; i < d; ++i)
      grad_h[static_cast<std::size_t>(i)] += neg_coeff * vn[static_cast<std::size_t>(i)];
  }

  // Chain rule through the context construction.
  const bool have_products = !task.context_products.empty();
  if (task.target_kind == UnitKind::User) {
    double weight_sum = 0.0;
    for (const auto& [unit, w] : task.context_products) weight_sum += w;
    for (const auto& [unit, w] : task.context_products)
      acc.add_scaled(unit, grad_h, w / weight_sum);
  } else if (!have_products) {
    acc.add_scaled(*task.user, grad_h, 1.0);
  } else {
    acc.add_scaled(*task.user, grad_h, 0.5);
    double weight_sum = 0.0;
    for (const auto& [unit, w] : task.context_products) weight_sum += w;
    for (const auto& [unit, w] : task.context_products)
      acc.add_scaled(unit, grad_h, 0.5 * w / weight_sum);
  }

  out.grads = std::move(acc.entries);
  return out;
}

double intra_agreement(std::span<const std::uint32_t> units, const EmbeddingStore& store) {
  if (units.size() < 2) return 0.5;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t j = i + 1; j < units.size(); ++j) {
      sum += sigmoid(dot(store.vec(units[i]), store.vec(units[j])));
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double adaptive_lr(double psi, double tau, double eta) {
  return std::exp(-tau * psi) * eta;
}

bool apply_update(std::uint32_t unit, std::span<const double> gradient, double lr,
                  EmbeddingStore& store, double eps) {
  for (double g : gradient)
    if (!std::isfinite(g)) return false;
  auto acc = store.accum(unit);
  auto v = store.vec(unit);
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    const double g = gradient[i];
    acc[i] += g * g;
    v[i] -= lr / std::sqrt(acc[i] + eps) * g;
  }
  return true;
}

// ---------------------------------------------------------------------------
// OnlineTrainer
// ---------------------------------------------------------------------------

OnlineTrainer::OnlineTrainer(EmbeddingStore& store, NoiseDistribution& noise,
                             TrainerOptions options, std::uint64_t master_seed)
    : store_(store),
      noise_(noise),
      options_(std::move(options)),
      init_rng_(sub_seed(master_seed, "init")),
      negative_rng_(sub_seed(master_seed, "negatives")),
      shuffle_rng_(sub_seed(master_seed, "shuffle")),
      parallel_seed_(sub_seed(master_seed, "parallel")) {}

OnlineTrainer::DenseBasket OnlineTrainer::densify(const Basket& basket) {
  DenseBasket out;
  out.product_units.reserve(basket.items.size());
  out.weights.reserve(basket.items.size());
  for (const BasketItem& item : basket.items) {
    out.product_units.push_back(store_.ensure_unit(UnitKind::Product, item.product, init_rng_));
    out.weights.push_back(item_weight(item.price, options_.hp.price_clip, options_.value_weighting));
  }
  out.user_unit = store_.ensure_unit(UnitKind::User, basket.user, init_rng_);
  out.all_units = out.product_units;
  out.all_units.push_back(out.user_unit);
  return out;
}

std::tuple<std::size_t, double, std::size_t> OnlineTrainer::train_basket(const DenseBasket& b,
                                                                         Rng& rng) {
  std::size_t tasks = 0;
  double loss_sum = 0.0;
  std::size_t skipped = 0;

  const double psi = intra_agreement(b.all_units, store_);
  const double lr = adaptive_lr(psi, options_.hp.tau, options_.hp.eta);

  auto run_task = [&](const TrainTask& task) {
    auto negatives = sample_negatives(task.target_kind, options_.hp.negatives, task.target,
                                      noise_, rng, options_.uniform_negatives);
    TaskGradients tg = task_loss_and_grads(task, negatives, store_);
    for (const auto& [unit, grad] : tg.grads) {
      if (!apply_update(unit, grad, lr, store_)) ++skipped;
    }
    loss_sum += tg.loss;
    ++tasks;
  };

  // Product-recovery tasks: one per product, context = siblings + user.
  for (std::size_t t = 0; t < b.product_units.size(); ++t) {
    TrainTask task;
    task.target = b.product_units[t];
    task.target_kind = UnitKind::Product;
    task.user = b.user_unit;
    for (std::size_t j = 0; j < b.product_units.size(); ++j)
      if (j != t) task.context_products.emplace_back(b.product_units[j], b.weights[j]);
    run_task(task);
  }

  // User-recovery task: context = every product of the basket.
  if (!b.product_units.empty()) {
    TrainTask task;
    task.target = b.user_unit;
    task.target_kind = UnitKind::User;
    for (std::size_t j = 0; j < b.product_units.size(); ++j)
      task.context_products.emplace_back(b.product_units[j], b.weights[j]);
    run_task(task);
  }

  return {tasks, loss_sum, skipped};
}

TrainReport OnlineTrainer::train_window(const Window& window) {
  TrainReport report;
  report.window_index = window.index;
  report.baskets = window.baskets.size();

  auto initialized_count = [this] {
    std::size_t c = 0;
    for (std::uint32_t i = 0; i < store_.unit_count(); ++i)
      if (store_.is_initialized(i)) ++c;
    return c;
  };
  const std::size_t units_before = initialized_count();

  // Pre-pass (always sequential): intern units, lazy-init vectors, and fold
  // the window's counts into the noise distribution before any task trains.
  std::vector<DenseBasket> dense;
  dense.reserve(window.baskets.size());
  for (const Basket& basket : window.baskets) {
    dense.push_back(densify(basket));
    const DenseBasket& db = dense.back();
    for (std::uint32_t p : db.product_units) noise_.add(UnitKind::Product, p);
    noise_.add(UnitKind::User, db.user_unit);
  }
  report.units_initialized = initialized_count() - units_before;
  noise_.prepare();

  double loss_sum = 0.0;
  std::vector<std::size_t> order(dense.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < options_.hp.epochs; ++epoch) {
    shuffle_rng_.shuffle(order);

    if (!options_.parallel) {
      for (std::size_t idx : order) {
        auto [tasks, loss, skipped] = train_basket(dense[idx], negative_rng_);
        report.tasks += tasks;
        loss_sum += loss;
        report.skipped_updates += skipped;
      }
      continue;
    }

    // Lossy-race parallel mode: concurrent basket updates, per-iteration rng
    // streams. Converges statistically; not reproducible run to run against
    // the serial path.
    std::size_t tasks_total = 0, skipped_total = 0;
    double loss_total = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : tasks_total, skipped_total, loss_total)
#endif
    for (std::size_t k = 0; k < order.size(); ++k) {
      std::uint64_t s = parallel_seed_ ^ (0x9E3779B97F4A7C15ULL * (k + 1)) ^
                        (static_cast<std::uint64_t>(epoch) << 32) ^
                        (static_cast<std::uint64_t>(window.index) << 16);
      Rng rng(s);
      auto [tasks, loss, skipped] = train_basket(dense[order[k]], rng);
      tasks_total += tasks;
      loss_total += loss;
      skipped_total += skipped;
    }
    report.tasks += tasks_total;
    loss_sum += loss_total;
    report.skipped_updates += skipped_total;
  }

  store_.set_step_count(store_.step_count() + report.tasks);
  report.mean_loss = report.tasks == 0 ? 0.0 : loss_sum / static_cast<double>(report.tasks);
  return report;
}

}  // namespace omba::ome
