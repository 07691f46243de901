#include "omba/core.hpp"

#include <cmath>
#include <stdexcept>

namespace omba {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

static std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t sub_seed(std::uint64_t master, std::string_view role) {
  std::uint64_t state = master ^ fnv1a64(role);
  return splitmix64(state);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::next_below: n must be > 0");
  const std::uint64_t threshold = -n % n;  // 2^64 mod n
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = next_double();
  double u2 = next_double();
  if (u1 < 1e-300) u1 = 1e-300;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double sigmoid(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

NormalizeResult normalize(std::span<const double> v) {
  NormalizeResult out;
  out.value.assign(v.begin(), v.end());
  out.degenerate = !normalize_in_place(out.value);
  return out;
}

bool normalize_in_place(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm < 1e-12) return false;
  for (double& x : v) x /= norm;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double denom = std::sqrt(aa) * std::sqrt(bb);
  if (denom < 1e-24) return 0.0;
  return ab / denom;
}

EmbeddingStore::EmbeddingStore(int dimension) : dim_(dimension) {
  if (dimension <= 0) throw std::invalid_argument("EmbeddingStore: dimension must be positive");
}

std::uint32_t EmbeddingStore::intern(UnitKind kind, std::string_view id) {
  auto& index = (kind == UnitKind::Product) ? product_index_ : user_index_;
  auto it = index.find(std::string(id));
  if (it != index.end()) return it->second;
  const std::uint32_t dense = static_cast<std::uint32_t>(units_.size());
  units_.push_back(UnitId{kind, std::string(id)});
  vectors_.resize(vectors_.size() + dim_, 0.0);
  accum_.resize(accum_.size() + dim_, 0.0);
  initialized_.push_back(0);
  index.emplace(std::string(id), dense);
  return dense;
}

std::uint32_t EmbeddingStore::ensure_unit(UnitKind kind, std::string_view id, Rng& init_rng) {
  const std::uint32_t dense = intern(kind, id);
  if (!is_initialized(dense)) {
    const double scale = 0.5 / dim_;
    auto v = vec(dense);
    for (double& x : v) x = init_rng.next_in(-scale, scale);
    mark_initialized(dense);
  }
  return dense;
}

std::optional<std::uint32_t> EmbeddingStore::find(UnitKind kind, std::string_view id) const {
  const auto& index = (kind == UnitKind::Product) ? product_index_ : user_index_;
  auto it = index.find(std::string(id));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> EmbeddingStore::units_of_kind(UnitKind kind) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < units_.size(); ++i)
    if (units_[i].kind == kind) out.push_back(i);
  return out;
}

}  // namespace omba
