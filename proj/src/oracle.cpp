#include "tnperm/oracle.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "tnperm/errors.hpp"
#include "tnperm/seeding.hpp"

namespace tnperm {

EntryOracle::EntryOracle(PhysicalDims dims) : dims_(std::move(dims)) {}

double EntryOracle::query(std::span<const int> x) {
  const int d = dims_.size();
  if (static_cast<int>(x.size()) != d) {
    throw DomainError(fmt::format("query index has {} entries, tensor order is {}", x.size(), d));
  }
  // Linear offset when the tensor is addressable in 63 bits, otherwise a hash.
  const bool linear = dims_.total() < std::numeric_limits<std::int64_t>::max();
  std::uint64_t key = linear ? 0 : 0xcbf29ce484222325ULL;
  for (int i = 0; i < d; ++i) {
    const int xi = x[static_cast<std::size_t>(i)];
    if (xi < 0 || xi >= dims_[i]) {
      throw DomainError(fmt::format("query index {} out of range [0, {}) on axis {}", xi, dims_[i], i));
    }
    key = linear ? key * static_cast<std::uint64_t>(dims_[i]) + static_cast<std::uint64_t>(xi)
                 : splitmix64(key ^ static_cast<std::uint64_t>(xi));
  }
  const std::uint64_t ordinal = count_.fetch_add(1, std::memory_order_relaxed);
  {
    std::lock_guard lock(seen_mutex_);
    seen_.insert(key);
  }
  return evaluate(x, ordinal);
}

QueryStats EntryOracle::stats() const {
  std::lock_guard lock(seen_mutex_);
  return {count_.load(std::memory_order_relaxed), static_cast<std::uint64_t>(seen_.size())};
}

QueryStats query_stats(const EntryOracle& oracle) { return oracle.stats(); }

namespace {

class ExactOracle final : public EntryOracle {
 public:
  explicit ExactOracle(CoreStack stack) : EntryOracle(stack.dims()), stack_(std::move(stack)) {}

 protected:
  double evaluate(std::span<const int> x, std::uint64_t) override { return evaluate_entry(stack_, x); }

 private:
  CoreStack stack_;
};

/// Standard normal variate from a 64-bit key (Box-Muller on two derived words).
double keyed_normal(std::uint64_t seed, std::uint64_t ordinal) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const std::uint64_t a = derive_seed(seed, {ordinal, 0});
  const std::uint64_t b = derive_seed(seed, {ordinal, 1});
  // 53-bit uniforms; u1 in (0, 1] keeps the log finite.
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

class NoisyOracle final : public EntryOracle {
 public:
  NoisyOracle(std::shared_ptr<EntryOracle> inner, double sigma, std::uint64_t seed)
      : EntryOracle(inner->dims()), inner_(std::move(inner)), sigma_(sigma), seed_(seed) {}

 protected:
  double evaluate(std::span<const int> x, std::uint64_t ordinal) override {
    const double truth = inner_->query(x);
    if (sigma_ == 0.0) return truth;
    return truth + sigma_ * keyed_normal(seed_, ordinal);
  }

 private:
  std::shared_ptr<EntryOracle> inner_;
  double sigma_;
  std::uint64_t seed_;
};

/// exp(-beta J) split as exp(shift) * scaled with every scaled entry in (0, 1].
struct ScaledBoltzmann {
  Eigen::MatrixXd scaled;
  double shift = 0.0;
};

ScaledBoltzmann boltzmann_factor(const Eigen::MatrixXd& J, double beta) {
  const Eigen::MatrixXd exponent = -beta * J;
  const double shift = exponent.maxCoeff();
  return {(exponent.array() - shift).exp().matrix(), shift};
}

// Axes in ring order, starting at axis 0 and heading towards its smaller
// neighbour. Every member of tau's loop class yields the same walk, so the
// floating-point evaluation is identical across the class. Walking backwards
// is valid because every Boltzmann factor is symmetric.
std::vector<int> canonical_walk(const Permutation& tau) {
  const int d = tau.size();
  const Permutation inv = tau.inverse();
  const int start = inv(0);
  const int step = d > 2 && tau((start + d - 1) % d) < tau((start + 1) % d) ? d - 1 : 1;
  std::vector<int> walk(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) walk[static_cast<std::size_t>(j)] = tau((start + j * step) % d);
  return walk;
}

double free_energy_from_factors(const std::vector<ScaledBoltzmann>& factors, const PottsSpec& spec,
                                std::span<const int> x) {
  const std::vector<int> walk = canonical_walk(spec.tau);
  auto factor_at = [&](std::size_t j) -> const ScaledBoltzmann& {
    return factors[static_cast<std::size_t>(x[static_cast<std::size_t>(walk[j])])];
  };
  const ScaledBoltzmann& first = factor_at(0);
  Eigen::MatrixXd acc = first.scaled;
  double log_scale = first.shift;
  Eigen::MatrixXd tmp;
  for (std::size_t j = 1; j < walk.size(); ++j) {
    const ScaledBoltzmann& f = factor_at(j);
    tmp.noalias() = acc * f.scaled;
    const double s = tmp.maxCoeff();
    acc = tmp / s;
    log_scale += f.shift + std::log(s);
  }
  const double tr = acc.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw EvaluationError(fmt::format("partition trace is not positive ({})", tr));
  }
  return -(log_scale + std::log(tr)) / spec.beta;
}

std::vector<ScaledBoltzmann> all_factors(const PottsSpec& spec) {
  std::vector<ScaledBoltzmann> out;
  out.reserve(spec.couplings.size());
  for (const auto& J : spec.couplings) out.push_back(boltzmann_factor(J, spec.beta));
  return out;
}

void check_pool_index(const PottsSpec& spec, std::span<const int> x) {
  if (static_cast<int>(x.size()) != spec.sites()) {
    throw DomainError(fmt::format("Potts index has {} entries for {} sites", x.size(), spec.sites()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 || x[i] >= spec.pool_size()) {
      throw DomainError(fmt::format("coupling index {} out of range [0, {}) on axis {}", x[i], spec.pool_size(), i));
    }
  }
}

class PottsOracle final : public EntryOracle {
 public:
  explicit PottsOracle(PottsSpec spec)
      : EntryOracle(PhysicalDims::uniform(spec.sites(), spec.pool_size())),
        spec_(std::move(spec)),
        factors_(all_factors(spec_)) {}

 protected:
  double evaluate(std::span<const int> x, std::uint64_t) override {
    return free_energy_from_factors(factors_, spec_, x);
  }

 private:
  PottsSpec spec_;
  std::vector<ScaledBoltzmann> factors_;
};

}  // namespace

std::shared_ptr<EntryOracle> make_exact_oracle(CoreStack stack) {
  return std::make_shared<ExactOracle>(std::move(stack));
}

std::shared_ptr<EntryOracle> make_noisy_oracle(std::shared_ptr<EntryOracle> inner, double sigma,
                                               std::uint64_t seed) {
  if (!inner) throw DomainError("noisy oracle needs an inner oracle");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw DomainError(fmt::format("noise level must be finite and >= 0, got {}", sigma));
  }
  return std::make_shared<NoisyOracle>(std::move(inner), sigma, seed);
}

void PottsSpec::validate() const {
  if (r < 1) throw DomainError(fmt::format("spin count r = {} must be >= 1", r));
  if (!(beta > 0.0)) throw DomainError(fmt::format("inverse temperature beta = {} must be > 0", beta));
  if (couplings.empty()) throw DomainError("coupling pool is empty");
  if (sites() < 1) throw DomainError("Potts model needs at least one site");
  for (std::size_t m = 0; m < couplings.size(); ++m) {
    const auto& J = couplings[m];
    if (J.rows() != r || J.cols() != r) {
      throw DomainError(fmt::format("coupling {} is {}x{}, expected {}x{}", m, J.rows(), J.cols(), r, r));
    }
    if (J != J.transpose()) throw DomainError(fmt::format("coupling {} is not symmetric", m));
  }
}

double potts_free_energy(const PottsSpec& spec, std::span<const int> x) {
  spec.validate();
  check_pool_index(spec, x);
  return free_energy_from_factors(all_factors(spec), spec, x);
}

std::vector<Eigen::MatrixXd> sample_coupling_pool(int r, int pool, std::uint64_t seed) {
  if (r < 1 || pool < 1) throw DomainError("coupling pool needs r >= 1 and pool >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> out;
  for (int m = 0; m < pool; ++m) {
    Eigen::MatrixXd J(r, r);
    for (int a = 0; a < r; ++a) {
      for (int b = a; b < r; ++b) J(a, b) = J(b, a) = normal(rng);
    }
    out.push_back(std::move(J));
  }
  return out;
}

std::shared_ptr<EntryOracle> make_potts_oracle(PottsSpec spec) {
  spec.validate();
  return std::make_shared<PottsOracle>(std::move(spec));
}

}  // namespace tnperm
