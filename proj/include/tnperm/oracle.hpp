#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "tnperm/tensor_core.hpp"

namespace tnperm {

struct QueryStats {
  std::uint64_t count = 0;
  std::uint64_t distinct = 0;
};

/// Entry-wise access to a d-tensor. Every call to query() is one observation
/// and is counted; subclasses supply the value through evaluate().
class EntryOracle {
 public:
  explicit EntryOracle(PhysicalDims dims);
  virtual ~EntryOracle() = default;
  EntryOracle(const EntryOracle&) = delete;
  EntryOracle& operator=(const EntryOracle&) = delete;

  double query(std::span<const int> x);

  const PhysicalDims& dims() const noexcept { return dims_; }
  QueryStats stats() const;

 protected:
  /// `ordinal` is the 0-based index of this observation on this oracle.
  virtual double evaluate(std::span<const int> x, std::uint64_t ordinal) = 0;

 private:
  PhysicalDims dims_;
  std::atomic<std::uint64_t> count_{0};
  mutable std::mutex seen_mutex_;
  std::unordered_set<std::uint64_t> seen_;
};

std::shared_ptr<EntryOracle> make_exact_oracle(CoreStack stack);

/// Adds independent N(0, sigma^2) noise to every observation. The noise of the
/// k-th observation is a fixed function of (seed, k).
std::shared_ptr<EntryOracle> make_noisy_oracle(std::shared_ptr<EntryOracle> inner, double sigma,
                                               std::uint64_t seed);

/// Ring Potts model with a pool of symmetric couplings. Axis i of the tensor
/// selects which pool matrix couples site i to its successor on the ring.
struct PottsSpec {
  int r = 3;
  double beta = 10.0;
  std::vector<Eigen::MatrixXd> couplings;
  Permutation tau;

  int sites() const noexcept { return tau.size(); }
  int pool_size() const noexcept { return static_cast<int>(couplings.size()); }
  void validate() const;
};

/// -(1/beta) log tr(prod_j exp.(-beta J_{x[tau(j)]})) with an element-wise
/// exponential and the natural log. Works for any number of sites >= 1.
double potts_free_energy(const PottsSpec& spec, std::span<const int> x);

/// Pool of `pool` symmetric r x r matrices with i.i.d. N(0,1) entries on and
/// above the diagonal.
std::vector<Eigen::MatrixXd> sample_coupling_pool(int r, int pool, std::uint64_t seed);

std::shared_ptr<EntryOracle> make_potts_oracle(PottsSpec spec);

QueryStats query_stats(const EntryOracle& oracle);

}  // namespace tnperm
