#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tnperm/permutation.hpp"

namespace tnperm {

enum class Mode { ring, train };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// Physical (external) dimensions n_0..n_{d-1}, indexed by tensor axis.
class PhysicalDims {
 public:
  PhysicalDims() = default;
  explicit PhysicalDims(std::vector<int> n);
  static PhysicalDims uniform(int d, int n) { return PhysicalDims(std::vector<int>(static_cast<std::size_t>(d), n)); }

  int size() const noexcept { return static_cast<int>(n_.size()); }
  int operator[](int axis) const { return n_.at(static_cast<std::size_t>(axis)); }
  const std::vector<int>& values() const noexcept { return n_; }
  int max() const;
  int min() const;
  /// Product of all n_i, saturating at INT64_MAX.
  std::int64_t total() const noexcept;

  friend bool operator==(const PhysicalDims&, const PhysicalDims&) = default;

 private:
  std::vector<int> n_;
};

/// Bond dimensions r_0..r_{d-1}, indexed by chain position: the bond r_j sits
/// on the left of chain position j (cyclically). Train mode has r_0 = 1.
class BondDims {
 public:
  BondDims() = default;
  explicit BondDims(std::vector<int> r);
  static BondDims uniform(int d, int r) { return BondDims(std::vector<int>(static_cast<std::size_t>(d), r)); }
  /// (1, r, r, ..., r)
  static BondDims train(int d, int r);

  int size() const noexcept { return static_cast<int>(r_.size()); }
  /// Cyclic access: j is taken mod d.
  int operator[](int j) const;
  const std::vector<int>& values() const noexcept { return r_; }
  int max() const;

  friend bool operator==(const BondDims&, const BondDims&) = default;

 private:
  std::vector<int> r_;
};

/// A 3-way array u(left, x, right) stored as one left x right slice per x.
class Core {
 public:
  Core() = default;
  Core(int left, int phys, int right);

  int left() const noexcept { return left_; }
  int phys() const noexcept { return static_cast<int>(slices_.size()); }
  int right() const noexcept { return right_; }

  double& at(int a, int x, int b) { return slices_[static_cast<std::size_t>(x)](a, b); }
  double at(int a, int x, int b) const { return slices_[static_cast<std::size_t>(x)](a, b); }
  const Eigen::MatrixXd& slice(int x) const { return slices_[static_cast<std::size_t>(x)]; }
  Eigen::MatrixXd& slice(int x) { return slices_[static_cast<std::size_t>(x)]; }

  /// Same core with both bond axes swapped (each slice transposed).
  Core bond_transposed() const;

  friend bool operator==(const Core& a, const Core& b);

 private:
  int left_ = 0;
  int right_ = 0;
  std::vector<Eigen::MatrixXd> slices_;
};

/// The cores u^0..u^{d-1} (indexed by physical axis) together with the
/// permutation that places them on a loop or path. Core `i` has shape
/// (r_{perm^-1(i)}, n_i, r_{perm^-1(i)+1}).
class CoreStack {
 public:
  CoreStack(std::vector<Core> cores, Permutation perm, Mode mode);

  int order() const noexcept { return static_cast<int>(cores_.size()); }
  const Core& core(int axis) const { return cores_.at(static_cast<std::size_t>(axis)); }
  const std::vector<Core>& cores() const noexcept { return cores_; }
  const Permutation& perm() const noexcept { return perm_; }
  Mode mode() const noexcept { return mode_; }
  const PhysicalDims& dims() const noexcept { return dims_; }
  const BondDims& bonds() const noexcept { return bonds_; }

  friend bool operator==(const CoreStack&, const CoreStack&) = default;

 private:
  std::vector<Core> cores_;
  Permutation perm_;
  Mode mode_;
  PhysicalDims dims_;
  BondDims bonds_;
};

/// Full tensor in row-major order (last axis fastest).
struct DenseTensor {
  PhysicalDims dims;
  std::vector<double> values;

  double at(std::span<const int> x) const;
  std::int64_t offset(std::span<const int> x) const;
};

inline constexpr std::int64_t kDefaultContractCap = 10'000'000;

/// Entry tr(u^{p(0)}(x_{p(0)}) ... u^{p(d-1)}(x_{p(d-1)})) with p = stack.perm().
double evaluate_entry(const CoreStack& stack, std::span<const int> x);

DenseTensor full_contract(const CoreStack& stack, std::int64_t cap = kDefaultContractCap);

/// Re-express the stack under perm o alpha^k o beta^reflect without changing
/// the represented tensor. Rotation only relabels bonds; reflection reverses
/// the chain and transposes the bond axes of every core.
CoreStack transform_representation(const CoreStack& stack, int k, bool reflect);

/// All permutations describing the same loop (ring) or path (train) as `perm`.
std::vector<Permutation> class_members(const Permutation& perm, Mode mode);

bool same_class(const Permutation& a, const Permutation& b, Mode mode);

enum class Profile { full_rank, near_deficient };

std::string to_string(Profile profile);
Profile parse_profile(const std::string& text);

/// Gaussian random cores. `near_deficient` shrinks (std 0.1) every entry whose
/// left or right bond index is the last index of the largest bond dimension.
CoreStack sample_cores(const PhysicalDims& dims, const BondDims& bonds, const Permutation& perm, Mode mode,
                       Profile profile, std::uint64_t seed);

/// 0/1 cores realizing the rank lower bounds exactly. `positions` are ascending
/// chain positions of the probes (4 for ring, 3 for train); `ranks` are the
/// arc ranks R_s (4 for ring: arc s runs from probe s to probe s+1 cyclically;
/// 2 for train).
CoreStack witness_cores(Mode mode, const PhysicalDims& dims, const BondDims& bonds, const Permutation& perm,
                        std::span<const int> positions, std::span<const int> ranks);

struct AssumptionCheck {
  std::string name;
  std::int64_t lhs = 0;
  std::string relation;
  std::int64_t rhs = 0;
  bool pass = false;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_pass() const;
  std::string to_string() const;
};

AssumptionReport check_assumptions(const PhysicalDims& dims, const BondDims& bonds, int R, Mode mode,
                                   const Permutation& perm);

}  // namespace tnperm
