#include "tnperm/tensor_core.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "tnperm/errors.hpp"

namespace tnperm {

std::string to_string(Mode mode) { return mode == Mode::ring ? "ring" : "train"; }

Mode parse_mode(const std::string& text) {
  if (text == "ring" || text == "tr") return Mode::ring;
  if (text == "train" || text == "tt") return Mode::train;
  throw DomainError(fmt::format("unknown mode '{}'", text));
}

std::string to_string(Profile profile) {
  return profile == Profile::full_rank ? "full_rank" : "near_deficient";
}

Profile parse_profile(const std::string& text) {
  if (text == "full_rank") return Profile::full_rank;
  if (text == "near_deficient") return Profile::near_deficient;
  throw DomainError(fmt::format("unknown profile '{}'", text));
}

// ---------------------------------------------------------------------------
// Dimensions

PhysicalDims::PhysicalDims(std::vector<int> n) : n_(std::move(n)) {
  if (n_.size() < 3) throw DomainError(fmt::format("tensor order must be >= 3, got {}", n_.size()));
  for (std::size_t i = 0; i < n_.size(); ++i) {
    if (n_[i] < 1) throw DomainError(fmt::format("physical dimension n[{}] = {} must be >= 1", i, n_[i]));
  }
}

int PhysicalDims::max() const { return *std::max_element(n_.begin(), n_.end()); }
int PhysicalDims::min() const { return *std::min_element(n_.begin(), n_.end()); }

std::int64_t PhysicalDims::total() const noexcept {
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t p = 1;
  for (int v : n_) {
    if (p > kMax / v) return kMax;
    p *= v;
  }
  return p;
}

BondDims::BondDims(std::vector<int> r) : r_(std::move(r)) {
  if (r_.empty()) throw DomainError("bond dimensions must be non-empty");
  for (std::size_t j = 0; j < r_.size(); ++j) {
    if (r_[j] < 1) throw DomainError(fmt::format("bond dimension r[{}] = {} must be >= 1", j, r_[j]));
  }
}

BondDims BondDims::train(int d, int r) {
  std::vector<int> v(static_cast<std::size_t>(d), r);
  v.at(0) = 1;
  return BondDims(std::move(v));
}

int BondDims::operator[](int j) const {
  const int d = size();
  return r_[static_cast<std::size_t>(((j % d) + d) % d)];
}

int BondDims::max() const { return *std::max_element(r_.begin(), r_.end()); }

// ---------------------------------------------------------------------------
// Core / CoreStack

Core::Core(int left, int phys, int right) : left_(left), right_(right) {
  if (left < 1 || phys < 1 || right < 1) {
    throw DomainError(fmt::format("core shape ({}, {}, {}) must be positive", left, phys, right));
  }
  slices_.assign(static_cast<std::size_t>(phys), Eigen::MatrixXd::Zero(left, right));
}

Core Core::bond_transposed() const {
  Core out(right_, phys(), left_);
  for (int x = 0; x < phys(); ++x) out.slice(x) = slice(x).transpose();
  return out;
}

bool operator==(const Core& a, const Core& b) {
  if (a.left_ != b.left_ || a.right_ != b.right_ || a.slices_.size() != b.slices_.size()) return false;
  for (std::size_t x = 0; x < a.slices_.size(); ++x) {
    if (a.slices_[x] != b.slices_[x]) return false;
  }
  return true;
}

CoreStack::CoreStack(std::vector<Core> cores, Permutation perm, Mode mode)
    : cores_(std::move(cores)), perm_(std::move(perm)), mode_(mode) {
  const int d = order();
  if (perm_.size() != d) {
    throw DomainError(fmt::format("permutation size {} does not match {} cores", perm_.size(), d));
  }
  std::vector<int> n(static_cast<std::size_t>(d));
  std::vector<int> r(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) n[static_cast<std::size_t>(i)] = core(i).phys();
  for (int j = 0; j < d; ++j) r[static_cast<std::size_t>(j)] = core(perm_(j)).left();
  dims_ = PhysicalDims(std::move(n));
  bonds_ = BondDims(std::move(r));

  const int links = mode_ == Mode::ring ? d : d - 1;
  for (int j = 0; j < links; ++j) {
    const Core& a = core(perm_(j));
    const Core& b = core(perm_((j + 1) % d));
    if (a.right() != b.left()) {
      throw DomainError(fmt::format("bond mismatch between chain positions {} and {}: {} vs {}", j, (j + 1) % d,
                                    a.right(), b.left()));
    }
  }
  if (mode_ == Mode::train) {
    if (core(perm_(0)).left() != 1 || core(perm_(d - 1)).right() != 1) {
      throw DomainError("train mode requires unit outer bonds at both chain ends");
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

std::int64_t DenseTensor::offset(std::span<const int> x) const {
  if (static_cast<int>(x.size()) != dims.size()) {
    throw DomainError(fmt::format("index has {} entries, tensor order is {}", x.size(), dims.size()));
  }
  std::int64_t off = 0;
  for (int i = 0; i < dims.size(); ++i) {
    const int xi = x[static_cast<std::size_t>(i)];
    if (xi < 0 || xi >= dims[i]) throw DomainError(fmt::format("index {} out of range on axis {}", xi, i));
    off = off * dims[i] + xi;
  }
  return off;
}

double DenseTensor::at(std::span<const int> x) const { return values[static_cast<std::size_t>(offset(x))]; }

double evaluate_entry(const CoreStack& stack, std::span<const int> x) {
  const int d = stack.order();
  if (static_cast<int>(x.size()) != d) {
    throw DomainError(fmt::format("index has {} entries, tensor order is {}", x.size(), d));
  }
  for (int i = 0; i < d; ++i) {
    const int xi = x[static_cast<std::size_t>(i)];
    if (xi < 0 || xi >= stack.dims()[i]) {
      throw DomainError(fmt::format("index {} out of range [0, {}) on axis {}", xi, stack.dims()[i], i));
    }
  }

  thread_local Eigen::MatrixXd acc;
  thread_local Eigen::MatrixXd tmp;
  const Permutation& p = stack.perm();
  acc = stack.core(p(0)).slice(x[static_cast<std::size_t>(p(0))]);
  for (int j = 1; j < d; ++j) {
    const int axis = p(j);
    tmp.noalias() = acc * stack.core(axis).slice(x[static_cast<std::size_t>(axis)]);
    acc.swap(tmp);
  }
  return acc.trace();
}

DenseTensor full_contract(const CoreStack& stack, std::int64_t cap) {
  const std::int64_t total = stack.dims().total();
  if (total > cap) {
    throw ResourceError(fmt::format("full contraction needs {} entries, cap is {}", total, cap));
  }
  DenseTensor out{stack.dims(), std::vector<double>(static_cast<std::size_t>(total))};
  const int d = stack.order();
  std::vector<int> x(static_cast<std::size_t>(d), 0);
  for (std::int64_t off = 0; off < total; ++off) {
    out.values[static_cast<std::size_t>(off)] = evaluate_entry(stack, x);
    for (int i = d - 1; i >= 0; --i) {
      auto& xi = x[static_cast<std::size_t>(i)];
      if (++xi < stack.dims()[i]) break;
      xi = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equivalence

CoreStack transform_representation(const CoreStack& stack, int k, bool reflect) {
  const int d = stack.order();
  const int shift = ((k % d) + d) % d;
  if (shift != 0 && stack.mode() == Mode::train) {
    throw UnsupportedTransformError("rotation is not a symmetry of the train format");
  }
  // Rotation: chain position j now holds what position j + k held. Core shapes
  // are untouched because each core keeps its neighbours.
  Permutation perm = stack.perm().compose(Permutation::rotation(d, shift));
  std::vector<Core> cores = stack.cores();
  if (reflect) {
    perm = perm.compose(Permutation::reflection(d));
    for (auto& c : cores) c = c.bond_transposed();
  }
  return CoreStack(std::move(cores), std::move(perm), stack.mode());
}

std::vector<Permutation> class_members(const Permutation& perm, Mode mode) {
  const int d = perm.size();
  std::vector<Permutation> out;
  const int rotations = mode == Mode::ring ? d : 1;
  for (int k = 0; k < rotations; ++k) {
    const Permutation rotated = perm.compose(Permutation::rotation(d, k));
    for (int l = 0; l < 2; ++l) {
      Permutation member = l == 0 ? rotated : rotated.compose(Permutation::reflection(d));
      if (std::find(out.begin(), out.end(), member) == out.end()) out.push_back(std::move(member));
    }
  }
  return out;
}

bool same_class(const Permutation& a, const Permutation& b, Mode mode) {
  if (a.size() != b.size()) {
    throw DomainError(fmt::format("permutations act on different sets ({} vs {})", a.size(), b.size()));
  }
  const auto members = class_members(a, mode);
  return std::find(members.begin(), members.end(), b) != members.end();
}

// ---------------------------------------------------------------------------
// Generators

namespace {

void check_layout(const PhysicalDims& dims, const BondDims& bonds, const Permutation& perm, Mode mode) {
  if (bonds.size() != dims.size() || perm.size() != dims.size()) {
    throw DomainError(fmt::format("inconsistent orders: {} dims, {} bonds, permutation of {}", dims.size(),
                                  bonds.size(), perm.size()));
  }
  if (mode == Mode::train && bonds[0] != 1) {
    throw DomainError(fmt::format("train mode requires r[0] = 1, got {}", bonds[0]));
  }
}

std::vector<Core> empty_cores(const PhysicalDims& dims, const BondDims& bonds, const Permutation& perm) {
  const int d = dims.size();
  std::vector<Core> cores(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const int axis = perm(j);
    cores[static_cast<std::size_t>(axis)] = Core(bonds[j], dims[axis], bonds[j + 1]);
  }
  return cores;
}

}  // namespace

CoreStack sample_cores(const PhysicalDims& dims, const BondDims& bonds, const Permutation& perm, Mode mode,
                       Profile profile, std::uint64_t seed) {
  check_layout(dims, bonds, perm, mode);
  std::vector<Core> cores = empty_cores(dims, bonds, perm);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int last = bonds.max() - 1;
  const bool shrink = profile == Profile::near_deficient && last >= 1;
  for (auto& c : cores) {
    for (int x = 0; x < c.phys(); ++x) {
      for (int a = 0; a < c.left(); ++a) {
        for (int b = 0; b < c.right(); ++b) {
          const double z = normal(rng);
          c.at(a, x, b) = (shrink && (a == last || b == last)) ? 0.1 * z : z;
        }
      }
    }
  }
  return CoreStack(std::move(cores), perm, mode);
}

namespace {

int min_bond_on_arc(const BondDims& bonds, int from, int to) {
  // Bonds r_{from+1}, ..., r_{to} taken cyclically; `to` may exceed d.
  int m = std::numeric_limits<int>::max();
  for (int j = from + 1; j <= to; ++j) m = std::min(m, bonds[j]);
  return m;
}

Eigen::MatrixXd unit_outer(int rows, int cols, int p, int q) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  m(p, q) = 1.0;
  return m;
}

Eigen::MatrixXd partial_identity(int rows, int cols, int rank) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int p = 0; p < rank; ++p) m(p, p) = 1.0;
  return m;
}

}  // namespace

CoreStack witness_cores(Mode mode, const PhysicalDims& dims, const BondDims& bonds, const Permutation& perm,
                        std::span<const int> positions, std::span<const int> ranks) {
  check_layout(dims, bonds, perm, mode);
  const int d = dims.size();
  const std::size_t probes = mode == Mode::ring ? 4 : 3;
  const std::size_t arcs = mode == Mode::ring ? 4 : 2;
  if (positions.size() != probes || ranks.size() != arcs) {
    throw DomainError(fmt::format("{} witness needs {} positions and {} ranks", to_string(mode), probes, arcs));
  }
  for (std::size_t s = 0; s < probes; ++s) {
    if (positions[s] < 0 || positions[s] >= d || (s > 0 && positions[s] <= positions[s - 1])) {
      throw DomainError("witness positions must be strictly ascending chain positions");
    }
  }
  for (std::size_t s = 0; s < arcs; ++s) {
    if (ranks[s] < 1) throw DomainError(fmt::format("witness rank R[{}] must be >= 1", s));
  }

  std::vector<Core> cores = empty_cores(dims, bonds, perm);
  auto core_at = [&](int j) -> Core& { return cores[static_cast<std::size_t>(perm(j))]; };

  if (mode == Mode::ring) {
    for (std::size_t s = 0; s < 4; ++s) {
      const int from = positions[s];
      const int to = s == 3 ? positions[0] + d : positions[s + 1];
      const int bound = min_bond_on_arc(bonds, from, to);
      if (ranks[s] > bound) {
        throw DomainError(fmt::format("R[{}] = {} exceeds min bond {} on the arc from position {} to {}", s,
                                      ranks[s], bound, from, to % d));
      }
      const int prev = ranks[(s + 3) % 4];
      const int n = dims[perm(from)];
      if (n < prev * ranks[s]) {
        throw DomainError(fmt::format("n[{}] = {} is below R[{}] * R[{}] = {}", perm(from), n, (s + 3) % 4, s,
                                      prev * ranks[s]));
      }
    }
    for (std::size_t s = 0; s < 4; ++s) {
      const int from = positions[s];
      const int to = s == 3 ? positions[0] + d : positions[s + 1];
      const int prev = ranks[(s + 3) % 4];
      Core& probe = core_at(from);
      for (int p = 0; p < prev; ++p) {
        for (int q = 0; q < ranks[s]; ++q) probe.slice(p * ranks[s] + q) = unit_outer(probe.left(), probe.right(), p, q);
      }
      for (int j = from + 1; j < to; ++j) {
        Core& c = core_at(j % d);
        for (int x = 0; x < c.phys(); ++x) c.slice(x) = partial_identity(c.left(), c.right(), ranks[s]);
      }
    }
  } else {
    const int j0 = positions[0];
    const int j1 = positions[1];
    const int j2 = positions[2];
    const int R0 = ranks[0];
    const int R1 = ranks[1];
    if (R0 > min_bond_on_arc(bonds, j0, j1)) {
      throw DomainError(fmt::format("R[0] = {} exceeds min bond {} between positions {} and {}", R0,
                                    min_bond_on_arc(bonds, j0, j1), j0, j1));
    }
    if (R1 > min_bond_on_arc(bonds, j1, j2)) {
      throw DomainError(fmt::format("R[1] = {} exceeds min bond {} between positions {} and {}", R1,
                                    min_bond_on_arc(bonds, j1, j2), j1, j2));
    }
    if (dims[perm(j0)] < R0) throw DomainError(fmt::format("n[{}] is below R[0] = {}", perm(j0), R0));
    if (dims[perm(j1)] < R0 * R1) throw DomainError(fmt::format("n[{}] is below R[0] * R[1] = {}", perm(j1), R0 * R1));
    if (dims[perm(j2)] < R1) throw DomainError(fmt::format("n[{}] is below R[1] = {}", perm(j2), R1));

    for (int j = 0; j < d; ++j) {
      Core& c = core_at(j);
      if (j == j0) {
        for (int q = 0; q < R0; ++q) c.slice(q) = unit_outer(c.left(), c.right(), 0, q);
      } else if (j == j1) {
        for (int p = 0; p < R0; ++p) {
          for (int q = 0; q < R1; ++q) c.slice(p * R1 + q) = unit_outer(c.left(), c.right(), p, q);
        }
      } else if (j == j2) {
        for (int p = 0; p < R1; ++p) c.slice(p) = unit_outer(c.left(), c.right(), p, 0);
      } else {
        const int rank = (j < j0 || j > j2) ? 1 : (j < j1 ? R0 : R1);
        for (int x = 0; x < c.phys(); ++x) c.slice(x) = partial_identity(c.left(), c.right(), rank);
      }
    }
  }
  return CoreStack(std::move(cores), perm, mode);
}

// ---------------------------------------------------------------------------
// Assumptions

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.pass; });
}

std::string AssumptionReport::to_string() const {
  std::string out;
  for (const auto& c : checks) {
    out += fmt::format("{:<28} {:>6} {:>2} {:<6} {}\n", c.name, c.lhs, c.relation, c.rhs, c.pass ? "pass" : "FAIL");
  }
  out += all_pass() ? "all pass\n" : "some checks failed\n";
  return out;
}

AssumptionReport check_assumptions(const PhysicalDims& dims, const BondDims& bonds, int R, Mode mode,
                                   const Permutation& perm) {
  check_layout(dims, bonds, perm, mode);
  const int d = dims.size();
  const std::int64_t R2 = static_cast<std::int64_t>(R) * R;
  AssumptionReport report;
  auto add = [&](std::string name, std::int64_t lhs, std::string rel, std::int64_t rhs) {
    const bool pass = rel == ">=" ? lhs >= rhs : lhs > rhs;
    report.checks.push_back({std::move(name), lhs, std::move(rel), rhs, pass});
  };

  if (mode == Mode::ring) {
    add("min n_i >= R^2", dims.min(), ">=", R2);
    add("R^2 > max r_j", R2, ">", bonds.max());
    add("min r_j >= R", *std::min_element(bonds.values().begin(), bonds.values().end()), ">=", R);
  } else {
    int inner_n = std::numeric_limits<int>::max();
    for (int j = 1; j + 1 < d; ++j) inner_n = std::min(inner_n, dims[perm(j)]);
    int rmax = 0;
    int rmin = std::numeric_limits<int>::max();
    for (int j = 1; j < d; ++j) {
      rmax = std::max(rmax, bonds[j]);
      rmin = std::min(rmin, bonds[j]);
    }
    add("min endpoint n >= R", std::min(dims[perm(0)], dims[perm(d - 1)]), ">=", R);
    add("min interior n >= R^2", inner_n, ">=", R2);
    add("R^2 > max r_j (j >= 1)", R2, ">", rmax);
    add("min r_j (j >= 1) >= R", rmin, ">=", R);
  }
  return report;
}

}  // namespace tnperm
