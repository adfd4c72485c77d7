#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnperm/linalg.hpp"
#include "tnperm/matricize.hpp"
#include "tnperm/oracle.hpp"
#include "tnperm/permutation.hpp"

namespace tnperm {

/// Four axes up to rotation and reflection; stored as the lexicographically
/// smallest of the 8 equivalent tuples.
struct CyclicQuadOrder {
  std::array<int, 4> tuple{};
  friend bool operator==(const CyclicQuadOrder&, const CyclicQuadOrder&) = default;
};

/// Three axes up to reflection; stored with first < last.
struct LinearTripleOrder {
  std::array<int, 3> tuple{};
  int middle() const noexcept { return tuple[1]; }
  friend bool operator==(const LinearTripleOrder&, const LinearTripleOrder&) = default;
};

CyclicQuadOrder canonical_cycle(std::array<int, 4> tuple);
LinearTripleOrder canonical_path(std::array<int, 3> tuple);

/// Whether `tuple` (4 axes: cyclic, 3 axes: linear) appears in that order,
/// up to the format's symmetries, along the loop/path described by `tau`.
bool is_correct_order(const Permutation& tau, std::span<const int> tuple);

enum class RankMode { singular_value, exact_rank };

struct RecoveryConfig {
  /// Rank parameter; order tests compare sigma_{R^4} (ring) or sigma_{R^2} (train).
  int R = 2;
  /// Independent background draws per order test; odd.
  int voters = 1;
  RankMode rank_mode = RankMode::singular_value;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Every voter of an order test abstained because no grouping won strictly.
class UndecidableError : public std::runtime_error {
 public:
  UndecidableError(const std::string& what, std::vector<SingularSpectrum> spectra)
      : std::runtime_error(what), spectra_(std::move(spectra)) {}
  /// The three spectra seen by the first voter, in grouping order.
  const std::vector<SingularSpectrum>& spectra() const noexcept { return spectra_; }

 private:
  std::vector<SingularSpectrum> spectra_;
};

/// Scores used to compare the three groupings of one voter.
struct GroupingScores {
  std::array<double, 3> score{};
  std::array<SingularSpectrum, 3> spectra;
};

GroupingScores score_triple(const MatricizationTriple& triple, int k, RankMode mode);

/// One voter's decision; nullopt when no grouping wins strictly.
std::optional<CyclicQuadOrder> decide_four(const ProbeBlock& block, const RecoveryConfig& cfg,
                                           GroupingScores* scores = nullptr);
std::optional<LinearTripleOrder> decide_three(const ProbeBlock& block, const RecoveryConfig& cfg,
                                              GroupingScores* scores = nullptr);

/// Order of four axes on the loop. Each voter draws its own background from
/// (call_seed, voter); the most frequent class wins, ties going to the class
/// seen first.
CyclicQuadOrder order_four_tr(EntryOracle& oracle, std::array<int, 4> axes, const RecoveryConfig& cfg,
                              std::uint64_t call_seed);

/// Order of three axes on the path; same voting rule.
LinearTripleOrder order_three_tt(EntryOracle& oracle, std::array<int, 3> axes, const RecoveryConfig& cfg,
                                 std::uint64_t call_seed);

struct RecoveryTrace {
  int order_calls = 0;
  /// Canonical tuple returned by each order test, in call order.
  std::vector<std::vector<int>> decisions;
};

/// Loop recovery by ternary-search insertion of axes 4, 5, ..., d-1.
Permutation recover_ring(EntryOracle& oracle, const RecoveryConfig& cfg, RecoveryTrace* trace = nullptr);

/// Path recovery by ternary-search insertion of axes 3, 4, ..., d-1.
Permutation recover_train(EntryOracle& oracle, const RecoveryConfig& cfg, RecoveryTrace* trace = nullptr);

// ---------------------------------------------------------------------------
// Baseline: greedy subchain growth on the fully observed tensor.

/// Endpoint = axis whose single-axis unfolding has the smallest numerical rank;
/// then repeatedly append the axis that minimises the rank of the unfolding
/// (chain axes | rest). Ties go to the smallest axis.
Permutation baseline_tt(const DenseTensor& tensor, RankTolerance tol = RankTolerance::standard());

/// Observes every entry through `oracle` (subject to `cap`) and runs baseline_tt.
Permutation baseline_tt(EntryOracle& oracle, RankTolerance tol = RankTolerance::standard(),
                        std::int64_t cap = kDefaultContractCap);

/// Rank of the unfolding with `row_axes` as rows.
int unfolding_rank(const DenseTensor& tensor, std::span<const int> row_axes, RankTolerance tol);

}  // namespace tnperm
