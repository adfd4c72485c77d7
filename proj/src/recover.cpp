#include "tnperm/recover.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tnperm/errors.hpp"
#include "tnperm/seeding.hpp"

namespace tnperm {

CyclicQuadOrder canonical_cycle(std::array<int, 4> tuple) {
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (tuple[static_cast<std::size_t>(i)] == tuple[static_cast<std::size_t>(j)]) {
        throw DomainError(fmt::format("cyclic order has a repeated axis: {}", tuple));
      }
    }
  }
  std::array<int, 4> best = tuple;
  for (int reflect = 0; reflect < 2; ++reflect) {
    for (int k = 0; k < 4; ++k) {
      std::array<int, 4> cand{};
      for (int j = 0; j < 4; ++j) {
        const int src = reflect ? (k - j + 4) % 4 : (k + j) % 4;
        cand[static_cast<std::size_t>(j)] = tuple[static_cast<std::size_t>(src)];
      }
      best = std::min(best, cand);
    }
  }
  return {best};
}

LinearTripleOrder canonical_path(std::array<int, 3> tuple) {
  if (tuple[0] == tuple[1] || tuple[1] == tuple[2] || tuple[0] == tuple[2]) {
    throw DomainError(fmt::format("path order has a repeated axis: {}", tuple));
  }
  if (tuple[0] > tuple[2]) std::swap(tuple[0], tuple[2]);
  return {tuple};
}

bool is_correct_order(const Permutation& tau, std::span<const int> tuple) {
  const Permutation inv = tau.inverse();
  const int d = tau.size();
  std::vector<int> pos;
  for (int a : tuple) {
    if (a < 0 || a >= d) throw DomainError(fmt::format("axis {} out of range [0, {})", a, d));
    pos.push_back(inv(a));
  }
  auto monotone = [](const std::vector<int>& p) {
    return std::is_sorted(p.begin(), p.end(), std::less<>{}) ||
           std::is_sorted(p.begin(), p.end(), std::greater<>{});
  };
  if (tuple.size() == 3) return monotone(pos);
  if (tuple.size() != 4) throw DomainError(fmt::format("order check needs 3 or 4 axes, got {}", tuple.size()));
  for (int s = 0; s < 4; ++s) {
    std::rotate(pos.begin(), pos.begin() + 1, pos.end());
    if (monotone(pos)) return true;
  }
  return false;
}

void RecoveryConfig::validate() const {
  if (R < 1) throw DomainError(fmt::format("R = {} must be >= 1", R));
  if (voters < 1 || voters % 2 == 0) throw DomainError(fmt::format("voters = {} must be odd and >= 1", voters));
}

GroupingScores score_triple(const MatricizationTriple& triple, int k, RankMode mode) {
  GroupingScores out;
  for (std::size_t g = 0; g < 3; ++g) {
    const Eigen::MatrixXd& m = triple.m[g].matrix;
    out.spectra[g] = singular_values(m);
    out.score[g] = mode == RankMode::singular_value
                       ? out.spectra[g].sigma(k)
                       : static_cast<double>(numerical_rank(out.spectra[g], m.rows(), m.cols()));
  }
  return out;
}

namespace {

/// Index of the strictly largest score, if any.
std::optional<int> strict_winner(const std::array<double, 3>& s) {
  for (int g = 0; g < 3; ++g) {
    bool wins = true;
    for (int h = 0; h < 3; ++h) {
      if (h != g && !(s[static_cast<std::size_t>(g)] > s[static_cast<std::size_t>(h)])) wins = false;
    }
    if (wins) return g;
  }
  return std::nullopt;
}

template <typename Order, typename Decide, std::size_t N>
Order vote(EntryOracle& oracle, const std::array<int, N>& axes, const RecoveryConfig& cfg, std::uint64_t call_seed,
           Decide decide) {
  cfg.validate();
  // Class -> (count, first voter that reported it).
  std::map<std::array<int, N>, std::pair<int, int>> tally;
  std::vector<SingularSpectrum> first_spectra;
  for (int v = 0; v < cfg.voters; ++v) {
    const ProbeBlock block = sample_probe_block(oracle, axes, derive_seed(call_seed, {static_cast<std::uint64_t>(v)}));
    GroupingScores scores;
    const std::optional<Order> out = decide(block, cfg, &scores);
    if (v == 0) first_spectra.assign(scores.spectra.begin(), scores.spectra.end());
    if (!out) continue;
    auto [it, fresh] = tally.try_emplace(out->tuple, 0, v);
    ++it->second.first;
  }
  if (tally.empty()) {
    throw UndecidableError(fmt::format("no grouping of axes {} won strictly for any of {} voter(s)", axes, cfg.voters),
                           std::move(first_spectra));
  }
  auto best = tally.begin();
  for (auto it = tally.begin(); it != tally.end(); ++it) {
    const auto [count, first] = it->second;
    if (count > best->second.first || (count == best->second.first && first < best->second.second)) best = it;
  }
  return Order{best->first};
}

int power(int base, int e) {
  int out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace

std::optional<CyclicQuadOrder> decide_four(const ProbeBlock& block, const RecoveryConfig& cfg,
                                           GroupingScores* scores) {
  if (block.probes.size() != 4) throw DomainError("decide_four needs a block with 4 probes");
  const GroupingScores s = score_triple(reshape_tr_triple(block), power(cfg.R, 4), cfg.rank_mode);
  if (scores) *scores = s;
  const auto& p = block.probes;
  switch (strict_winner(s.score).value_or(-1)) {
    case 0: return canonical_cycle({p[0], p[2], p[1], p[3]});
    case 1: return canonical_cycle({p[0], p[1], p[2], p[3]});
    case 2: return canonical_cycle({p[0], p[1], p[3], p[2]});
    default: return std::nullopt;
  }
}

std::optional<LinearTripleOrder> decide_three(const ProbeBlock& block, const RecoveryConfig& cfg,
                                              GroupingScores* scores) {
  if (block.probes.size() != 3) throw DomainError("decide_three needs a block with 3 probes");
  const GroupingScores s = score_triple(reshape_tt_triple(block), power(cfg.R, 2), cfg.rank_mode);
  if (scores) *scores = s;
  const auto& p = block.probes;
  // The axis whose single-axis unfolding has the largest rank sits in the middle.
  switch (strict_winner(s.score).value_or(-1)) {
    case 0: return canonical_path({p[1], p[0], p[2]});
    case 1: return canonical_path({p[0], p[1], p[2]});
    case 2: return canonical_path({p[1], p[2], p[0]});
    default: return std::nullopt;
  }
}

CyclicQuadOrder order_four_tr(EntryOracle& oracle, std::array<int, 4> axes, const RecoveryConfig& cfg,
                              std::uint64_t call_seed) {
  return vote<CyclicQuadOrder>(oracle, axes, cfg, call_seed,
                               [](const ProbeBlock& b, const RecoveryConfig& c, GroupingScores* s) {
                                 return decide_four(b, c, s);
                               });
}

LinearTripleOrder order_three_tt(EntryOracle& oracle, std::array<int, 3> axes, const RecoveryConfig& cfg,
                                 std::uint64_t call_seed) {
  return vote<LinearTripleOrder>(oracle, axes, cfg, call_seed,
                                 [](const ProbeBlock& b, const RecoveryConfig& c, GroupingScores* s) {
                                   return decide_three(b, c, s);
                                 });
}

namespace {

/// Bookkeeping shared by both insertion loops.
class Recorder {
 public:
  Recorder(const RecoveryConfig& cfg, RecoveryTrace* trace) : cfg_(cfg), trace_(trace) {
    if (trace_) *trace_ = RecoveryTrace{};
  }

  std::uint64_t next_seed() { return derive_seed(cfg_.seed, {calls_++}); }

  template <std::size_t N>
  void record(const std::array<int, N>& tuple) {
    if (!trace_) return;
    ++trace_->order_calls;
    trace_->decisions.emplace_back(tuple.begin(), tuple.end());
  }

 private:
  const RecoveryConfig& cfg_;
  RecoveryTrace* trace_;
  std::uint64_t calls_ = 0;
};

// seq is 1-based in the search bounds below: seq[j - 1] holds i_j.
void insert_between(std::vector<int>& seq, int jmin, int jmax, int axis) {
  const int t = static_cast<int>(seq.size());
  // Inconsistent noisy answers can leave the bracket empty or inverted; fall
  // back to placing the axis right after i_jmin.
  jmin = std::clamp(jmin, 0, t);
  if (jmax <= jmin) jmax = jmin + 1;
  seq.insert(seq.begin() + jmin, axis);
}

[[noreturn]] void rethrow_annotated(const UndecidableError& e, int axis) {
  throw UndecidableError(fmt::format("while inserting axis {}: {}", axis, e.what()), e.spectra());
}

}  // namespace

Permutation recover_ring(EntryOracle& oracle, const RecoveryConfig& cfg, RecoveryTrace* trace) {
  cfg.validate();
  const int d = oracle.dims().size();
  if (d < 4) throw DomainError(fmt::format("loop recovery needs d >= 4, got {}", d));
  Recorder rec(cfg, trace);

  auto order4 = [&](std::array<int, 4> axes, int inserting) {
    try {
      const CyclicQuadOrder out = order_four_tr(oracle, axes, cfg, rec.next_seed());
      rec.record(out.tuple);
      return out;
    } catch (const UndecidableError& e) {
      rethrow_annotated(e, inserting);
    }
  };

  std::vector<int> seq;
  {
    const CyclicQuadOrder first = order4({0, 1, 2, 3}, 3);
    seq.assign(first.tuple.begin(), first.tuple.end());
  }
  for (int t = 4; t < d; ++t) {
    const int axis = t;
    auto at = [&](int j) { return seq[static_cast<std::size_t>(j - 1)]; };
    int jmin = 1;
    int jmax = t + 1;
    // Only a wrong answer in the wrap-around step can widen the bracket.
    for (int guard = 0; jmax - jmin >= 2 && guard < 4 * (t + 2); ++guard) {
      const int delta = jmax - jmin;
      int j1, j2, j3;
      if (delta >= 3) {
        j1 = jmin;
        j2 = jmin + delta / 3;
        j3 = jmin + 2 * delta / 3;
      } else if (jmax <= t) {
        j1 = jmin;
        j2 = jmin + 1;
        j3 = jmax;
      } else {
        j1 = 1;
        j2 = t - 1;
        j3 = t;
      }
      const CyclicQuadOrder out = order4({axis, at(j1), at(j2), at(j3)}, axis);
      if (out == canonical_cycle({at(j1), axis, at(j2), at(j3)})) {
        jmin = j1;
        jmax = j2;
      } else if (out == canonical_cycle({at(j1), at(j2), axis, at(j3)})) {
        jmin = j2;
        jmax = j3;
      } else {
        jmin = j3;
      }
    }
    insert_between(seq, jmin, jmax, axis);
  }
  return Permutation(seq);
}

Permutation recover_train(EntryOracle& oracle, const RecoveryConfig& cfg, RecoveryTrace* trace) {
  cfg.validate();
  const int d = oracle.dims().size();
  if (d < 3) throw DomainError(fmt::format("path recovery needs d >= 3, got {}", d));
  Recorder rec(cfg, trace);

  auto order3 = [&](std::array<int, 3> axes, int inserting) {
    try {
      const LinearTripleOrder out = order_three_tt(oracle, axes, cfg, rec.next_seed());
      rec.record(out.tuple);
      return out;
    } catch (const UndecidableError& e) {
      rethrow_annotated(e, inserting);
    }
  };

  std::vector<int> seq;
  {
    const LinearTripleOrder first = order3({0, 1, 2}, 2);
    seq.assign(first.tuple.begin(), first.tuple.end());
  }
  for (int t = 3; t < d; ++t) {
    const int axis = t;
    auto at = [&](int j) { return seq[static_cast<std::size_t>(j - 1)]; };
    int jmin = 0;
    int jmax = t + 1;
    while (jmax - jmin >= 2) {
      const int delta = jmax - jmin;
      int j1, j2;
      if (delta >= 3) {
        j1 = jmin + delta / 3;
        j2 = jmin + 2 * delta / 3;
      } else if (jmin >= 1) {
        j1 = jmin;
        j2 = jmin + 1;
      } else {
        j1 = 1;
        j2 = 2;
      }
      const LinearTripleOrder out = order3({axis, at(j1), at(j2)}, axis);
      if (out == canonical_path({axis, at(j1), at(j2)})) {
        jmax = j1;
      } else if (out == canonical_path({at(j1), axis, at(j2)})) {
        jmin = j1;
        jmax = j2;
      } else {
        jmin = j2;
      }
    }
    insert_between(seq, jmin, jmax, axis);
  }
  return Permutation(seq);
}

// ---------------------------------------------------------------------------

int unfolding_rank(const DenseTensor& tensor, std::span<const int> row_axes, RankTolerance tol) {
  const int d = tensor.dims.size();
  std::vector<char> is_row(static_cast<std::size_t>(d), 0);
  for (int a : row_axes) {
    if (a < 0 || a >= d || is_row[static_cast<std::size_t>(a)]) {
      throw DomainError(fmt::format("invalid unfolding row axes {}", std::vector<int>(row_axes.begin(), row_axes.end())));
    }
    is_row[static_cast<std::size_t>(a)] = 1;
  }
  // Row index flattens row_axes in the given order; columns use the rest ascending.
  std::vector<std::int64_t> stride(static_cast<std::size_t>(d), 0);
  std::int64_t rows = 1;
  for (auto it = row_axes.rbegin(); it != row_axes.rend(); ++it) {
    stride[static_cast<std::size_t>(*it)] = rows;
    rows *= tensor.dims[*it];
  }
  std::int64_t cols = 1;
  for (int a = d - 1; a >= 0; --a) {
    if (is_row[static_cast<std::size_t>(a)]) continue;
    stride[static_cast<std::size_t>(a)] = cols;
    cols *= tensor.dims[a];
  }
  Eigen::MatrixXd m(rows, cols);
  std::vector<int> x(static_cast<std::size_t>(d), 0);
  for (double v : tensor.values) {
    std::int64_t r = 0, c = 0;
    for (int a = 0; a < d; ++a) {
      (is_row[static_cast<std::size_t>(a)] ? r : c) += stride[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    }
    m(r, c) = v;
    for (int a = d - 1; a >= 0; --a) {
      if (++x[static_cast<std::size_t>(a)] < tensor.dims[a]) break;
      x[static_cast<std::size_t>(a)] = 0;
    }
  }
  return numerical_rank(m, tol);
}

Permutation baseline_tt(const DenseTensor& tensor, RankTolerance tol) {
  const int d = tensor.dims.size();
  std::vector<int> chain;
  std::vector<char> used(static_cast<std::size_t>(d), 0);
  while (static_cast<int>(chain.size()) < d) {
    int best_axis = -1;
    int best_rank = 0;
    for (int a = 0; a < d; ++a) {
      if (used[static_cast<std::size_t>(a)]) continue;
      std::vector<int> rows = chain;
      rows.push_back(a);
      const int rank = static_cast<int>(chain.size()) + 1 == d ? 0 : unfolding_rank(tensor, rows, tol);
      if (best_axis < 0 || rank < best_rank) {
        best_axis = a;
        best_rank = rank;
      }
    }
    chain.push_back(best_axis);
    used[static_cast<std::size_t>(best_axis)] = 1;
  }
  return Permutation(chain);
}

Permutation baseline_tt(EntryOracle& oracle, RankTolerance tol, std::int64_t cap) {
  const PhysicalDims& dims = oracle.dims();
  const std::int64_t total = dims.total();
  if (total > cap) {
    throw ResourceError(fmt::format("baseline needs all {} entries, cap is {}", total, cap));
  }
  DenseTensor tensor{dims, {}};
  tensor.values.reserve(static_cast<std::size_t>(total));
  const int d = dims.size();
  std::vector<int> x(static_cast<std::size_t>(d), 0);
  for (std::int64_t k = 0; k < total; ++k) {
    tensor.values.push_back(oracle.query(x));
    for (int a = d - 1; a >= 0; --a) {
      if (++x[static_cast<std::size_t>(a)] < dims[a]) break;
      x[static_cast<std::size_t>(a)] = 0;
    }
  }
  return baseline_tt(tensor, tol);
}

}  // namespace tnperm
