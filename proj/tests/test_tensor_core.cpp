#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tnperm/errors.hpp"
#include "tnperm/linalg.hpp"
#include "tnperm/matricize.hpp"
#include "tnperm/oracle.hpp"
#include "tnperm/serialize.hpp"
#include "tnperm/tensor_core.hpp"

namespace tnperm {
namespace {

std::vector<int> random_index(const PhysicalDims& dims, std::mt19937_64& rng) {
  std::vector<int> x;
  for (int i = 0; i < dims.size(); ++i) x.push_back(std::uniform_int_distribution<int>(0, dims[i] - 1)(rng));
  return x;
}

CoreStack random_ring(int d, int n, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Permutation tau = Permutation::random(d, rng);
  return sample_cores(PhysicalDims::uniform(d, n), BondDims::uniform(d, r), tau, Mode::ring, Profile::full_rank,
                      rng());
}

TEST(Permutation, RejectsNonBijection) {
  EXPECT_THROW(Permutation({0, 0, 1}), DomainError);
  EXPECT_THROW(Permutation({0, 3, 1}), DomainError);
}

TEST(Permutation, ComposeAndInverse) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Permutation p = Permutation::random(7, rng);
    EXPECT_EQ(p.compose(p.inverse()), Permutation::identity(7));
    EXPECT_EQ(p.inverse().compose(p), Permutation::identity(7));
  }
  const Permutation rot = Permutation::rotation(4, 1);
  EXPECT_EQ(rot.images(), (std::vector<int>{1, 2, 3, 0}));
  EXPECT_EQ(Permutation::reflection(4).images(), (std::vector<int>{3, 2, 1, 0}));
}

TEST(EvaluateEntry, ScalarCoresMultiply) {
  std::vector<Core> cores;
  const std::vector<std::vector<double>> a{{2.0, 3.0}, {5.0, 7.0}, {11.0, 13.0}};
  for (const auto& v : a) {
    Core c(1, 2, 1);
    c.at(0, 0, 0) = v[0];
    c.at(0, 1, 0) = v[1];
    cores.push_back(c);
  }
  const CoreStack stack(cores, Permutation::identity(3), Mode::ring);
  EXPECT_DOUBLE_EQ(evaluate_entry(stack, std::vector<int>{0, 1, 1}), 2.0 * 7.0 * 13.0);
  const DenseTensor full = full_contract(stack);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        EXPECT_DOUBLE_EQ(full.at(std::vector<int>{i, j, k}), a[0][i] * a[1][j] * a[2][k]);
      }
    }
  }
}

TEST(EvaluateEntry, IdentitySlicesGiveTrace) {
  std::vector<Core> cores;
  for (int i = 0; i < 4; ++i) {
    Core c(2, 3, 2);
    for (int x = 0; x < 3; ++x) c.slice(x) = Eigen::MatrixXd::Identity(2, 2);
    cores.push_back(c);
  }
  const CoreStack stack(cores, Permutation({2, 0, 3, 1}), Mode::ring);
  const DenseTensor full = full_contract(stack);
  for (double v : full.values) EXPECT_EQ(v, 2.0);
}

TEST(EvaluateEntry, MatchesBruteForceSummation) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CoreStack stack = random_ring(5, 3, 2, seed);
    std::mt19937_64 rng(seed + 100);
    for (int k = 0; k < 10; ++k) {
      const auto x = random_index(stack.dims(), rng);
      EXPECT_NEAR(evaluate_entry(stack, x), testing::brute_force_entry(stack, x), 1e-12);
    }
  }
}

TEST(EvaluateEntry, RangeErrorsNameTheAxis) {
  const CoreStack stack = random_ring(4, 3, 2, 1);
  try {
    evaluate_entry(stack, std::vector<int>{0, 0, 3, 0});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("axis 2"), std::string::npos);
  }
  EXPECT_THROW(evaluate_entry(stack, std::vector<int>{0, 0, 0}), DomainError);
}

TEST(FullContract, AgreesWithEvaluateEntry) {
  const CoreStack stack = random_ring(5, 3, 3, 0);
  const DenseTensor full = full_contract(stack);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    const auto x = random_index(stack.dims(), rng);
    EXPECT_NEAR(full.at(x), evaluate_entry(stack, x), 1e-12);
  }
}

TEST(FullContract, CapIsEnforced) {
  const CoreStack stack = random_ring(6, 4, 2, 0);
  EXPECT_THROW(full_contract(stack, 1000), ResourceError);
}

TEST(TransformRepresentation, IdentityTransform) {
  const CoreStack stack = random_ring(5, 3, 2, 4);
  EXPECT_EQ(transform_representation(stack, 0, false), stack);
}

TEST(TransformRepresentation, RingTensorUnchanged) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const CoreStack stack = random_ring(5, 3, 3, seed);
    const DenseTensor before = full_contract(stack);
    for (int k = 0; k < 5; ++k) {
      for (bool reflect : {false, true}) {
        const CoreStack moved = transform_representation(stack, k, reflect);
        EXPECT_TRUE(same_class(moved.perm(), stack.perm(), Mode::ring));
        const DenseTensor after = full_contract(moved);
        for (std::size_t i = 0; i < before.values.size(); ++i) {
          EXPECT_NEAR(after.values[i], before.values[i], 1e-12 * std::max(1.0, std::abs(before.values[i])));
        }
      }
    }
  }
}

TEST(TransformRepresentation, TrainReflection) {
  std::mt19937_64 rng(5);
  const Permutation tau = Permutation::random(5, rng);
  const CoreStack stack =
      sample_cores(PhysicalDims::uniform(5, 3), BondDims::train(5, 2), tau, Mode::train, Profile::full_rank, 11);
  const CoreStack flipped = transform_representation(stack, 0, true);
  EXPECT_EQ(flipped.perm(), tau.compose(Permutation::reflection(5)));
  const DenseTensor a = full_contract(stack);
  const DenseTensor b = full_contract(flipped);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-12);
  EXPECT_THROW(transform_representation(stack, 1, false), UnsupportedTransformError);
}

TEST(SameClass, RingExamples) {
  const Permutation id = Permutation::identity(4);
  EXPECT_TRUE(same_class(id, id, Mode::ring));
  EXPECT_TRUE(same_class(id, Permutation({1, 2, 3, 0}), Mode::ring));
  EXPECT_TRUE(same_class(id, Permutation({3, 2, 1, 0}), Mode::ring));
  EXPECT_FALSE(same_class(id, Permutation({0, 2, 1, 3}), Mode::ring));
  EXPECT_THROW(same_class(id, Permutation::identity(5), Mode::ring), DomainError);
}

TEST(SameClass, TrainExamples) {
  const Permutation id = Permutation::identity(4);
  EXPECT_TRUE(same_class(id, Permutation({3, 2, 1, 0}), Mode::train));
  EXPECT_FALSE(same_class(id, Permutation({1, 2, 3, 0}), Mode::train));
}

TEST(SameClass, ClassSizesMatchEnumeration) {
  std::mt19937_64 rng(8);
  for (int d = 3; d <= 7; ++d) {
    const Permutation tau = Permutation::random(d, rng);
    const auto ring = class_members(tau, Mode::ring);
    const auto train = class_members(tau, Mode::train);
    EXPECT_EQ(static_cast<int>(ring.size()), d == 3 ? 6 : 2 * d);
    EXPECT_EQ(train.size(), 2u);
    // Exactly the ring members are accepted, checked over all d! permutations.
    if (d <= 6) {
      std::vector<int> p(static_cast<std::size_t>(d));
      std::iota(p.begin(), p.end(), 0);
      int accepted = 0;
      do {
        accepted += same_class(Permutation(p), tau, Mode::ring) ? 1 : 0;
      } while (std::next_permutation(p.begin(), p.end()));
      EXPECT_EQ(accepted, static_cast<int>(ring.size()));
    }
  }
}

TEST(SampleCores, DeterministicAndShaped) {
  const Permutation tau = Permutation::identity(8);
  const auto dims = PhysicalDims::uniform(8, 4);
  const auto bonds = BondDims::uniform(8, 3);
  const CoreStack a = sample_cores(dims, bonds, tau, Mode::ring, Profile::full_rank, 42);
  const CoreStack b = sample_cores(dims, bonds, tau, Mode::ring, Profile::full_rank, 42);
  EXPECT_EQ(a, b);
  for (const Core& c : a.cores()) {
    EXPECT_EQ(c.left(), 3);
    EXPECT_EQ(c.phys(), 4);
    EXPECT_EQ(c.right(), 3);
  }
}

TEST(SampleCores, NearDeficientVariance) {
  const auto dims = PhysicalDims::uniform(8, 4);
  const auto bonds = BondDims::uniform(8, 3);
  double sum = 0.0, sum2 = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; count < 10000; ++seed) {
    const CoreStack s =
        sample_cores(dims, bonds, Permutation::identity(8), Mode::ring, Profile::near_deficient, seed);
    for (const Core& c : s.cores()) {
      for (int a = 0; a < 3; ++a) {
        for (int x = 0; x < 4; ++x) {
          for (int b = 0; b < 3; ++b) {
            if (a != 2 && b != 2) continue;
            sum += c.at(a, x, b);
            sum2 += c.at(a, x, b) * c.at(a, x, b);
            ++count;
          }
        }
      }
    }
  }
  const double var = sum2 / count - (sum / count) * (sum / count);
  EXPECT_GT(var, 0.005);
  EXPECT_LT(var, 0.015);
}

Matricization interleaved(const CoreStack& stack, const std::vector<int>& probes_in_order) {
  auto oracle = make_exact_oracle(stack);
  const ProbeBlock block = sample_probe_block(*oracle, probes_in_order, 0);
  return reshape_tr_triple(block).m[1];
}

TEST(WitnessCores, RingInterleavedRankIsProductOfArcRanks) {
  const int d = 8;
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Permutation tau = Permutation::random(d, rng);
    const std::vector<int> pos{0, 2, 5, 6};
    const std::vector<int> ranks{2, 2, 2, 2};
    const CoreStack w =
        witness_cores(Mode::ring, PhysicalDims::uniform(d, 4), BondDims::uniform(d, 3), tau, pos, ranks);
    std::vector<int> probes;
    for (int j : pos) probes.push_back(tau(j));
    auto oracle = make_exact_oracle(w);
    const ProbeBlock block = sample_probe_block(*oracle, probes, 7);
    const MatricizationTriple t = reshape_tr_triple(block);
    EXPECT_LE(numerical_rank(t.m[0].matrix), 4);
    EXPECT_EQ(numerical_rank(t.m[1].matrix), 16);
    EXPECT_LE(numerical_rank(t.m[2].matrix), 4);
    // Every nonzero singular value of the 0/1 interleaved matrix is 1.
    const auto ref = testing::reference_singular_values(t.m[1].matrix);
    EXPECT_NEAR(ref[15], 1.0, 1e-10);
    EXPECT_NEAR(sigma_k(t.m[1].matrix, 16), 1.0, 1e-12);
    EXPECT_EQ(sigma_k(t.m[1].matrix, 17), 0.0);
  }
}

TEST(WitnessCores, TrainMiddleRankIsProduct) {
  const int d = 6;
  const Permutation tau({3, 0, 5, 1, 4, 2});
  const std::vector<int> pos{1, 3, 4};
  const std::vector<int> ranks{2, 2};
  const CoreStack w =
      witness_cores(Mode::train, PhysicalDims::uniform(d, 4), BondDims::train(d, 3), tau, pos, ranks);
  auto oracle = make_exact_oracle(w);
  const ProbeBlock block = sample_probe_block(*oracle, std::vector<int>{tau(1), tau(3), tau(4)}, 3);
  const MatricizationTriple t = reshape_tt_triple(block);
  EXPECT_LE(numerical_rank(t.m[0].matrix), 2);
  EXPECT_EQ(numerical_rank(t.m[1].matrix), 4);
  EXPECT_LE(numerical_rank(t.m[2].matrix), 2);
}

TEST(WitnessCores, UnitRanksGiveRankOne) {
  const int d = 5;
  const std::vector<int> pos{0, 1, 2, 4};
  const std::vector<int> ranks{1, 1, 1, 1};
  const CoreStack w = witness_cores(Mode::ring, PhysicalDims::uniform(d, 2), BondDims::uniform(d, 2),
                                    Permutation::identity(d), pos, ranks);
  const auto triple = reshape_tr_triple(sample_probe_block(*make_exact_oracle(w), std::vector<int>{0, 1, 2, 4}, 0));
  for (const auto& m : triple.m) EXPECT_LE(numerical_rank(m.matrix), 1);
}

TEST(WitnessCores, RejectsViolatedHypotheses) {
  const int d = 6;
  const std::vector<int> pos{0, 1, 3, 4};
  const std::vector<int> too_big{3, 2, 2, 2};
  EXPECT_THROW(witness_cores(Mode::ring, PhysicalDims::uniform(d, 4), BondDims::uniform(d, 2),
                             Permutation::identity(d), pos, too_big),
               DomainError);
  const std::vector<int> unsorted{0, 3, 1, 4};
  const std::vector<int> ok{2, 2, 2, 2};
  EXPECT_THROW(witness_cores(Mode::ring, PhysicalDims::uniform(d, 4), BondDims::uniform(d, 3),
                             Permutation::identity(d), unsorted, ok),
               DomainError);
}

TEST(CheckAssumptions, PassAndFail) {
  const auto dims = PhysicalDims::uniform(8, 4);
  const auto bonds = BondDims::uniform(8, 3);
  const auto id = Permutation::identity(8);
  const AssumptionReport ok = check_assumptions(dims, bonds, 2, Mode::ring, id);
  EXPECT_TRUE(ok.all_pass());
  EXPECT_NE(ok.to_string().find("all pass"), std::string::npos);
  EXPECT_FALSE(check_assumptions(dims, bonds, 3, Mode::ring, id).all_pass());
}

TEST(CheckAssumptions, TrainEndpointsOnlyNeedR) {
  std::vector<int> n(8, 4);
  const Permutation tau({5, 0, 1, 2, 3, 4, 6, 7});
  n[5] = 2;  // tau(0): an endpoint
  const auto bonds = BondDims::train(8, 3);
  EXPECT_TRUE(check_assumptions(PhysicalDims(n), bonds, 2, Mode::train, tau).all_pass());
  n[5] = 4;
  n[0] = 2;  // tau(1): interior
  EXPECT_FALSE(check_assumptions(PhysicalDims(n), bonds, 2, Mode::train, tau).all_pass());
}

TEST(Uniqueness, InterleavedRankSeparatesInequivalentOrders) {
  // For tensors built on tau, a quadruple ordered differently by some other
  // permutation has its tau-interleaved grouping strictly above every other.
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const int d = 5;
    const Permutation tau = Permutation::random(d, rng);
    const CoreStack stack = sample_cores(PhysicalDims::uniform(d, 4), BondDims::uniform(d, 3), tau, Mode::ring,
                                         Profile::full_rank, rng());
    auto oracle = make_exact_oracle(stack);
    for (const auto& q : testing::subsets(d, 4)) {
      // Probes listed in tau's loop order.
      std::vector<int> probes = q;
      std::sort(probes.begin(), probes.end(), [&](int a, int b) { return tau.inverse()(a) < tau.inverse()(b); });
      const auto triple = reshape_tr_triple(sample_probe_block(*oracle, probes, seed));
      const int inter = numerical_rank(triple.m[1].matrix);
      const int other = std::max(numerical_rank(triple.m[0].matrix), numerical_rank(triple.m[2].matrix));
      EXPECT_GE(inter, 16);
      EXPECT_LE(other, 9);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 100);
}

TEST(Serialize, CoreStackRoundTrip) {
  const CoreStack stack = random_ring(5, 3, 2, 12);
  const CoreStack back = core_stack_from_json(to_json(stack));
  EXPECT_EQ(back, stack);
  auto j = to_json(stack);
  j.erase("perm");
  EXPECT_THROW(core_stack_from_json(j), DomainError);
  j = to_json(stack);
  j["dims"][0] = 7;
  EXPECT_THROW(core_stack_from_json(j), DomainError);
}

}  // namespace
}  // namespace tnperm
