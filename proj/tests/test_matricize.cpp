#include <random>

#include <gtest/gtest.h>

#include "tnperm/errors.hpp"
#include "tnperm/linalg.hpp"
#include "tnperm/matricize.hpp"

namespace tnperm {
namespace {

CoreStack ring_stack(int d, int n, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Permutation tau = Permutation::random(d, rng);
  return sample_cores(PhysicalDims::uniform(d, n), BondDims::uniform(d, r), tau, Mode::ring, Profile::full_rank,
                      rng());
}

TEST(ProbeBlock, WholeTensorWhenAllAxesProbed) {
  const CoreStack stack = ring_stack(4, 3, 2, 1);
  auto oracle = make_exact_oracle(stack);
  const ProbeBlock block = sample_probe_block(*oracle, std::vector<int>{2, 0, 3, 1}, 5);
  EXPECT_EQ(block.axes, (std::vector<int>{0, 1, 2, 3}));
  const DenseTensor full = full_contract(stack);
  ASSERT_EQ(block.values.size(), full.values.size());
  for (std::size_t i = 0; i < full.values.size(); ++i) EXPECT_NEAR(block.values[i], full.values[i], 1e-12);
}

TEST(ProbeBlock, QueryCountAndBackground) {
  auto oracle = make_exact_oracle(ring_stack(8, 4, 3, 2));
  const ProbeBlock block = sample_probe_block(*oracle, std::vector<int>{5, 1, 6, 3}, 11);
  EXPECT_EQ(oracle->stats().count, 256u);
  for (int a = 0; a < 8; ++a) {
    const bool probe = a == 1 || a == 3 || a == 5 || a == 6;
    EXPECT_EQ(block.background[static_cast<std::size_t>(a)] < 0, probe);
  }
}

TEST(ProbeBlock, DifferentBackgroundsDiffer) {
  auto oracle = make_exact_oracle(ring_stack(6, 4, 3, 3));
  const ProbeBlock a = sample_probe_block(*oracle, std::vector<int>{0, 1, 2, 3}, 1);
  const ProbeBlock b = sample_probe_block(*oracle, std::vector<int>{0, 1, 2, 3}, 2);
  EXPECT_NE(a.values, b.values);
}

TEST(ProbeBlock, RejectsDuplicatesAndBadAxes) {
  auto oracle = make_exact_oracle(ring_stack(6, 4, 3, 3));
  EXPECT_THROW(sample_probe_block(*oracle, std::vector<int>{0, 1, 1}, 1), DomainError);
  EXPECT_THROW(sample_probe_block(*oracle, std::vector<int>{0, 1, 6}, 1), DomainError);
}

TEST(Reshape, ConstantBlockIsRankOne) {
  ProbeBlock block;
  block.probes = {0, 1, 2, 3};
  block.axes = {0, 1, 2, 3};
  block.shape = {2, 3, 2, 3};
  block.background = {-1, -1, -1, -1};
  block.values.assign(36, 1.0);
  for (const auto& m : reshape_tr_triple(block).m) {
    EXPECT_EQ(m.matrix, Eigen::MatrixXd::Ones(m.matrix.rows(), m.matrix.cols()));
    EXPECT_EQ(numerical_rank(m.matrix), 1);
  }
}

TEST(Reshape, TripleSharesEntriesAndRoundTrips) {
  auto oracle = make_exact_oracle(ring_stack(6, 3, 2, 4));
  for (const auto& probes : {std::vector<int>{4, 1, 5, 0}, std::vector<int>{2, 5, 3}}) {
    const ProbeBlock block = sample_probe_block(*oracle, probes, 3);
    const MatricizationTriple t = probes.size() == 4 ? reshape_tr_triple(block) : reshape_tt_triple(block);
    const double norm = t.m[0].matrix.norm();
    for (const auto& m : t.m) {
      EXPECT_NEAR(m.matrix.norm(), norm, 1e-12 * norm);
      EXPECT_EQ(restore_block(m, block), block.values);
    }
  }
}

TEST(Reshape, TrainIndexMap) {
  auto oracle = make_exact_oracle(ring_stack(5, 4, 2, 6));
  const std::vector<int> probes{3, 0, 4};
  const ProbeBlock block = sample_probe_block(*oracle, probes, 3);
  const MatricizationTriple t = reshape_tt_triple(block);
  EXPECT_EQ(t.m[0].row_axes, (std::vector<int>{3}));
  EXPECT_EQ(t.m[1].row_axes, (std::vector<int>{0}));
  EXPECT_EQ(t.m[2].row_axes, (std::vector<int>{4}));
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    // local index aligned with block.axes = {0, 3, 4}
    const std::vector<int> local{static_cast<int>(rng() % 4), static_cast<int>(rng() % 4),
                                 static_cast<int>(rng() % 4)};
    const auto [r0, c0] = t.m[0].locate(block, local);
    const auto [r1, c1] = t.m[1].locate(block, local);
    EXPECT_EQ(t.m[0].matrix(r0, c0), t.m[1].matrix(r1, c1));
    EXPECT_EQ(t.m[0].matrix(r0, c0), block.at(local));
  }
}

TEST(Reshape, RankOneBlockStaysRankOne) {
  ProbeBlock block;
  block.probes = {0, 1, 2};
  block.axes = {0, 1, 2};
  block.shape = {3, 4, 2};
  block.background = {-1, -1, -1};
  const std::vector<double> a{1, 2, 3}, b{1, -1, 2, 5}, c{3, 7};
  for (double x : a) {
    for (double y : b) {
      for (double z : c) block.values.push_back(x * y * z);
    }
  }
  for (const auto& m : reshape_tt_triple(block).m) EXPECT_EQ(numerical_rank(m.matrix), 1);
}

TEST(Reshape, WrongProbeCount) {
  ProbeBlock block;
  block.probes = {0, 1, 2};
  block.axes = {0, 1, 2};
  block.shape = {2, 2, 2};
  block.background = {-1, -1, -1};
  block.values.assign(8, 0.0);
  EXPECT_THROW(reshape_tr_triple(block), DomainError);
}

}  // namespace
}  // namespace tnperm
