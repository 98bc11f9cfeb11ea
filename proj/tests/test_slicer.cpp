// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "support/testgen.hpp"

namespace hlosim {
namespace {

WorkloadGraph graph_of(const std::string& src) { return build_graph(parse_module(src)); }

SliceRef R(int i) { return {SliceKind::kRegion, i}; }
SliceRef C(int i) { return {SliceKind::kComm, i}; }

const char* kChain =
    "func.func @main(%x: tensor<8xf32>) {\n"
    "  %c1 = stablehlo.tanh %x : tensor<8xf32>\n"
    "  %m1 = \"stablehlo.all_reduce\"(%c1) : (tensor<8xf32>) -> tensor<8xf32>\n"
    "  %c2 = stablehlo.tanh %m1 : tensor<8xf32>\n"
    "  %m2 = \"stablehlo.all_reduce\"(%c2) : (tensor<8xf32>) -> tensor<8xf32>\n"
    "  %c3 = stablehlo.tanh %m2 : tensor<8xf32>\n"
    "  func.return\n}\n";

const char* kTwoChains =
    "func.func @main(%x: tensor<8x8xf32>, %y: tensor<8x8xf32>) {\n"
    "  %a = \"stablehlo.dot_general\"(%x, %x) {lhs_contracting_dimensions = [1], rhs_contracting_dimensions = [0]}"
    " : (tensor<8x8xf32>, tensor<8x8xf32>) -> tensor<8x8xf32>\n"
    "  %b = \"stablehlo.dot_general\"(%y, %y) {lhs_contracting_dimensions = [1], rhs_contracting_dimensions = [0]}"
    " : (tensor<8x8xf32>, tensor<8x8xf32>) -> tensor<8x8xf32>\n"
    "  %ga = \"stablehlo.all_gather\"(%a) {all_gather_dim = 0 : i64} : (tensor<8x8xf32>) -> tensor<32x8xf32>\n"
    "  %gb = \"stablehlo.all_gather\"(%b) {all_gather_dim = 0 : i64} : (tensor<8x8xf32>) -> tensor<32x8xf32>\n"
    "  func.return\n}\n";

TEST(LinearSplit, Fragment) {
  const WorkloadGraph g = build_graph(parse_module(testing::fixture_text("workloads/dot_transpose_allreduce.mlir")));
  const SlicedWorkload s = linear_split(g);
  ASSERT_EQ(s.regions.size(), 1u);
  EXPECT_EQ(s.regions[0].member_ops, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.comm_nodes, std::vector<int>{2});
  EXPECT_EQ(s.deps, (std::vector<SliceEdge>{{R(0), C(0)}}));
  EXPECT_FALSE(validate_slicing(s, g));
}

TEST(LinearSplit, NoCollectivesGivesOneRegion) {
  const WorkloadGraph g = graph_of(
      "func.func @main(%x: tensor<4xf32>) {\n %a = stablehlo.abs %x : tensor<4xf32>\n"
      " %b = stablehlo.tanh %x : tensor<4xf32>\n %c = stablehlo.add %a, %b : tensor<4xf32>\n func.return }");
  const SlicedWorkload s = linear_split(g);
  ASSERT_EQ(s.regions.size(), 1u);
  EXPECT_EQ(s.regions[0].member_ops.size(), 3u);
  EXPECT_TRUE(s.comm_nodes.empty());
}

TEST(LinearSplit, AlternatingChain) {
  const WorkloadGraph g = graph_of(kChain);
  const SlicedWorkload s = linear_split(g);
  EXPECT_EQ(s.regions.size(), 3u);
  EXPECT_EQ(s.comm_nodes.size(), 2u);
  EXPECT_EQ(s.deps, (std::vector<SliceEdge>{{R(0), C(0)}, {R(1), C(1)}, {C(0), R(1)}, {C(1), R(2)}}));
  EXPECT_TRUE(is_alternating(s));
}

TEST(LinearSplit, PositionBasedGroupingJoinsIndependentBranches) {
  const WorkloadGraph g = graph_of(kTwoChains);
  const SlicedWorkload s = linear_split(g);
  ASSERT_EQ(s.regions.size(), 1u);
  EXPECT_EQ(s.regions[0].member_ops, (std::vector<int>{0, 1}));
}

TEST(DependencySplit, FragmentIsAChain) {
  const WorkloadGraph g = build_graph(parse_module(testing::fixture_text("workloads/dot_transpose_allreduce.mlir")));
  const SlicedWorkload s = dependency_aware_split(g);
  EXPECT_EQ(s.regions.size(), 2u);
  EXPECT_EQ(s.comm_nodes.size(), 1u);
  EXPECT_EQ(s.deps, (std::vector<SliceEdge>{{R(0), R(1)}, {R(1), C(0)}}));
}

TEST(DependencySplit, SingleOp) {
  const SlicedWorkload s =
      dependency_aware_split(graph_of("func.func @main(%x: tensor<4xf32>) {\n %a = stablehlo.abs %x : tensor<4xf32>\n func.return }"));
  EXPECT_EQ(s.regions.size(), 1u);
  EXPECT_TRUE(s.comm_nodes.empty());
  EXPECT_TRUE(s.deps.empty());
}

TEST(DependencySplit, IndependentChainsHaveNoCrossEdges) {
  const WorkloadGraph g = graph_of(kTwoChains);
  const SlicedWorkload s = dependency_aware_split(g);
  EXPECT_EQ(s.regions.size(), 2u);
  EXPECT_EQ(s.comm_nodes.size(), 2u);
  EXPECT_EQ(s.deps, (std::vector<SliceEdge>{{R(0), C(0)}, {R(1), C(1)}}));
}

TEST(Slicing, MetaNodesAreBoundaryInputsAndDoNotSplit) {
  const WorkloadGraph g = graph_of(
      "func.func @main(%x: tensor<4xf32>) {\n"
      "  %a = stablehlo.abs %x : tensor<4xf32>\n"
      "  %k = stablehlo.constant dense<2.0> : tensor<4xf32>\n"
      "  %b = stablehlo.multiply %a, %k : tensor<4xf32>\n"
      "  func.return\n}\n");
  const SlicedWorkload s = linear_split(g);
  ASSERT_EQ(s.regions.size(), 1u);
  EXPECT_EQ(s.regions[0].member_ops, (std::vector<int>{0, 2}));
  // %x and the constant.
  EXPECT_EQ(s.regions[0].boundary_inputs.size(), 2u);
  EXPECT_TRUE(s.regions[0].boundary_outputs.empty());
}

TEST(Slicing, DepsProjectThroughMeta) {
  // A Meta op between two compute ops must not drop their dependency.
  const WorkloadGraph g = graph_of(
      "func.func @main(%x: tensor<4xf32>) {\n"
      "  %a = stablehlo.abs %x : tensor<4xf32>\n"
      "  %k = \"stablehlo.iota\"(%a) {iota_dimension = 0 : i64} : (tensor<4xf32>) -> tensor<4xf32>\n"
      "  %b = stablehlo.tanh %k : tensor<4xf32>\n"
      "  func.return\n}\n");
  const SlicedWorkload s = dependency_aware_split(g);
  EXPECT_EQ(s.deps, (std::vector<SliceEdge>{{R(0), R(1)}}));
  EXPECT_FALSE(validate_slicing(s, g));
}

TEST(Slicing, CanonicalKeyIgnoresNamesAndIds) {
  const std::string a =
      "func.func @main(%x: tensor<4x8xf32>, %w: tensor<8x8xf32>) {\n"
      "  %0 = \"stablehlo.dot_general\"(%x, %w) {lhs_contracting_dimensions = [1], rhs_contracting_dimensions = [0]}"
      " : (tensor<4x8xf32>, tensor<8x8xf32>) -> tensor<4x8xf32>\n"
      "  %1 = stablehlo.tanh %0 : tensor<4x8xf32>\n"
      "  %2 = \"stablehlo.all_reduce\"(%1) : (tensor<4x8xf32>) -> tensor<4x8xf32>\n"
      "  %3 = \"stablehlo.dot_general\"(%2, %w) {lhs_contracting_dimensions = [1], rhs_contracting_dimensions = [0]}"
      " : (tensor<4x8xf32>, tensor<8x8xf32>) -> tensor<4x8xf32>\n"
      "  %4 = stablehlo.tanh %3 : tensor<4x8xf32>\n"
      "  func.return\n}\n";
  std::string b = a;
  for (const auto& [from, to] : std::vector<std::pair<std::string, std::string>>{
           {"%0", "%h"}, {"%1", "%t"}, {"%3", "%h2"}, {"%4", "%t2"}, {"%x", "%input"}}) {
    for (std::size_t p = 0; (p = b.find(from, p)) != std::string::npos; p += to.size()) b.replace(p, from.size(), to);
  }
  const SlicedWorkload sa = linear_split(graph_of(a));
  const SlicedWorkload sb = linear_split(graph_of(b));
  ASSERT_EQ(sa.regions.size(), 2u);
  EXPECT_EQ(sa.regions[0].canonical_key, sb.regions[0].canonical_key);
  EXPECT_EQ(sa.regions[1].canonical_key, sb.regions[1].canonical_key);
  EXPECT_EQ(sa.regions[0].canonical_key.size(), 16u);
  // Different shapes give different keys.
  std::string c = a;
  for (std::size_t p = 0; (p = c.find("4x8xf32", p)) != std::string::npos;) c.replace(p, 7, "4x8xf16");
  EXPECT_NE(linear_split(graph_of(c)).regions[0].canonical_key, sa.regions[0].canonical_key);
}

TEST(Slicing, IdenticalBlocksShareKeys) {
  BlocksWorkload w;
  w.layers = 6;
  w.batch = 4;
  w.hidden = 8;
  const SlicedWorkload s = dependency_aware_split(build_graph(parse_module(generate_blocks(w))));
  std::set<std::string> keys;
  for (const ComputeRegion& r : s.regions) keys.insert(r.canonical_key);
  EXPECT_EQ(s.regions.size(), 18u);
  EXPECT_LE(keys.size(), 4u);
}

TEST(Slicing, FnvDigestKnownValues) {
  EXPECT_EQ(hex_digest(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex_digest(fnv1a64("a")), "af63dc4c8601ec8c");
}

TEST(Validate, MutationsAreReported) {
  const WorkloadGraph g = graph_of(kChain);
  const SlicedWorkload good = linear_split(g);
  ASSERT_FALSE(validate_slicing(good, g));

  SlicedWorkload dup = good;
  dup.regions[1].member_ops.push_back(0);
  EXPECT_NE(validate_slicing(dup, g).value_or("").find("duplicate membership"), std::string::npos);

  SlicedWorkload lost = good;
  lost.deps.erase(lost.deps.begin());
  EXPECT_NE(validate_slicing(lost, g).value_or("").find("dependency lost"), std::string::npos);

  SlicedWorkload missing = good;
  missing.regions.pop_back();
  EXPECT_NE(validate_slicing(missing, g).value_or("").find("missing membership"), std::string::npos);

  SlicedWorkload impure = good;
  impure.regions[0].member_ops.push_back(1);
  impure.comm_nodes.erase(impure.comm_nodes.begin());
  impure.deps.clear();
  EXPECT_NE(validate_slicing(impure, g).value_or("").find("class impurity"), std::string::npos);

  SlicedWorkload cyclic = good;
  cyclic.deps.push_back({C(1), R(0)});
  EXPECT_NE(validate_slicing(cyclic, g).value_or("").find("cyclic"), std::string::npos);
}

TEST(Slicing, RandomDagsSatisfyPartitionIdentities) {
  testing::Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const WorkloadGraph g = build_graph(parse_module(testing::random_dag_module(rng, testing::uniform(rng, 1, 25))));
    std::size_t compute = 0, comm = 0, meta = 0;
    for (const GraphNode& n : g.nodes) {
      (n.cls == OpClass::kCompute ? compute : n.cls == OpClass::kCommunication ? comm : meta)++;
    }
    for (SplitAlgorithm a : {SplitAlgorithm::kLinear, SplitAlgorithm::kDependency}) {
      const SlicedWorkload s = split(g, a);
      ASSERT_FALSE(validate_slicing(s, g)) << *validate_slicing(s, g);
      std::size_t members = 0;
      for (const ComputeRegion& r : s.regions) members += r.member_ops.size();
      EXPECT_EQ(members + s.comm_nodes.size() + meta, g.size());
      EXPECT_EQ(s.comm_nodes.size(), comm);
      if (a == SplitAlgorithm::kLinear) {
        EXPECT_LE(s.regions.size(), comm + 1);
        EXPECT_TRUE(is_alternating(s));
      } else {
        EXPECT_EQ(s.regions.size(), compute);
      }
    }
  }
}

}  // namespace
}  // namespace hlosim
