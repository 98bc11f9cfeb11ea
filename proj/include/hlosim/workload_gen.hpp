// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Parameterized StableHLO fixtures: a square-GEMM microbenchmark with an
// optional trailing collective, and N stacked matmul -> add -> tanh ->
// all_reduce blocks.

#pragma once

#include <stdexcept>
#include <string>

#include "hlosim/ir.hpp"

namespace hlosim {

struct GemmWorkload {
  std::int64_t m = 4096;
  std::int64_t n = 4096;
  std::int64_t k = 4096;
  ElementType dtype = ElementType::kBF16;
  std::string collective = "all_reduce";  // or all_gather, reduce_scatter, all_to_all,
                                          // collective_permute, none
  int devices = 4;
};

struct BlocksWorkload {
  int layers = 4;
  std::int64_t batch = 256;
  std::int64_t hidden = 1024;
  ElementType dtype = ElementType::kBF16;
  int devices = 4;
};

namespace detail {

inline std::string tensor_text(std::initializer_list<std::int64_t> dims, ElementType e) {
  return to_string(TensorType{std::vector<std::int64_t>(dims), e});
}

inline std::string replica_groups(int devices) {
  std::string s = "dense<[[";
  for (int i = 0; i < devices; ++i) {
    if (i) s += ", ";
    s += std::to_string(i);
  }
  s += "]]> : tensor<1x" + std::to_string(devices) + "xi64>";
  return s;
}

inline std::string reducer_region(ElementType e, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string scalar = tensor_text({}, e);
  return "({\n" + pad + "  ^bb0(%red_a: " + scalar + ", %red_b: " + scalar + "):\n" + pad +
         "    %red_sum = stablehlo.add %red_a, %red_b : " + scalar + "\n" + pad +
         "    stablehlo.return %red_sum : " + scalar + "\n" + pad + "})";
}

}  // namespace detail

inline std::string generate_gemm(const GemmWorkload& w) {
  if (w.m < 0 || w.n < 0 || w.k < 0) throw std::invalid_argument("gemm extents must be >= 0");
  if (w.devices < 1) throw std::invalid_argument("device count must be >= 1");
  const ElementType e = w.dtype;
  const std::string lhs = detail::tensor_text({w.m, w.k}, e);
  const std::string rhs = detail::tensor_text({w.k, w.n}, e);
  const std::string out = detail::tensor_text({w.m, w.n}, e);
  std::string result_type = out;
  std::string collective;
  const std::string groups = detail::replica_groups(w.devices);
  if (w.collective == "all_reduce") {
    collective = "  %1 = \"stablehlo.all_reduce\"(%0) " + detail::reducer_region(e, 2) +
                 " {replica_groups = " + groups + "} : (" + out + ") -> " + out + "\n";
  } else if (w.collective == "all_gather") {
    result_type = detail::tensor_text({w.m * w.devices, w.n}, e);
    collective = "  %1 = \"stablehlo.all_gather\"(%0) {all_gather_dim = 0 : i64, replica_groups = " +
                 groups + "} : (" + out + ") -> " + result_type + "\n";
  } else if (w.collective == "reduce_scatter") {
    if (w.m % w.devices != 0) throw std::invalid_argument("reduce_scatter needs m divisible by devices");
    result_type = detail::tensor_text({w.m / w.devices, w.n}, e);
    collective = "  %1 = \"stablehlo.reduce_scatter\"(%0) " + detail::reducer_region(e, 2) +
                 " {scatter_dimension = 0 : i64, replica_groups = " + groups + "} : (" + out +
                 ") -> " + result_type + "\n";
  } else if (w.collective == "all_to_all") {
    collective = "  %1 = \"stablehlo.all_to_all\"(%0) {split_dimension = 0 : i64, concat_dimension = 0 : i64, "
                 "split_count = " + std::to_string(w.devices) + " : i64, replica_groups = " + groups +
                 "} : (" + out + ") -> " + out + "\n";
  } else if (w.collective == "collective_permute") {
    std::string pairs = "dense<[";
    for (int i = 0; i < w.devices; ++i) {
      if (i) pairs += ", ";
      pairs += "[" + std::to_string(i) + ", " + std::to_string((i + 1) % w.devices) + "]";
    }
    pairs += "]> : tensor<" + std::to_string(w.devices) + "x2xi64>";
    collective = "  %1 = \"stablehlo.collective_permute\"(%0) {source_target_pairs = " + pairs +
                 "} : (" + out + ") -> " + out + "\n";
  } else if (w.collective != "none") {
    throw std::invalid_argument("unknown collective '" + w.collective + "'");
  }
  std::string s = "module @gemm {\n";
  s += "  func.func @main(%lhs: " + lhs + ", %rhs: " + rhs + ") -> " + result_type + " {\n";
  s += "  %0 = \"stablehlo.dot_general\"(%lhs, %rhs) {dot_dimension_numbers = #stablehlo.dot<"
       "lhs_contracting_dimensions = [1], rhs_contracting_dimensions = [0]>} : (" +
       lhs + ", " + rhs + ") -> " + out + "\n";
  s += collective;
  s += "  func.return " + std::string(collective.empty() ? "%0" : "%1") + " : " + result_type + "\n";
  s += "  }\n}\n";
  return s;
}

inline std::string generate_blocks(const BlocksWorkload& w) {
  if (w.layers < 1) throw std::invalid_argument("blocks workload needs at least one layer");
  if (w.batch < 1 || w.hidden < 1) throw std::invalid_argument("block extents must be >= 1");
  const ElementType e = w.dtype;
  const std::string act = detail::tensor_text({w.batch, w.hidden}, e);
  const std::string weight = detail::tensor_text({w.hidden, w.hidden}, e);
  const std::string groups = detail::replica_groups(w.devices);
  std::string s = "module @blocks {\n  func.func @main(%x: " + act;
  for (int i = 0; i < w.layers; ++i) {
    s += ", %w" + std::to_string(i) + ": " + weight + ", %b" + std::to_string(i) + ": " + act;
  }
  s += ") -> " + act + " {\n";
  std::string h = "%x";
  for (int i = 0; i < w.layers; ++i) {
    const std::string l = std::to_string(i);
    s += "    %dot" + l + " = \"stablehlo.dot_general\"(" + h + ", %w" + l +
         ") {dot_dimension_numbers = #stablehlo.dot<lhs_contracting_dimensions = [1], "
         "rhs_contracting_dimensions = [0]>} : (" + act + ", " + weight + ") -> " + act + "\n";
    s += "    %add" + l + " = stablehlo.add %dot" + l + ", %b" + l + " : " + act + "\n";
    s += "    %tanh" + l + " = stablehlo.tanh %add" + l + " : " + act + "\n";
    s += "    %ar" + l + " = \"stablehlo.all_reduce\"(%tanh" + l + ") " + detail::reducer_region(e, 4) +
         " {replica_groups = " + groups + "} : (" + act + ") -> " + act + "\n";
    h = "%ar" + l;
  }
  s += "    func.return " + h + " : " + act + "\n  }\n}\n";
  return s;
}

}  // namespace hlosim
