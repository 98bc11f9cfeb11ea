// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// In-memory model of the StableHLO text subset consumed by the simulator.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hlosim {

enum class ElementType { kF64, kF32, kF16, kBF16, kI64, kI32, kI16, kI8, kI1 };

inline constexpr std::int64_t element_byte_width(ElementType e) {
  switch (e) {
    case ElementType::kF64:
    case ElementType::kI64:
      return 8;
    case ElementType::kF32:
    case ElementType::kI32:
      return 4;
    case ElementType::kF16:
    case ElementType::kBF16:
    case ElementType::kI16:
      return 2;
    case ElementType::kI8:
    case ElementType::kI1:
      return 1;
  }
  return 1;
}

inline constexpr std::string_view element_type_name(ElementType e) {
  switch (e) {
    case ElementType::kF64: return "f64";
    case ElementType::kF32: return "f32";
    case ElementType::kF16: return "f16";
    case ElementType::kBF16: return "bf16";
    case ElementType::kI64: return "i64";
    case ElementType::kI32: return "i32";
    case ElementType::kI16: return "i16";
    case ElementType::kI8: return "i8";
    case ElementType::kI1: return "i1";
  }
  return "?";
}

inline std::optional<ElementType> element_type_from_name(std::string_view s) {
  static constexpr ElementType kAll[] = {
      ElementType::kF64, ElementType::kF32, ElementType::kF16,
      ElementType::kBF16, ElementType::kI64, ElementType::kI32,
      ElementType::kI16, ElementType::kI8, ElementType::kI1};
  for (ElementType e : kAll) {
    if (element_type_name(e) == s) return e;
  }
  return std::nullopt;
}

// Raised when a byte or element count does not fit in 64 bits.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

struct TensorType {
  std::vector<std::int64_t> shape;
  ElementType element = ElementType::kF32;

  std::size_t rank() const { return shape.size(); }

  std::int64_t element_count() const {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
      if (d == 0) return 0;
    }
    for (std::int64_t d : shape) {
      if (n > std::numeric_limits<std::int64_t>::max() / d) {
        throw OverflowError("tensor element count overflows 64 bits");
      }
      n *= d;
    }
    return n;
  }

  bool operator==(const TensorType&) const = default;
};

inline std::int64_t tensor_bytes(const TensorType& t) {
  const std::int64_t n = t.element_count();
  const std::int64_t w = element_byte_width(t.element);
  if (n > std::numeric_limits<std::int64_t>::max() / w) {
    throw OverflowError("tensor byte size overflows 64 bits");
  }
  return n * w;
}

inline std::string to_string(const TensorType& t) {
  std::string out = "tensor<";
  for (std::int64_t d : t.shape) {
    out += std::to_string(d);
    out += 'x';
  }
  out += element_type_name(t.element);
  out += '>';
  return out;
}

// Attribute text the parser could not map onto a structured value. Kept
// verbatim so printing reproduces it.
struct OpaqueAttr {
  std::string text;
  bool operator==(const OpaqueAttr&) const = default;
};

using IntList = std::vector<std::int64_t>;
using IntListList = std::vector<IntList>;
using AttributeValue =
    std::variant<std::int64_t, IntList, IntListList, std::string, bool, OpaqueAttr>;

struct Attribute {
  std::string key;
  AttributeValue value;
  bool operator==(const Attribute&) const = default;
};

struct BlockArgument {
  std::string name;
  TensorType type;
  bool operator==(const BlockArgument&) const = default;
};

struct HloOperation {
  int id = 0;
  std::vector<std::string> result_names;
  std::string op_name;
  std::vector<std::string> operand_names;
  std::vector<Attribute> attributes;
  std::vector<TensorType> operand_types;
  std::vector<TensorType> result_types;
  // Nested single-block region (reducer bodies, fused computations).
  bool has_region = false;
  std::vector<BlockArgument> region_args;
  std::vector<HloOperation> region_ops;

  const Attribute* find_attribute(std::string_view key) const {
    for (const Attribute& a : attributes) {
      if (a.key == key) return &a;
    }
    return nullptr;
  }

  // Name without the dialect prefix: "stablehlo.add" -> "add".
  std::string_view short_name() const {
    std::string_view n = op_name;
    const auto dot = n.rfind('.');
    return dot == std::string_view::npos ? n : n.substr(dot + 1);
  }

  bool operator==(const HloOperation&) const = default;
};

struct FunctionArgument {
  std::string name;
  TensorType type;
  std::vector<Attribute> attributes;
  bool operator==(const FunctionArgument&) const = default;
};

struct FunctionResult {
  TensorType type;
  std::vector<Attribute> attributes;
  bool operator==(const FunctionResult&) const = default;
};

struct HloFunction {
  std::string name;
  std::string visibility;  // "", "public" or "private"
  std::vector<FunctionArgument> arguments;
  std::vector<FunctionResult> results;
  std::vector<Attribute> attributes;
  std::vector<HloOperation> body;
  std::vector<std::string> return_names;
  std::vector<TensorType> return_types;

  bool operator==(const HloFunction&) const = default;
};

struct HloModule {
  std::string name;  // empty when the module is anonymous or unwrapped
  std::vector<Attribute> attributes;
  std::vector<HloFunction> functions;

  const HloFunction& main() const {
    for (const HloFunction& f : functions) {
      if (f.name == "main") return f;
    }
    throw std::logic_error("module has no @main function");
  }

  bool operator==(const HloModule&) const = default;
};

}  // namespace hlosim
