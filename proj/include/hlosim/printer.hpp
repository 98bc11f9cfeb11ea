// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <cstdio>
#include <string>
#include <string_view>
#include <variant>

#include "hlosim/ir.hpp"

namespace hlosim {

namespace detail {

inline void print_string_literal(std::string& out, std::string_view s) {
  out += '"';
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else if (u < 0x20 || u >= 0x7f) {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "\\%02X", u);
      out += buf;
    } else {
      out += c;
    }
  }
  out += '"';
}

inline void print_int_list(std::string& out, const IntList& l) {
  out += '[';
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(l[i]);
  }
  out += ']';
}

inline bool bare_key(std::string_view k) {
  if (k.empty() || !(std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_')) {
    return false;
  }
  for (const char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$' ||
          c == '-')) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

inline std::string print_attribute_value(const AttributeValue& v) {
  std::string out;
  std::visit(
      [&out](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          out += std::to_string(x);
        } else if constexpr (std::is_same_v<T, IntList>) {
          detail::print_int_list(out, x);
        } else if constexpr (std::is_same_v<T, IntListList>) {
          out += '[';
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (i) out += ", ";
            detail::print_int_list(out, x[i]);
          }
          out += ']';
        } else if constexpr (std::is_same_v<T, std::string>) {
          detail::print_string_literal(out, x);
        } else if constexpr (std::is_same_v<T, bool>) {
          out += x ? "true" : "false";
        } else {
          out += x.text;
        }
      },
      v);
  return out;
}

inline std::string print_attr_dict(const std::vector<Attribute>& attrs) {
  std::string out = "{";
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) out += ", ";
    if (detail::bare_key(attrs[i].key)) {
      out += attrs[i].key;
    } else {
      detail::print_string_literal(out, attrs[i].key);
    }
    out += " = ";
    out += print_attribute_value(attrs[i].value);
  }
  out += '}';
  return out;
}

namespace detail {

inline std::string print_type_list(const std::vector<TensorType>& types) {
  std::string out;
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (i) out += ", ";
    out += to_string(types[i]);
  }
  return out;
}

// "%x#0, %x#1" prints back as "%x:2".
inline std::string print_result_names(const std::vector<std::string>& names) {
  const std::string& first = names.front();
  const auto hash = first.rfind('#');
  if (hash != std::string::npos && first.substr(hash) == "#0") {
    const std::string base = first.substr(0, hash);
    bool grouped = true;
    for (std::size_t i = 0; i < names.size(); ++i) {
      grouped = grouped && names[i] == base + "#" + std::to_string(i);
    }
    if (grouped) return base + ":" + std::to_string(names.size());
  }
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

inline void print_operation(std::string& out, const HloOperation& op, int indent) {
  out.append(static_cast<std::size_t>(indent), ' ');
  if (!op.result_names.empty()) {
    out += print_result_names(op.result_names);
    out += " = ";
  }
  print_string_literal(out, op.op_name);
  out += '(';
  for (std::size_t i = 0; i < op.operand_names.size(); ++i) {
    if (i) out += ", ";
    out += op.operand_names[i];
  }
  out += ')';
  if (op.has_region) {
    out += " ({\n";
    out.append(static_cast<std::size_t>(indent + 2), ' ');
    out += "^bb0";
    if (!op.region_args.empty()) {
      out += '(';
      for (std::size_t i = 0; i < op.region_args.size(); ++i) {
        if (i) out += ", ";
        out += op.region_args[i].name;
        out += ": ";
        out += to_string(op.region_args[i].type);
      }
      out += ')';
    }
    out += ":\n";
    for (const HloOperation& inner : op.region_ops) print_operation(out, inner, indent + 4);
    out.append(static_cast<std::size_t>(indent), ' ');
    out += "})";
  }
  if (!op.attributes.empty()) {
    out += ' ';
    out += print_attr_dict(op.attributes);
  }
  out += " : (";
  out += print_type_list(op.operand_types);
  out += ") -> ";
  if (op.result_types.size() == 1) {
    out += to_string(op.result_types.front());
  } else {
    out += '(';
    out += print_type_list(op.result_types);
    out += ')';
  }
  out += '\n';
}

inline void print_function(std::string& out, const HloFunction& fn, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  out += pad;
  out += "func.func ";
  if (!fn.visibility.empty()) {
    out += fn.visibility;
    out += ' ';
  }
  out += '@';
  if (bare_key(fn.name)) {
    out += fn.name;
  } else {
    print_string_literal(out, fn.name);
  }
  out += '(';
  for (std::size_t i = 0; i < fn.arguments.size(); ++i) {
    if (i) out += ", ";
    out += fn.arguments[i].name;
    out += ": ";
    out += to_string(fn.arguments[i].type);
    if (!fn.arguments[i].attributes.empty()) {
      out += ' ';
      out += print_attr_dict(fn.arguments[i].attributes);
    }
  }
  out += ')';
  if (!fn.results.empty()) {
    out += " -> (";
    for (std::size_t i = 0; i < fn.results.size(); ++i) {
      if (i) out += ", ";
      out += to_string(fn.results[i].type);
      if (!fn.results[i].attributes.empty()) {
        out += ' ';
        out += print_attr_dict(fn.results[i].attributes);
      }
    }
    out += ')';
  }
  if (!fn.attributes.empty()) {
    out += " attributes ";
    out += print_attr_dict(fn.attributes);
  }
  out += " {\n";
  for (const HloOperation& op : fn.body) print_operation(out, op, indent + 2);
  out += pad;
  out += "  func.return";
  for (std::size_t i = 0; i < fn.return_names.size(); ++i) {
    out += i ? ", " : " ";
    out += fn.return_names[i];
  }
  if (!fn.return_types.empty()) {
    out += " : ";
    out += print_type_list(fn.return_types);
  }
  out += '\n';
  out += pad;
  out += "}\n";
}

}  // namespace detail

// Emits the generic form of every operation; parse_module accepts the output
// and rebuilds a structurally equal module.
inline std::string print_module(const HloModule& m) {
  std::string out;
  const bool wrapped = !m.name.empty() || !m.attributes.empty();
  if (wrapped) {
    out += "module";
    if (!m.name.empty()) {
      out += " @";
      if (detail::bare_key(m.name)) {
        out += m.name;
      } else {
        detail::print_string_literal(out, m.name);
      }
    }
    if (!m.attributes.empty()) {
      out += " attributes ";
      out += print_attr_dict(m.attributes);
    }
    out += " {\n";
  }
  for (const HloFunction& fn : m.functions) detail::print_function(out, fn, wrapped ? 2 : 0);
  if (wrapped) out += "}\n";
  return out;
}

}  // namespace hlosim
