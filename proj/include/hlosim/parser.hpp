// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Recursive-descent parser for the StableHLO text subset.
//
// Accepted grammar (informally):
//
//   file      := ('#' alias-line | module | func)*
//   module    := 'module' ['@' sym] ['attributes' attr-dict] '{' func* '}'
//   func      := 'func.func' [visibility] '@' sym '(' args ')' ['->' results]
//                ['attributes' attr-dict] '{' op* [return] '}'
//   op        := [results '='] generic-op | [results '='] sugared-op
//   generic   := '"' name '"' '(' operands ')' ['<{' attrs '}>']
//                ['(' '{' block '}' ')'] [attr-dict] ':' function-type
//   sugared   := dialect.name operands ':' (type-list | function-type)
//
// Trailing `loc(...)` annotations are skipped. Only static-shape tensor types
// are accepted.

#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hlosim/ir.hpp"

namespace hlosim {

enum class ParseErrorKind {
  kSyntax,
  kUndefinedValue,
  kDuplicateDefinition,
  kMalformedType,
  kUnknownElementType,
  kDynamicShape,
  kMissingMain,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, int line, int column, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                           ": " + msg),
        kind_(kind),
        line_(line),
        column_(column) {}

  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  ParseErrorKind kind_;
  int line_;
  int column_;
};

namespace detail {

inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool in_string = false;
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      out += c;
      if (c == '\\' && i + 1 < s.size()) {
        out += s[++i];
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
    if (c == '"') in_string = true;
  }
  return out;
}

// Interprets a captured attribute value. Anything that is not one of the
// structured forms becomes an OpaqueAttr holding the normalized text.
class AttrValueReader {
 public:
  explicit AttrValueReader(std::string_view text) : s_(text) {}

  AttributeValue read() {
    const std::string norm = collapse_whitespace(s_);
    if (auto v = try_structured(norm)) return *std::move(v);
    return OpaqueAttr{norm};
  }

 private:
  std::optional<AttributeValue> try_structured(std::string_view t) {
    if (t == "true") return AttributeValue{true};
    if (t == "false") return AttributeValue{false};
    if (t.empty()) return std::nullopt;
    if (t.front() == '"') {
      std::size_t end = 0;
      auto str = read_string(t, end);
      if (str && end == t.size()) return AttributeValue{*std::move(str)};
      return std::nullopt;
    }
    if (t.front() == '-' || std::isdigit(static_cast<unsigned char>(t.front()))) {
      std::size_t p = 0;
      auto v = read_int(t, p);
      if (!v) return std::nullopt;
      if (p == t.size() || integer_type_suffix(t.substr(p))) {
        return AttributeValue{*v};
      }
      return std::nullopt;
    }
    if (t.front() == '[') {
      std::size_t p = 0;
      auto v = read_list(t, p);
      if (v && p == t.size()) return v;
      return std::nullopt;
    }
    if (t.starts_with("array<")) {
      std::string_view body = t.substr(6);
      if (!body.ends_with(">")) return std::nullopt;
      body.remove_suffix(1);
      const auto colon = body.find(':');
      std::string_view elem = colon == std::string_view::npos ? body : body.substr(0, colon);
      while (!elem.empty() && elem.back() == ' ') elem.remove_suffix(1);
      if (elem != "i64" && elem != "i32" && elem != "i16" && elem != "i8") {
        return std::nullopt;
      }
      IntList out;
      if (colon != std::string_view::npos) {
        std::string_view rest = body.substr(colon + 1);
        std::size_t p = 0;
        skip_spaces(rest, p);
        while (p < rest.size()) {
          auto v = read_int(rest, p);
          if (!v) return std::nullopt;
          out.push_back(*v);
          skip_spaces(rest, p);
          if (p < rest.size()) {
            if (rest[p] != ',') return std::nullopt;
            ++p;
            skip_spaces(rest, p);
          }
        }
      }
      return AttributeValue{std::move(out)};
    }
    if (t.starts_with("dense<")) {
      // dense<[..]> : tensor<...xiN> with an integer element type.
      const auto close = t.find("> :");
      if (close == std::string_view::npos) return std::nullopt;
      std::string_view inner = t.substr(6, close - 6);
      std::string_view type = t.substr(close + 3);
      while (!type.empty() && type.front() == ' ') type.remove_prefix(1);
      if (!type.starts_with("tensor<") || !type.ends_with(">")) return std::nullopt;
      const auto lastx = type.rfind('x');
      std::string_view elem = type.substr(lastx == std::string_view::npos ? 7 : lastx + 1);
      elem.remove_suffix(1);
      if (elem != "i64" && elem != "i32") return std::nullopt;
      if (inner.empty() || inner.front() != '[') return std::nullopt;
      std::size_t p = 0;
      auto v = read_list(inner, p);
      if (v && p == inner.size()) return v;
      return std::nullopt;
    }
    return std::nullopt;
  }

  static bool integer_type_suffix(std::string_view rest) {
    // " : i64", " : i32", " : index"
    std::size_t p = 0;
    skip_spaces(rest, p);
    if (p >= rest.size() || rest[p] != ':') return false;
    ++p;
    skip_spaces(rest, p);
    const std::string_view ty = rest.substr(p);
    return ty == "i64" || ty == "i32" || ty == "i16" || ty == "i8" || ty == "i1" ||
           ty == "index" || ty == "ui32" || ty == "ui64";
  }

  static void skip_spaces(std::string_view t, std::size_t& p) {
    while (p < t.size() && t[p] == ' ') ++p;
  }

  static std::optional<std::int64_t> read_int(std::string_view t, std::size_t& p) {
    std::int64_t v = 0;
    const char* begin = t.data() + p;
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr == begin) return std::nullopt;
    // Reject floats such as "1.0" or "1e3".
    if (ptr != end && (*ptr == '.' || *ptr == 'e' || *ptr == 'E')) return std::nullopt;
    p += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  // [ints] or [[ints], ...]
  static std::optional<AttributeValue> read_list(std::string_view t, std::size_t& p) {
    if (p >= t.size() || t[p] != '[') return std::nullopt;
    ++p;
    skip_spaces(t, p);
    if (p < t.size() && t[p] == ']') {
      ++p;
      return AttributeValue{IntList{}};
    }
    if (p < t.size() && t[p] == '[') {
      IntListList outer;
      while (true) {
        auto inner = read_list(t, p);
        if (!inner || !std::holds_alternative<IntList>(*inner)) return std::nullopt;
        outer.push_back(std::get<IntList>(*inner));
        skip_spaces(t, p);
        if (p < t.size() && t[p] == ',') {
          ++p;
          skip_spaces(t, p);
          continue;
        }
        if (p < t.size() && t[p] == ']') {
          ++p;
          return AttributeValue{std::move(outer)};
        }
        return std::nullopt;
      }
    }
    IntList out;
    while (true) {
      auto v = read_int(t, p);
      if (!v) return std::nullopt;
      out.push_back(*v);
      skip_spaces(t, p);
      if (p < t.size() && t[p] == ',') {
        ++p;
        skip_spaces(t, p);
        continue;
      }
      if (p < t.size() && t[p] == ']') {
        ++p;
        return AttributeValue{std::move(out)};
      }
      return std::nullopt;
    }
  }

 public:
  // Reads a quoted string starting at t[0]; `end` receives the index past the
  // closing quote.
  static std::optional<std::string> read_string(std::string_view t, std::size_t& end) {
    if (t.empty() || t[0] != '"') return std::nullopt;
    std::string out;
    std::size_t i = 1;
    while (i < t.size()) {
      const char c = t[i];
      if (c == '"') {
        end = i + 1;
        return out;
      }
      if (c == '\\') {
        if (i + 1 >= t.size()) return std::nullopt;
        const char e = t[i + 1];
        if (e == '"' || e == '\\') {
          out += e;
          i += 2;
        } else if (e == 'n') {
          out += '\n';
          i += 2;
        } else if (e == 't') {
          out += '\t';
          i += 2;
        } else if (i + 2 < t.size() && std::isxdigit(static_cast<unsigned char>(e)) &&
                   std::isxdigit(static_cast<unsigned char>(t[i + 2]))) {
          out += static_cast<char>(std::stoi(std::string(t.substr(i + 1, 2)), nullptr, 16));
          i += 3;
        } else {
          return std::nullopt;
        }
        continue;
      }
      out += c;
      ++i;
    }
    return std::nullopt;
  }

 private:
  std::string_view s_;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  HloModule parse_module() {
    HloModule module;
    bool saw_module = false;
    skip_ws();
    while (!at_end()) {
      if (peek() == '#') {
        skip_line();
      } else if (keyword_ahead("module")) {
        if (saw_module) fail(ParseErrorKind::kSyntax, "only one module is supported");
        saw_module = true;
        pos_ += 6;
        skip_ws();
        if (peek() == '@') module.name = parse_symbol();
        skip_ws();
        if (keyword_ahead("attributes")) {
          pos_ += 10;
          skip_ws();
          module.attributes = parse_attr_dict('{', '}');
        }
        expect('{');
        skip_ws();
        while (peek() != '}') {
          if (at_end()) fail(ParseErrorKind::kSyntax, "unterminated module");
          module.functions.push_back(parse_function());
          skip_ws();
        }
        expect('}');
        skip_loc();
      } else if (keyword_ahead("func.func")) {
        module.functions.push_back(parse_function());
      } else {
        fail(ParseErrorKind::kSyntax, "expected 'module' or 'func.func'");
      }
      skip_ws();
    }
    int mains = 0;
    for (const HloFunction& f : module.functions) mains += f.name == "main" ? 1 : 0;
    if (mains != 1) {
      fail(ParseErrorKind::kMissingMain,
           mains == 0 ? "no @main function" : "more than one @main function");
    }
    return module;
  }

  TensorType parse_standalone_type() {
    skip_ws();
    TensorType t = parse_tensor_type();
    skip_ws();
    if (!at_end()) fail(ParseErrorKind::kSyntax, "trailing characters after type");
    return t;
  }

 private:
  using Scope = std::unordered_set<std::string>;

  [[noreturn]] void fail(ParseErrorKind kind, const std::string& msg) const {
    fail_at(pos_, kind, msg);
  }

  [[noreturn]] void fail_at(std::size_t at, ParseErrorKind kind, const std::string& msg) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(kind, line, col, msg);
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void skip_ws() {
    while (!at_end()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && peek(1) == '/') {
        skip_line();
      } else {
        break;
      }
    }
  }

  void skip_line() {
    while (!at_end() && src_[pos_] != '\n') ++pos_;
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$' ||
           c == '-';
  }

  bool keyword_ahead(std::string_view kw) const {
    if (src_.substr(pos_, kw.size()) != kw) return false;
    const char next = pos_ + kw.size() < src_.size() ? src_[pos_ + kw.size()] : '\0';
    return !ident_char(next);
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) {
      fail(ParseErrorKind::kSyntax, std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  bool consume(std::string_view s) {
    skip_ws();
    if (src_.substr(pos_, s.size()) == s) {
      pos_ += s.size();
      return true;
    }
    return false;
  }

  std::string parse_identifier() {
    skip_ws();
    const std::size_t start = pos_;
    if (!(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')) {
      fail(ParseErrorKind::kSyntax, "expected identifier");
    }
    while (!at_end() && ident_char(src_[pos_])) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string parse_string_literal() {
    skip_ws();
    std::size_t end = 0;
    auto s = AttrValueReader::read_string(src_.substr(pos_), end);
    if (!s) fail(ParseErrorKind::kSyntax, "malformed string literal");
    pos_ += end;
    return *s;
  }

  std::string parse_symbol() {
    expect('@');
    if (peek() == '"') return parse_string_literal();
    const std::size_t start = pos_;
    while (!at_end() && ident_char(src_[pos_])) ++pos_;
    if (start == pos_) fail(ParseErrorKind::kSyntax, "expected symbol name");
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string parse_value_name() {
    skip_ws();
    if (peek() != '%') fail(ParseErrorKind::kSyntax, "expected SSA value name");
    const std::size_t start = pos_++;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                         peek() == '.' || peek() == '$' || peek() == '-')) {
      ++pos_;
    }
    if (pos_ == start + 1) fail(ParseErrorKind::kSyntax, "empty SSA value name");
    if (peek() == '#') {
      ++pos_;
      const std::size_t digits = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      if (digits == pos_) fail(ParseErrorKind::kSyntax, "expected result index after '#'");
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  std::int64_t parse_int() {
    skip_ws();
    std::int64_t v = 0;
    const char* begin = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(begin, src_.data() + src_.size(), v);
    if (ec != std::errc() || ptr == begin) fail(ParseErrorKind::kSyntax, "expected integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  void skip_loc() {
    skip_ws();
    if (!keyword_ahead("loc")) return;
    pos_ += 3;
    skip_ws();
    if (peek() != '(') fail(ParseErrorKind::kSyntax, "expected '(' after loc");
    skip_balanced();
  }

  // Skips a balanced (...) group starting at the current '('.
  void skip_balanced() {
    int depth = 0;
    while (!at_end()) {
      const char c = src_[pos_];
      if (c == '"') {
        std::size_t end = 0;
        if (!AttrValueReader::read_string(src_.substr(pos_), end)) {
          fail(ParseErrorKind::kSyntax, "unterminated string");
        }
        pos_ += end;
        continue;
      }
      ++pos_;
      if (c == '(') ++depth;
      if (c == ')' && --depth == 0) return;
    }
    fail(ParseErrorKind::kSyntax, "unbalanced parentheses");
  }

  // ---- types -------------------------------------------------------------

  TensorType parse_tensor_type() {
    skip_ws();
    const std::size_t start = pos_;
    if (src_.substr(pos_, 7) != "tensor<") {
      std::size_t end = pos_;
      while (end < src_.size() && !std::isspace(static_cast<unsigned char>(src_[end])) &&
             src_[end] != ',' && src_[end] != ')') {
        ++end;
      }
      fail(ParseErrorKind::kMalformedType,
           "unsupported type '" + std::string(src_.substr(pos_, end - pos_)) + "'");
    }
    pos_ += 7;
    TensorType t;
    while (true) {
      const char c = peek();
      if (c == '?' || c == '*') {
        fail(ParseErrorKind::kDynamicShape, "dynamic shapes are not supported");
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::int64_t d = 0;
        const char* begin = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(begin, src_.data() + src_.size(), d);
        if (ec != std::errc()) fail(ParseErrorKind::kMalformedType, "bad dimension");
        pos_ += static_cast<std::size_t>(ptr - begin);
        if (peek() != 'x') fail(ParseErrorKind::kMalformedType, "expected 'x' after dimension");
        ++pos_;
        t.shape.push_back(d);
        continue;
      }
      break;
    }
    const std::size_t elem_start = pos_;
    while (std::isalnum(static_cast<unsigned char>(peek()))) ++pos_;
    const std::string_view elem = src_.substr(elem_start, pos_ - elem_start);
    if (elem.empty()) fail(ParseErrorKind::kMalformedType, "missing element type");
    auto e = element_type_from_name(elem);
    if (!e) {
      fail_at(elem_start, ParseErrorKind::kUnknownElementType,
              "unknown element type '" + std::string(elem) + "'");
    }
    t.element = *e;
    if (peek() != '>') {
      fail_at(start, ParseErrorKind::kMalformedType, "malformed tensor type");
    }
    ++pos_;
    return t;
  }

  std::vector<TensorType> parse_paren_type_list() {
    expect('(');
    std::vector<TensorType> out;
    skip_ws();
    if (peek() == ')') {
      ++pos_;
      return out;
    }
    while (true) {
      out.push_back(parse_tensor_type());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(')');
      return out;
    }
  }

  std::pair<std::vector<TensorType>, std::vector<TensorType>> parse_function_type() {
    auto inputs = parse_paren_type_list();
    if (!consume("->")) fail(ParseErrorKind::kSyntax, "expected '->' in function type");
    skip_ws();
    std::vector<TensorType> outputs;
    if (peek() == '(') {
      outputs = parse_paren_type_list();
    } else {
      outputs.push_back(parse_tensor_type());
    }
    return {std::move(inputs), std::move(outputs)};
  }

  // ---- attributes --------------------------------------------------------

  std::string parse_attr_key() {
    skip_ws();
    if (peek() == '"') return parse_string_literal();
    return parse_identifier();
  }

  // Captures raw attribute text up to a ',' or '}' at nesting depth zero.
  std::string_view capture_attr_text() {
    const std::size_t start = pos_;
    int depth = 0;
    while (!at_end()) {
      const char c = src_[pos_];
      if (c == '"') {
        std::size_t end = 0;
        if (!AttrValueReader::read_string(src_.substr(pos_), end)) {
          fail(ParseErrorKind::kSyntax, "unterminated string");
        }
        pos_ += end;
        continue;
      }
      if (c == '-' && peek(1) == '>') {
        pos_ += 2;
        continue;
      }
      if (depth == 0 && (c == ',' || c == '}')) break;
      if (c == '(' || c == '[' || c == '{' || c == '<') ++depth;
      if (c == ')' || c == ']' || c == '}' || c == '>') --depth;
      if (depth < 0) fail(ParseErrorKind::kSyntax, "unbalanced brackets in attribute");
      ++pos_;
    }
    if (at_end()) fail(ParseErrorKind::kSyntax, "unterminated attribute dictionary");
    return src_.substr(start, pos_ - start);
  }

  std::vector<Attribute> parse_attr_dict(char open, char close) {
    expect(open);
    std::vector<Attribute> attrs;
    skip_ws();
    if (peek() == close) {
      ++pos_;
      return attrs;
    }
    while (true) {
      const std::size_t key_pos = pos_;
      Attribute a;
      a.key = parse_attr_key();
      for (const Attribute& prev : attrs) {
        if (prev.key == a.key) {
          fail_at(key_pos, ParseErrorKind::kSyntax, "duplicate attribute '" + a.key + "'");
        }
      }
      skip_ws();
      if (peek() == '=') {
        ++pos_;
        skip_ws();
        const std::string_view raw = capture_attr_text();
        if (collapse_whitespace(raw).empty()) {
          fail(ParseErrorKind::kSyntax, "missing attribute value");
        }
        a.value = AttrValueReader(raw).read();
      } else {
        a.value = true;  // unit attribute
      }
      attrs.push_back(std::move(a));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(close);
      return attrs;
    }
  }

  // ---- functions and operations -----------------------------------------

  void define(std::vector<Scope>& scopes, const std::string& name, std::size_t at) {
    for (const Scope& s : scopes) {
      if (s.contains(name)) {
        fail_at(at, ParseErrorKind::kDuplicateDefinition, "redefinition of " + name);
      }
    }
    scopes.back().insert(name);
  }

  void use(const std::vector<Scope>& scopes, const std::string& name, std::size_t at) const {
    for (const Scope& s : scopes) {
      if (s.contains(name)) return;
    }
    fail_at(at, ParseErrorKind::kUndefinedValue, "use of undefined value " + name);
  }

  HloFunction parse_function() {
    skip_ws();
    if (!keyword_ahead("func.func")) fail(ParseErrorKind::kSyntax, "expected 'func.func'");
    pos_ += 9;
    HloFunction fn;
    skip_ws();
    if (keyword_ahead("public") || keyword_ahead("private")) fn.visibility = parse_identifier();
    fn.name = parse_symbol();

    std::vector<Scope> scopes(1);
    expect('(');
    skip_ws();
    if (peek() != ')') {
      while (true) {
        skip_ws();
        const std::size_t at = pos_;
        FunctionArgument arg;
        arg.name = parse_value_name();
        expect(':');
        arg.type = parse_tensor_type();
        skip_ws();
        if (peek() == '{') arg.attributes = parse_attr_dict('{', '}');
        skip_loc();
        define(scopes, arg.name, at);
        fn.arguments.push_back(std::move(arg));
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(')');
    if (consume("->")) {
      skip_ws();
      if (peek() == '(') {
        ++pos_;
        skip_ws();
        if (peek() != ')') {
          while (true) {
            FunctionResult r;
            r.type = parse_tensor_type();
            skip_ws();
            if (peek() == '{') r.attributes = parse_attr_dict('{', '}');
            fn.results.push_back(std::move(r));
            skip_ws();
            if (peek() == ',') {
              ++pos_;
              continue;
            }
            break;
          }
        }
        expect(')');
      } else {
        // Result attributes need the parenthesized form; a '{' here opens the body.
        FunctionResult r;
        r.type = parse_tensor_type();
        fn.results.push_back(std::move(r));
      }
    }
    skip_ws();
    if (keyword_ahead("attributes")) {
      pos_ += 10;
      fn.attributes = parse_attr_dict('{', '}');
    }
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') break;
      if (at_end()) fail(ParseErrorKind::kSyntax, "unterminated function body");
      if (keyword_ahead("func.return") || keyword_ahead("return")) {
        pos_ += keyword_ahead("return") ? 6 : 11;
        parse_return(fn, scopes);
        skip_ws();
        if (peek() != '}') fail(ParseErrorKind::kSyntax, "expected '}' after return");
        break;
      }
      fn.body.push_back(parse_operation(scopes));
    }
    expect('}');
    skip_loc();
    return fn;
  }

  void parse_return(HloFunction& fn, const std::vector<Scope>& scopes) {
    skip_ws();
    while (peek() == '%') {
      const std::size_t at = pos_;
      std::string name = parse_value_name();
      use(scopes, name, at);
      fn.return_names.push_back(std::move(name));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
      }
    }
    skip_ws();
    if (peek() == ':') {
      ++pos_;
      while (true) {
        fn.return_types.push_back(parse_tensor_type());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
      if (fn.return_types.size() != fn.return_names.size()) {
        fail(ParseErrorKind::kSyntax, "return type count does not match operand count");
      }
    }
    skip_loc();
  }

  HloOperation parse_operation(std::vector<Scope>& scopes) {
    HloOperation op;
    op.id = next_id_++;
    skip_ws();
    const std::size_t op_start = pos_;
    std::vector<std::size_t> result_positions;
    if (peek() == '%') {
      while (true) {
        skip_ws();
        const std::size_t at = pos_;
        std::string name = parse_value_name();
        if (peek() == ':') {
          ++pos_;
          const std::int64_t n = parse_int();
          if (n < 1) fail(ParseErrorKind::kSyntax, "result count must be positive");
          for (std::int64_t i = 0; i < n; ++i) {
            op.result_names.push_back(name + "#" + std::to_string(i));
            result_positions.push_back(at);
          }
        } else {
          op.result_names.push_back(std::move(name));
          result_positions.push_back(at);
        }
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
      expect('=');
    }
    skip_ws();
    if (peek() == '"') {
      op.op_name = parse_string_literal();
      parse_generic_body(op, scopes);
    } else {
      op.op_name = parse_identifier();
      parse_sugared_body(op, scopes);
    }
    skip_loc();
    if (op.result_types.size() != op.result_names.size()) {
      fail_at(op_start, ParseErrorKind::kSyntax,
              "operation declares " + std::to_string(op.result_names.size()) +
                  " results but its type lists " + std::to_string(op.result_types.size()));
    }
    if (op.operand_types.size() != op.operand_names.size()) {
      fail_at(op_start, ParseErrorKind::kSyntax, "operand type count does not match operands");
    }
    for (std::size_t i = 0; i < op.result_names.size(); ++i) {
      define(scopes, op.result_names[i], result_positions[i]);
    }
    return op;
  }

  void parse_operand_list(HloOperation& op, const std::vector<Scope>& scopes, char close) {
    skip_ws();
    if (peek() == close) return;
    while (true) {
      skip_ws();
      const std::size_t at = pos_;
      std::string name = parse_value_name();
      use(scopes, name, at);
      op.operand_names.push_back(std::move(name));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      return;
    }
  }

  void merge_attrs(HloOperation& op, std::vector<Attribute> extra) {
    for (Attribute& a : extra) {
      if (op.find_attribute(a.key)) fail(ParseErrorKind::kSyntax, "duplicate attribute '" + a.key + "'");
      op.attributes.push_back(std::move(a));
    }
  }

  void parse_generic_body(HloOperation& op, std::vector<Scope>& scopes) {
    expect('(');
    parse_operand_list(op, scopes, ')');
    expect(')');
    skip_ws();
    if (peek() == '<' && peek(1) == '{') {
      ++pos_;
      merge_attrs(op, parse_attr_dict('{', '}'));
      expect('>');
    }
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      parse_region(op, scopes);
      skip_ws();
      if (peek() == ',') fail(ParseErrorKind::kSyntax, "multiple regions are not supported");
      expect(')');
    }
    skip_ws();
    if (peek() == '{') merge_attrs(op, parse_attr_dict('{', '}'));
    expect(':');
    auto [ins, outs] = parse_function_type();
    op.operand_types = std::move(ins);
    op.result_types = std::move(outs);
  }

  void parse_region(HloOperation& op, std::vector<Scope>& scopes) {
    expect('{');
    op.has_region = true;
    scopes.emplace_back();
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      while (ident_char(peek())) ++pos_;
      skip_ws();
      if (peek() == '(') {
        ++pos_;
        skip_ws();
        if (peek() != ')') {
          while (true) {
            skip_ws();
            const std::size_t at = pos_;
            BlockArgument arg;
            arg.name = parse_value_name();
            expect(':');
            arg.type = parse_tensor_type();
            skip_loc();
            define(scopes, arg.name, at);
            op.region_args.push_back(std::move(arg));
            skip_ws();
            if (peek() == ',') {
              ++pos_;
              continue;
            }
            break;
          }
        }
        expect(')');
      }
      expect(':');
    }
    while (true) {
      skip_ws();
      if (peek() == '}') break;
      if (at_end()) fail(ParseErrorKind::kSyntax, "unterminated region");
      op.region_ops.push_back(parse_operation(scopes));
    }
    expect('}');
    scopes.pop_back();
  }

  void parse_sugared_body(HloOperation& op, std::vector<Scope>& scopes) {
    skip_ws();
    if (op.short_name() == "constant" && peek() != '%') {
      const std::size_t start = pos_;
      int depth = 0;
      while (!at_end()) {
        const char c = src_[pos_];
        if (depth == 0 && c == ':') break;
        if (c == '<' || c == '[' || c == '(') ++depth;
        if (c == '>' || c == ']' || c == ')') --depth;
        ++pos_;
      }
      const std::string raw = collapse_whitespace(src_.substr(start, pos_ - start));
      if (raw.empty()) fail(ParseErrorKind::kSyntax, "constant without a value");
      op.attributes.push_back({"value", AttrValueReader(raw).read()});
    } else {
      parse_operand_list(op, scopes, ':');
    }
    expect(':');
    skip_ws();
    if (peek() == '(') {
      auto [ins, outs] = parse_function_type();
      op.operand_types = std::move(ins);
      op.result_types = std::move(outs);
      return;
    }
    std::vector<TensorType> types;
    while (true) {
      types.push_back(parse_tensor_type());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      break;
    }
    if (types.size() == 1) {
      op.operand_types.assign(op.operand_names.size(), types.front());
      op.result_types.assign(op.result_names.size(), types.front());
    } else if (op.result_names.empty() && types.size() == op.operand_names.size()) {
      op.operand_types = std::move(types);
    } else {
      fail(ParseErrorKind::kSyntax, "cannot infer operand/result types from type list");
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int next_id_ = 0;
};

}  // namespace detail

// Parses a whole program. Throws ParseError on any syntax or SSA violation.
inline HloModule parse_module(std::string_view source) {
  return detail::Parser(source).parse_module();
}

inline TensorType parse_tensor_type(std::string_view text) {
  return detail::Parser(text).parse_standalone_type();
}

}  // namespace hlosim
