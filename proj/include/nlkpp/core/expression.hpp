#pragma once

// Minimal arithmetic expression language used for coefficients, kernel
// profiles and reaction terms in experiment configs.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Variables: x, y, t, z, r. Constants: pi, e, plus caller-supplied names
// (for example the period T). Functions: sin, cos, tan, exp, log, sqrt, abs,
// tanh, pow(a,b), min(a,b), max(a,b).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nlkpp/core/error.hpp"

namespace nlkpp {

struct Variables {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  double z = 0.0;
  double r = 0.0;
};

class Expression {
 public:
  Expression() = default;

  static Expression parse(std::string_view source,
                          const std::map<std::string, double>& constants = {}) {
    Parser p{source, constants};
    Expression e;
    e.source_ = std::string(source);
    p.parse_expr(e.program_);
    p.skip_ws();
    if (!p.at_end()) p.fail("unexpected trailing input");
    if (e.program_.empty()) p.fail("empty expression");
    int depth = 0;
    for (const Instr& in : e.program_) {
      depth += stack_effect(in.op);
      if (depth > kMaxStack) p.fail("expression too large");
    }
    return e;
  }

  static Expression constant(double value) {
    Expression e;
    e.source_ = std::to_string(value);
    e.program_.push_back({Op::push, value});
    return e;
  }

  double operator()(const Variables& v) const {
    double stack[kMaxStack];
    int top = -1;
    for (const Instr& in : program_) {
      switch (in.op) {
        case Op::push: stack[++top] = in.value; break;
        case Op::var_x: stack[++top] = v.x; break;
        case Op::var_y: stack[++top] = v.y; break;
        case Op::var_t: stack[++top] = v.t; break;
        case Op::var_z: stack[++top] = v.z; break;
        case Op::var_r: stack[++top] = v.r; break;
        case Op::neg: stack[top] = -stack[top]; break;
        case Op::add: --top; stack[top] += stack[top + 1]; break;
        case Op::sub: --top; stack[top] -= stack[top + 1]; break;
        case Op::mul: --top; stack[top] *= stack[top + 1]; break;
        case Op::div: --top; stack[top] /= stack[top + 1]; break;
        case Op::pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
        case Op::min: --top; stack[top] = std::min(stack[top], stack[top + 1]); break;
        case Op::max: --top; stack[top] = std::max(stack[top], stack[top + 1]); break;
        case Op::sin: stack[top] = std::sin(stack[top]); break;
        case Op::cos: stack[top] = std::cos(stack[top]); break;
        case Op::tan: stack[top] = std::tan(stack[top]); break;
        case Op::exp: stack[top] = std::exp(stack[top]); break;
        case Op::log: stack[top] = std::log(stack[top]); break;
        case Op::sqrt: stack[top] = std::sqrt(stack[top]); break;
        case Op::abs: stack[top] = std::abs(stack[top]); break;
        case Op::tanh: stack[top] = std::tanh(stack[top]); break;
      }
    }
    return stack[0];
  }

  const std::string& source() const { return source_; }
  bool empty() const { return program_.empty(); }

  /// True when the expression reads the named variable.
  bool uses(char var) const {
    Op wanted = var == 'x' ? Op::var_x
              : var == 'y' ? Op::var_y
              : var == 't' ? Op::var_t
              : var == 'z' ? Op::var_z
                           : Op::var_r;
    for (const Instr& in : program_)
      if (in.op == wanted) return true;
    return false;
  }

  static const std::vector<std::string>& function_names() {
    static const std::vector<std::string> names{"sin", "cos", "tan", "exp", "log", "sqrt",
                                                "abs", "tanh", "pow", "min", "max"};
    return names;
  }

 private:
  static constexpr int kMaxStack = 64;

  enum class Op {
    push, var_x, var_y, var_t, var_z, var_r, neg, add, sub, mul, div, pow, min, max,
    sin, cos, tan, exp, log, sqrt, abs, tanh
  };
  struct Instr {
    Op op;
    double value = 0.0;
  };

  static int stack_effect(Op op) {
    switch (op) {
      case Op::push: case Op::var_x: case Op::var_y: case Op::var_t: case Op::var_z:
      case Op::var_r:
        return 1;
      case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow: case Op::min:
      case Op::max:
        return -1;
      default:
        return 0;
    }
  }

  struct Parser {
    std::string_view s;
    const std::map<std::string, double>& constants;
    std::size_t pos = 0;
    int depth = 0;

    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigError("expression '" + std::string(s) + "': " + what + " at column " +
                        std::to_string(pos + 1));
    }
    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool at_end() const { return pos >= s.size(); }
    bool accept(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    void guard_depth() {
      if (++depth > kMaxStack / 2) fail("expression nested too deeply");
    }

    void parse_expr(std::vector<Instr>& out) {
      guard_depth();
      parse_term(out);
      for (;;) {
        if (accept('+')) {
          parse_term(out);
          out.push_back({Op::add});
        } else if (accept('-')) {
          parse_term(out);
          out.push_back({Op::sub});
        } else {
          break;
        }
      }
      --depth;
    }
    void parse_term(std::vector<Instr>& out) {
      parse_unary(out);
      for (;;) {
        if (accept('*')) {
          parse_unary(out);
          out.push_back({Op::mul});
        } else if (accept('/')) {
          parse_unary(out);
          out.push_back({Op::div});
        } else {
          break;
        }
      }
    }
    void parse_unary(std::vector<Instr>& out) {
      if (accept('-')) {
        guard_depth();
        parse_unary(out);
        --depth;
        out.push_back({Op::neg});
        return;
      }
      if (accept('+')) {
        parse_unary(out);
        return;
      }
      parse_power(out);
    }
    void parse_power(std::vector<Instr>& out) {
      parse_primary(out);
      if (accept('^')) {
        guard_depth();
        parse_unary(out);
        --depth;
        out.push_back({Op::pow});
      }
    }
    void parse_primary(std::vector<Instr>& out) {
      skip_ws();
      if (at_end()) fail("unexpected end of input");
      char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t start = pos;
        while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.'))
          ++pos;
        if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
          std::size_t save = pos;
          ++pos;
          if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
          if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
          } else {
            pos = save;
          }
        }
        std::string num(s.substr(start, pos - start));
        char* end = nullptr;
        double v = std::strtod(num.c_str(), &end);
        if (end == num.c_str() || *end != '\0') fail("malformed number '" + num + "'");
        out.push_back({Op::push, v});
        return;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
          ++pos;
        std::string name(s.substr(start, pos - start));
        skip_ws();
        if (pos < s.size() && s[pos] == '(') {
          ++pos;
          parse_call(name, out);
          return;
        }
        parse_name(name, out);
        return;
      }
      if (accept('(')) {
        parse_expr(out);
        expect(')');
        return;
      }
      fail(std::string("unexpected character '") + c + "'");
    }
    void parse_name(const std::string& name, std::vector<Instr>& out) {
      if (name == "x") out.push_back({Op::var_x});
      else if (name == "y") out.push_back({Op::var_y});
      else if (name == "t") out.push_back({Op::var_t});
      else if (name == "z") out.push_back({Op::var_z});
      else if (name == "r") out.push_back({Op::var_r});
      else if (name == "pi") out.push_back({Op::push, std::numbers::pi});
      else if (name == "e") out.push_back({Op::push, std::numbers::e});
      else if (auto it = constants.find(name); it != constants.end())
        out.push_back({Op::push, it->second});
      else
        fail("unknown name '" + name + "'");
    }
    void parse_call(const std::string& name, std::vector<Instr>& out) {
      static const std::map<std::string, std::pair<Op, int>> table{
          {"sin", {Op::sin, 1}},   {"cos", {Op::cos, 1}},   {"tan", {Op::tan, 1}},
          {"exp", {Op::exp, 1}},   {"log", {Op::log, 1}},   {"sqrt", {Op::sqrt, 1}},
          {"abs", {Op::abs, 1}},   {"tanh", {Op::tanh, 1}}, {"pow", {Op::pow, 2}},
          {"min", {Op::min, 2}},   {"max", {Op::max, 2}}};
      auto it = table.find(name);
      if (it == table.end()) fail("unknown function '" + name + "'");
      auto [op, arity] = it->second;
      int args = 0;
      if (!accept(')')) {
        do {
          parse_expr(out);
          ++args;
        } while (accept(','));
        expect(')');
      }
      if (args != arity)
        fail("function '" + name + "' takes " + std::to_string(arity) + " argument(s)");
      out.push_back({op});
    }
  };

  std::string source_;
  std::vector<Instr> program_;
};

}  // namespace nlkpp
