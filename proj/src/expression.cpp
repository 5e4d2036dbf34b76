#include "homogmem/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "homogmem/error.hpp"

namespace homogmem {
namespace {

using Node = std::function<double(double, double)>;

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Node parse() {
    Node n = expr();
    skip();
    if (i_ != s_.size()) error("unexpected '" + std::string(1, s_[i_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(Errc::format, "expression \"" + s_ + "\" at position " + std::to_string(i_) + ": " + what);
  }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  Node expr() {
    Node lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = [a = lhs, b = term()](double x, double y) { return a(x, y) + b(x, y); };
      } else if (eat('-')) {
        lhs = [a = lhs, b = term()](double x, double y) { return a(x, y) - b(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Node term() {
    Node lhs = unary();
    for (;;) {
      if (eat('*')) {
        lhs = [a = lhs, b = unary()](double x, double y) { return a(x, y) * b(x, y); };
      } else if (eat('/')) {
        lhs = [a = lhs, b = unary()](double x, double y) { return a(x, y) / b(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Node unary() {
    if (eat('-')) return [a = unary()](double x, double y) { return -a(x, y); };
    if (eat('+')) return unary();
    return power();
  }

  // right associative, binds tighter than unary minus on its left: -x^2 = -(x^2)
  Node power() {
    Node base = primary();
    if (eat('^')) return [a = base, b = unary()](double x, double y) { return std::pow(a(x, y), b(x, y)); };
    return base;
  }

  Node primary() {
    skip();
    if (i_ >= s_.size()) error("unexpected end of input");
    if (eat('(')) {
      Node n = expr();
      if (!eat(')')) error("expected ')'");
      return n;
    }
    const char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    error("unexpected '" + std::string(1, c) + "'");
  }

  Node number() {
    const char* begin = s_.c_str() + i_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) error("malformed number");
    i_ += static_cast<std::size_t>(end - begin);
    return [v](double, double) { return v; };
  }

  Node identifier() {
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    const std::string name = s_.substr(start, i_ - start);

    if (name == "x" || name == "x1") return [](double x, double) { return x; };
    if (name == "y" || name == "x2") return [](double, double y) { return y; };
    if (name == "pi") return [](double, double) { return std::numbers::pi; };
    if (name == "e") return [](double, double) { return std::numbers::e; };

    static const std::map<std::string, double (*)(double)> unary_fns{
        {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
        {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
        {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
        {"abs", [](double v) { return std::abs(v); }},   {"tanh", [](double v) { return std::tanh(v); }},
        {"sinh", [](double v) { return std::sinh(v); }}, {"cosh", [](double v) { return std::cosh(v); }},
        {"atan", [](double v) { return std::atan(v); }},
    };
    static const std::map<std::string, double (*)(double, double)> binary_fns{
        {"min", [](double a, double b) { return std::min(a, b); }},
        {"max", [](double a, double b) { return std::max(a, b); }},
        {"pow", [](double a, double b) { return std::pow(a, b); }},
    };

    const auto args = arguments(name);
    if (const auto f = unary_fns.find(name); f != unary_fns.end()) {
      if (args.size() != 1) error(name + " takes one argument");
      return [fn = f->second, a = args[0]](double x, double y) { return fn(a(x, y)); };
    }
    if (const auto f = binary_fns.find(name); f != binary_fns.end()) {
      if (args.size() != 2) error(name + " takes two arguments");
      return [fn = f->second, a = args[0], b = args[1]](double x, double y) { return fn(a(x, y), b(x, y)); };
    }
    error("unknown name '" + name + "'");
  }

  std::vector<Node> arguments(const std::string& name) {
    if (!eat('(')) error("expected '(' after " + name);
    std::vector<Node> args{expr()};
    while (eat(',')) args.push_back(expr());
    if (!eat(')')) error("expected ')'");
    return args;
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace

ScalarField compile_expression(const std::string& text) { return Parser(text).parse(); }

ScalarField initial_condition(const std::string& selector) {
  if (selector == "zero") return [](double, double) { return 0.0; };
  if (selector == "paper") {
    return [](double x, double y) {
      return 4.0 / (1.0 + std::exp(-100.0 * (x - 0.5))) * x * (1.0 - x) * std::sin(std::numbers::pi * y);
    };
  }
  return compile_expression(selector);
}

}  // namespace homogmem
