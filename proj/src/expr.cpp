#include "uniqset/expr.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <vector>

#include "uniqset/errors.hpp"

namespace uniqset {

LogNum LogNum::of(double x) {
  if (x == 0.0) return {0, 0.0};
  return {x > 0.0 ? 1 : -1, std::log(std::fabs(x))};
}

double LogNum::value() const { return sign == 0 ? 0.0 : sign * std::exp(l); }

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

LogNum ln_add(LogNum a, LogNum b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.l < b.l) std::swap(a, b);
  if (b.l == kNegInf) return a;
  double d = std::exp(b.l - a.l);
  if (a.sign == b.sign) return {a.sign, a.l + std::log1p(d)};
  if (d == 1.0) return {0, 0.0};
  return {a.sign, a.l + std::log1p(-d)};
}
LogNum ln_neg(LogNum a) { return {-a.sign, a.l}; }
LogNum ln_mul(LogNum a, LogNum b) {
  if (a.sign == 0 || b.sign == 0) return {0, 0.0};
  return {a.sign * b.sign, a.l + b.l};
}
LogNum ln_div(LogNum a, LogNum b) {
  if (b.sign == 0) return {a.sign == 0 ? 0 : a.sign, std::numeric_limits<double>::infinity()};
  if (a.sign == 0) return {0, 0.0};
  return {a.sign * b.sign, a.l - b.l};
}
LogNum ln_pow(LogNum a, LogNum b) {
  double e = b.value();
  if (a.sign == 0) return e > 0.0 ? LogNum{0, 0.0} : LogNum::of(std::pow(0.0, e));
  int s = 1;
  if (a.sign < 0) {
    if (std::nearbyint(e) != e) return {1, std::numeric_limits<double>::quiet_NaN()};
    if (std::fmod(std::fabs(e), 2.0) == 1.0) s = -1;
  }
  return {s, e * a.l};
}
LogNum ln_log(LogNum a) {
  if (a.sign <= 0) return {1, std::numeric_limits<double>::quiet_NaN()};
  return LogNum::of(a.l);
}
LogNum ln_exp(LogNum a) { return {1, a.value()}; }
bool ln_less(LogNum a, LogNum b) {
  if (a.sign != b.sign) return a.sign < b.sign;
  if (a.sign == 0) return false;
  return a.sign > 0 ? a.l < b.l : a.l > b.l;
}

enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Log, Exp, Sqrt, Abs, Min, Max };

}  // namespace

struct Expression::Node {
  Op op = Op::Num;
  double v = 0.0;
  std::shared_ptr<const Node> a, b;

  double eval(double x) const {
    switch (op) {
      case Op::Num: return v;
      case Op::Var: return x;
      case Op::Add: return a->eval(x) + b->eval(x);
      case Op::Sub: return a->eval(x) - b->eval(x);
      case Op::Mul: return a->eval(x) * b->eval(x);
      case Op::Div: return a->eval(x) / b->eval(x);
      case Op::Pow: return std::pow(a->eval(x), b->eval(x));
      case Op::Neg: return -a->eval(x);
      case Op::Log: return std::log(a->eval(x));
      case Op::Exp: return std::exp(a->eval(x));
      case Op::Sqrt: return std::sqrt(a->eval(x));
      case Op::Abs: return std::fabs(a->eval(x));
      case Op::Min: return std::fmin(a->eval(x), b->eval(x));
      case Op::Max: return std::fmax(a->eval(x), b->eval(x));
    }
    return 0.0;
  }
  LogNum eval_log(const LogNum& x) const {
    switch (op) {
      case Op::Num: return LogNum::of(v);
      case Op::Var: return x;
      case Op::Add: return ln_add(a->eval_log(x), b->eval_log(x));
      case Op::Sub: return ln_add(a->eval_log(x), ln_neg(b->eval_log(x)));
      case Op::Mul: return ln_mul(a->eval_log(x), b->eval_log(x));
      case Op::Div: return ln_div(a->eval_log(x), b->eval_log(x));
      case Op::Pow: return ln_pow(a->eval_log(x), b->eval_log(x));
      case Op::Neg: return ln_neg(a->eval_log(x));
      case Op::Log: return ln_log(a->eval_log(x));
      case Op::Exp: return ln_exp(a->eval_log(x));
      case Op::Sqrt: return ln_pow(a->eval_log(x), LogNum::of(0.5));
      case Op::Abs: { auto r = a->eval_log(x); r.sign = std::abs(r.sign); return r; }
      case Op::Min: { auto p = a->eval_log(x), q = b->eval_log(x); return ln_less(q, p) ? q : p; }
      case Op::Max: { auto p = a->eval_log(x), q = b->eval_log(x); return ln_less(p, q) ? q : p; }
    }
    return {};
  }
};

namespace {

using NodeP = std::shared_ptr<const Expression::Node>;

NodeP mk(Op op, NodeP a = nullptr, NodeP b = nullptr, double v = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->v = v;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodeP parse() {
    NodeP f = sum();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParameterError("expression \"" + s_ + "\": " + what + " at position " + std::to_string(i_));
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

  NodeP sum() {
    NodeP a = product();
    for (;;) {
      if (eat('+')) a = mk(Op::Add, a, product());
      else if (eat('-')) a = mk(Op::Sub, a, product());
      else return a;
    }
  }
  NodeP product() {
    NodeP a = unary();
    for (;;) {
      if (eat('*')) a = mk(Op::Mul, a, unary());
      else if (eat('/')) a = mk(Op::Div, a, unary());
      else return a;
    }
  }
  NodeP unary() {
    if (eat('-')) return mk(Op::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  // right associative, binds tighter than unary minus on its left
  NodeP power() {
    NodeP a = atom();
    if (eat('^')) return mk(Op::Pow, a, unary());
    return a;
  }
  NodeP atom() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end");
    char c = s_[i_];
    if (c == '(') {
      ++i_;
      NodeP a = sum();
      if (!eat(')')) fail("missing ')'");
      return a;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(i_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      i_ += used;
      return mk(Op::Num, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t b = i_;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
      std::string id = s_.substr(b, i_ - b);
      if (id == "n" || id == "t" || id == "x" || id == "xi") return mk(Op::Var);
      if (id == "pi") return mk(Op::Num, nullptr, nullptr, 3.141592653589793238462643383279502884);
      if (id == "e") return mk(Op::Num, nullptr, nullptr, 2.718281828459045235360287471352662498);
      return call(id);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
  NodeP call(const std::string& id) {
    if (!eat('(')) fail("expected '(' after " + id);
    std::vector<NodeP> args{sum()};
    while (eat(',')) args.push_back(sum());
    if (!eat(')')) fail("missing ')'");
    auto need = [&](std::size_t k) {
      if (args.size() != k) fail(id + " takes " + std::to_string(k) + " argument(s)");
    };
    if (id == "log" || id == "ln") return need(1), mk(Op::Log, args[0]);
    if (id == "exp") return need(1), mk(Op::Exp, args[0]);
    if (id == "sqrt") return need(1), mk(Op::Sqrt, args[0]);
    if (id == "abs") return need(1), mk(Op::Abs, args[0]);
    if (id == "pow") return need(2), mk(Op::Pow, args[0], args[1]);
    if (id == "min") return need(2), mk(Op::Min, args[0], args[1]);
    if (id == "max") return need(2), mk(Op::Max, args[0], args[1]);
    fail("unknown function " + id);
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& src) {
  Expression e;
  e.src_ = src;
  e.root_ = Parser(src).parse();
  return e;
}

double Expression::operator()(double x) const {
  if (!root_) throw ParameterError("empty expression");
  return root_->eval(x);
}

LogNum Expression::eval_log(double log_x) const {
  if (!root_) throw ParameterError("empty expression");
  return root_->eval_log(LogNum::exp_of(log_x));
}

}  // namespace uniqset
