// expr.hpp
// tiny expression grammar for gauges: numbers, the variable (n, t, x or xi),
// + - * / ^, unary minus, log exp sqrt abs pow min max, constants pi and e.
// Evaluates in double or in log representation (sign * e^l), the latter for
// arguments far beyond double range.
#ifndef UNIQSET_EXPR_HPP
#define UNIQSET_EXPR_HPP

#include <memory>
#include <string>

namespace uniqset {

struct LogNum {
  int sign = 0;  // -1, 0, +1
  double l = 0.0;
  static LogNum of(double x);
  static LogNum exp_of(double l) { return {1, l}; }
  double value() const;
};

class Expression {
 public:
  struct Node;
  Expression() = default;
  // throws ParameterError with the offending position
  static Expression parse(const std::string& src);
  const std::string& source() const { return src_; }
  bool empty() const { return !root_; }
  double operator()(double x) const;
  // value at x = e^{log_x}
  LogNum eval_log(double log_x) const;

 private:
  std::string src_;
  std::shared_ptr<const Node> root_;
};

}  // namespace uniqset

#endif
