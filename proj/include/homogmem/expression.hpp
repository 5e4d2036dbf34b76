#pragma once

#include <string>

#include "homogmem/macro.hpp"

namespace homogmem {

/// Compiles an arithmetic expression in x and y (aliases x1, x2) with
/// + - * / ^, parentheses, the constants pi and e, and the functions
/// sin cos tan exp log sqrt abs tanh sinh cosh atan min max pow.
/// Throws format-error with the offending position.
ScalarField compile_expression(const std::string& text);

/// "paper" -> 4/(1+exp(-100(x-0.5))) x(1-x) sin(pi y), "zero" -> 0,
/// anything else is compiled as an expression.
ScalarField initial_condition(const std::string& selector);

}  // namespace homogmem
