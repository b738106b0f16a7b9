// Text formats for models, properties and formulas.

#pragma once

#include <stdexcept>
#include <string>

#include "causal/model.hpp"
#include "causal/tableau.hpp"

namespace causal {

/// Syntax or resolution problem, with a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Parses `system <name> { ... }`. Validation failures from the model layer
/// are reported as ParseError at the system keyword.
TransitionSystem parse_model(const std::string& text);
std::string render_model(const TransitionSystem& system);

/// Parses `property <name> ...;` against a composed model.
PropertySpec parse_property(const std::string& text, const ComposedSystem& sys);
std::string render_property(const PropertySpec& prop, const ComposedSystem& sys);

/// A conjunction such as `loc_P1 = s1 & q1' = q1 - 1`.
Formula parse_formula(const std::string& text, const Signature& sig);

std::string render_expr(const LinearExpr& e);

}  // namespace causal
