#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdfleet {

/// Parsed propensity expression.
///
/// Grammar (lowest to highest precedence, binary operators left-associative):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' ('-')* primary)*
///   primary := number | identifier | identifier '(' sum (',' sum)* ')' | '(' sum ')'
/// Functions: min(a,b), max(a,b), exp(a), pow(a,b). `-a^b` is `-(a^b)`.
class PropensityExpr {
 public:
  enum class Op : std::uint8_t { Number, Identifier, Add, Sub, Mul, Div, Pow, Neg, Min, Max, Exp, PowFn };

  struct Node {
    Op op;
    double value = 0.0;      ///< Number
    std::string name;        ///< Identifier
    std::int32_t lhs = -1;   ///< first operand / argument
    std::int32_t rhs = -1;   ///< second operand / argument
    std::size_t position = 0;
  };

  static PropensityExpr parse(std::string_view source);

  /// Minimal-parenthesis rendering; `parse(to_string())` rebuilds the same tree.
  std::string to_string() const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::int32_t root() const noexcept { return root_; }
  std::vector<std::string> identifiers() const;

  /// Structural equality (positions ignored).
  bool same_tree(const PropensityExpr& other) const;

  /// Build directly from nodes (used by tests that generate random trees).
  static PropensityExpr from_nodes(std::vector<Node> nodes, std::int32_t root);

 private:
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

/// What an identifier resolves to when an expression is bound to a model.
struct ExprSlot {
  enum class Kind : std::uint8_t { SpeciesCount, Constant, Volume };
  Kind kind = Kind::Constant;
  std::size_t species = 0;
  double value = 0.0;
};

/// Expression compiled to postfix with identifiers resolved.
class BoundExpr {
 public:
  using Resolver = std::function<std::optional<ExprSlot>(std::string_view)>;

  /// Throws ParseError (with the identifier's position) for unresolved names.
  static BoundExpr bind(const PropensityExpr& expr, const Resolver& resolve);

  double evaluate(std::span<const std::int64_t> counts, double volume) const;

  /// Species indices this expression reads.
  const std::vector<std::size_t>& dependencies() const noexcept { return deps_; }

 private:
  struct Instr {
    PropensityExpr::Op op;
    ExprSlot::Kind kind;
    std::size_t species;
    double value;
  };
  std::vector<Instr> code_;
  std::vector<std::size_t> deps_;
  std::size_t max_stack_ = 0;
};

}  // namespace rdfleet
