#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "rdfleet/error.hpp"
#include "rdfleet/expr.hpp"
#include "rdfleet/rng.hpp"

using namespace rdfleet;
using Catch::Approx;

namespace {

// Binds identifiers: species from `counts` by name order, constants from `params`.
struct Env {
  std::vector<std::string> species;
  std::map<std::string, double> params;

  BoundExpr bind(std::string_view src) const {
    return BoundExpr::bind(PropensityExpr::parse(src), [&](std::string_view name) -> std::optional<ExprSlot> {
      if (name == "vol") return ExprSlot{ExprSlot::Kind::Volume, 0, 0.0};
      for (std::size_t i = 0; i < species.size(); ++i) {
        if (species[i] == name) return ExprSlot{ExprSlot::Kind::SpeciesCount, i, 0.0};
      }
      if (auto it = params.find(std::string(name)); it != params.end()) {
        return ExprSlot{ExprSlot::Kind::Constant, 0, it->second};
      }
      return std::nullopt;
    });
  }
};

double eval(std::string_view src, double vol = 1.0) {
  Env env;
  std::vector<std::int64_t> none;
  return env.bind(src).evaluate(none, vol);
}

std::string random_expr(RandomStream& rng, int depth) {
  static const char* leaves[] = {"A", "B", "k1", "vol", "2", "0.5", "3e-2"};
  if (depth == 0 || rng.below(4) == 0) return leaves[rng.below(7)];
  switch (rng.below(8)) {
    case 0: return random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1);
    case 1: return random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1);
    case 2: return random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1);
    case 3: return random_expr(rng, depth - 1) + " / " + random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) + "^" + random_expr(rng, depth - 1);
    case 5: return "-" + random_expr(rng, depth - 1);
    case 6: return "(" + random_expr(rng, depth - 1) + ")";
    default: {
      static const char* fns[] = {"min", "max", "pow"};
      if (rng.below(4) == 0) return "exp(" + random_expr(rng, depth - 1) + ")";
      return std::string(fns[rng.below(3)]) + "(" + random_expr(rng, depth - 1) + ", " + random_expr(rng, depth - 1) + ")";
    }
  }
}

}  // namespace

TEST_CASE("propensity examples") {
  Env env{{"A", "Cm", "Cc"}, {{"k1", 2.0}, {"kfb", 1.0}}};
  std::vector<std::int64_t> counts{3, 2, 5};
  CHECK(env.bind("k1*A").evaluate(counts, 1.0) == 6.0);
  CHECK(env.bind("kfb*Cm*Cc/vol").evaluate(counts, 0.25) == 40.0);
  CHECK(env.bind("k1 * A / (1 + Cc / 5)").evaluate(counts, 1.0) == 3.0);
  CHECK(env.bind("max(A, Cc) - min(A, Cc)").evaluate(counts, 1.0) == 2.0);
}

TEST_CASE("precedence and associativity") {
  CHECK(eval("1 + 2 * 3") == 7.0);
  CHECK(eval("(1 + 2) * 3") == 9.0);
  CHECK(eval("8 / 4 / 2") == 1.0);
  CHECK(eval("8 - 4 - 2") == 2.0);
  CHECK(eval("-2^2") == -4.0);
  CHECK(eval("2^3^2") == 64.0);
  CHECK(eval("2^-1") == 0.5);
  CHECK(eval("--3") == 3.0);
  CHECK(eval("2 * -3") == -6.0);
  CHECK(eval("pow(2, 10)") == 1024.0);
  CHECK(eval("exp(0)") == 1.0);
  CHECK(eval("vol * 4", 0.5) == 2.0);
  CHECK(eval("1.5e2") == 150.0);
}

TEST_CASE("parse errors carry positions") {
  try {
    PropensityExpr::parse("k1*(A");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("unbalanced parenthesis") != std::string::npos);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(PropensityExpr::parse("k1 $ A"), ParseError);
  CHECK_THROWS_AS(PropensityExpr::parse("A)"), ParseError);
  CHECK_THROWS_AS(PropensityExpr::parse(""), ParseError);
  CHECK_THROWS_AS(PropensityExpr::parse("foo(A)"), ParseError);
  CHECK_THROWS_AS(PropensityExpr::parse("min(A)"), ParseError);
  CHECK_THROWS_AS(PropensityExpr::parse("A +"), ParseError);
}

TEST_CASE("unresolved identifier at bind time") {
  Env env{{"A"}, {}};
  try {
    env.bind("A * kx");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.column() == 4);
  }
}

TEST_CASE("dependencies list the species read") {
  Env env{{"A", "B", "C"}, {{"k", 1.0}}};
  auto b = env.bind("k * C * A + C");
  CHECK(b.dependencies() == std::vector<std::size_t>{0, 2});
}

TEST_CASE("pretty print then parse is the identity on trees") {
  RandomStream rng(11);
  Env env{{"A", "B"}, {{"k1", 1.7}}};
  std::vector<std::int64_t> counts{4, 9};
  for (int i = 0; i < 500; ++i) {
    const auto src = random_expr(rng, 4);
    const auto tree = PropensityExpr::parse(src);
    const auto printed = tree.to_string();
    const auto again = PropensityExpr::parse(printed);
    INFO(src << "  ->  " << printed);
    REQUIRE(tree.same_tree(again));
    CHECK(again.to_string() == printed);
    const double x = env.bind(src).evaluate(counts, 0.3);
    const double y = env.bind(printed).evaluate(counts, 0.3);
    if (std::isnan(x)) {
      CHECK(std::isnan(y));
    } else {
      CHECK(x == y);
    }
  }
}
