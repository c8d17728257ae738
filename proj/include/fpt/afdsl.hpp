#pragma once

// Adapted-function terms: indicator and clipped-polynomial bases, pointwise
// compositions, and conditioning (f|t). Terms are immutable DAGs; evaluation
// is exact and memoized per node.
//
// Concrete syntax (whitespace ignored):
//   term     := base | compose | cond
//   base     := "ind" "{" label ("," label)* "}"
//             | "poly" "[" rational ("," rational)* ";" index ("," index)* "]"
//   compose  := ("prod" | "min" | "max") "(" term ("," term)* ")"
//             | "const" "[" rational "]"
//             | "affine" "[" rational ("," rational)* "]" "(" term ("," term)* ")"
//   cond     := "(" term "|" integer ")"
// A path point is named by its labels joined with ':' inside ind{...}.
// poly[a0,...,ak; i1,...,im] is clip(sum_j a_j y^j) with y the sum of the
// payload coordinates i1..im (0-based, summed over the path for paths).
// affine[a0,...,am](t1,...,tm) is clip(a0 + sum_i a_i t_i).

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fpt/prediction.hpp"

namespace fpt {

enum class TermKind { kIndicator, kPoly, kProd, kMin, kMax, kConst, kAffine, kCond };

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
  TermKind kind;
  std::vector<std::string> labels;   // kIndicator
  std::vector<Rational> params;      // kPoly coefficients, kConst value, kAffine a0..am
  std::vector<std::size_t> indices;  // kPoly payload coordinates
  std::vector<Term> children;
  std::size_t time = 0;  // kCond
  int rank = 0;
  std::set<std::size_t> times;
};

// Constructors validate arity and parameter ranges (kInvalidArgument).
Term ind(std::vector<std::string> labels);
Term poly(std::vector<Rational> coeffs, std::vector<std::size_t> indices);
Term prod(std::vector<Term> children);
Term min_of(std::vector<Term> children);
Term max_of(std::vector<Term> children);
Term constant(Rational c);
Term affine(std::vector<Rational> coeffs, std::vector<Term> children);
Term cond(Term child, std::size_t t);

// Throws SyntaxError (kSyntaxError, with byte position) or kUnknownFunction.
Term parse_term(std::string_view text);
// Canonical form without whitespace; parse_term(print(t)) prints identically.
std::string print(const Term& term);

// Exact evaluator bound to one filtered random variable with level-0 values.
// Results are cached per term node, so shared subterms are evaluated once.
class Evaluator {
 public:
  explicit Evaluator(const FilteredRandomVariable& x);

  // One value per atom. Throws kBadTimestep, kUnknownState, kInvalidArgument.
  const std::vector<Rational>& eval(const Term& term);
  Rational expectation(const Term& term);

  [[nodiscard]] const FilteredRandomVariable& variable() const { return x_; }

 private:
  std::vector<Rational> compute(const TermNode& node);
  Rational base_value(const TermNode& node, NestedValue v) const;

  const FilteredRandomVariable& x_;
  std::unordered_map<const TermNode*, std::vector<Rational>> memo_;
  // Keeps memoized nodes alive so their addresses stay unique.
  std::vector<Term> pinned_;
};

std::map<std::string, Rational> eval(const Term& term, const FilteredRandomVariable& x);
Rational expectation(const Term& term, const FilteredRandomVariable& x);

// A rank-0 term at a single point (state or path). Throws kInvalidArgument
// when the term conditions.
Rational eval_point(const Term& term, std::shared_ptr<const StateSpace> states, NestedValue point);

struct FamilyOptions {
  // Conditioning times; empty means 1..N.
  std::vector<std::size_t> times;
  // Upper bound on generated terms; exceeding it raises kBudgetExceeded.
  std::size_t max_terms = 200000;
};

// All nonempty indicator sets over `labels` (the rank-0 indicator algebra).
std::vector<Term> indicator_algebra(const std::vector<std::string>& labels,
                                    std::size_t max_terms = 1u << 16);

// A finite family of terms of rank <= n that separates the rank-n adapted
// distributions of the given instances (same N, same state space, level-0
// values). Built level by level: conditioned indicators of the previous
// level's classes, their pairwise products, and exact class indicators
// assembled from clipped-affine tents; terms whose values coincide on every
// atom of every instance are dropped.
std::vector<Term> separating_family(std::span<const FilteredRandomVariable> instances, int n,
                                    const FamilyOptions& options = {});

// Compares x and y on separating_family({x, y}, n). Throws kIncomparable.
bool af_equiv(const FilteredRandomVariable& x, const FilteredRandomVariable& y, int n,
              const FamilyOptions& options = {});

}  // namespace fpt
