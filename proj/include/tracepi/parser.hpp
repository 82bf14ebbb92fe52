#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "tracepi/logic.hpp"
#include "tracepi/process.hpp"
#include "tracepi/term.hpp"

namespace tracepi {

struct ParseError : std::runtime_error {
  std::size_t line;
  std::size_t column;
  ParseError(const std::string& what, std::size_t l, std::size_t c)
      : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + what),
        line(l),
        column(c) {}
};

// Theory files: `fun name/arity.`, `reduc lhs -> rhs.`, `comm f via g.`,
// with `//` line comments.  Identifiers inside rewrite rules are variables.
// Rule validation errors (right side not a subterm, unknown symbols) travel
// as TheoryError.
std::pair<Signature, RewriteSystem> parse_theory(const std::string& text);

// Process files: optional `var x, y.` declarations followed by one process.
//   0, out(M,N).P, in(M,x).P, new id.P, if M=N then P else Q, !P,
//   {M/x}, P|Q, P+Q, (P)        -- `+` binds tighter than `|`.
// An identifier reads as a variable when it is declared, input-bound, or the
// domain of an active substitution anywhere in the file; `new id` restricts
// a variable exactly when id is such a domain.  `#` identifiers are
// reserved for machine output.  Ill-formed results (domain clashes, cyclic
// substitutions, bad restrictions) travel as ProcessError.
Process parse_process(const std::string& text, const Signature& sig);

// Formulas:
//   true, M = N, M != N, M in dom, not f, f or g, f and g, f -> g,
//   G f, F f, K f, P f, <out(M,x)>- f, <in(M,N)>- f, <tau>- f, (f).
// Identifiers in `vars`, step-observer aliases in scope, and `#`-prefixed
// identifiers read as variables; everything else unapplied is a name.
Formula parse_formula(const std::string& text, const Signature& sig,
                      const std::set<std::string>& vars = {});

// Same grammar, but rejects modal operators.
Formula parse_static_formula(const std::string& text, const Signature& sig,
                             const std::set<std::string>& vars = {});

}  // namespace tracepi
