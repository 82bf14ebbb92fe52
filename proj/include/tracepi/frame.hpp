#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tracepi/process.hpp"
#include "tracepi/structural.hpp"
#include "tracepi/term.hpp"

namespace tracepi {

// nu names. sigma — the attacker-visible part of a process.
struct Frame {
  std::vector<std::string> bound_names;
  std::map<std::string, Term> subst;

  std::set<std::string> dom() const;
  std::set<std::string> free_names() const;
  Process to_process() const;
};

// fr(a), flattened to (names, subst) with images normalized and applied
// through.  Throws ProcessError on domain clashes or cyclic substitutions.
Frame frame_of(const Process& a, const RewriteSystem& rs);

// (M = N)phi: false unless v(M) u v(N) lies in dom(phi); otherwise the frame
// is alpha-converted away from the test's names and M sigma = N sigma is
// decided modulo the theory.
bool test_holds(const Term& m, const Term& n, const Frame& phi, const RewriteSystem& rs);

// Saturation: the deducible values of a frame, each with its least recipe.
// Starts from the domain and the public pool, then closes under symbol
// application, keeping a result only when a rule strictly reduced it or when
// it is a subterm of the frame (intermediate key material).  Recipe pairs
// that collide on a value are recorded as candidate tests.
struct Saturation {
  std::vector<std::pair<Term, Term>> entries;    // (value, least recipe), discovery order
  std::vector<std::pair<Term, Term>> equations;  // recipe pairs agreeing on a value
  bool complete = false;
};
Saturation saturate(const Frame& phi, const std::vector<Term>& pool,
                    const RewriteSystem& rs, std::size_t max_rounds);

struct DeduceResult {
  std::optional<Term> recipe;
  // When no recipe is returned: true means underivable at any depth, false
  // means the search was cut off (depth exhausted before saturation settled
  // or the recipe outgrew the depth bound).
  bool definitive = false;
};
// Least recipe (in the term order, built bottom-up) whose frame value equals
// `target` modulo the theory, searching recipes of App-depth <= depth over
// dom(phi) plus the public pool.  The target is read with the frame's
// binders in scope (it may mention restricted names).  The default pool is
// the frame's free names plus the target's names minus the bound ones.
DeduceResult deduce(const Frame& phi, const Term& target, const RewriteSystem& rs,
                    std::size_t depth,
                    const std::optional<std::vector<Term>>& pool = std::nullopt);

struct StaticEquivResult {
  bool equivalent = false;
  bool domain_mismatch = false;
  std::optional<std::pair<Term, Term>> witness;  // a test true in one frame only
};

// Decision procedure: saturate both frames over a shared pool (free names of
// both plus two reserved fresh names), then compare recipe values grouped by
// frame — two recipes agreeing in one frame and not the other are a witness.
// The candidate universe is the saturated recipes closed under one symbol
// application and under rule left-hand-side instantiation.
StaticEquivResult static_equiv(const Frame& phi, const Frame& psi, const RewriteSystem& rs);

// Differential baseline: enumerate recipes to App-depth `depth` over the same
// pool, pruning expansion to terms whose value stays relevant to either
// frame.  Sound; complete only up to the depth bound.
StaticEquivResult static_equiv_oracle(const Frame& phi, const Frame& psi,
                                      const RewriteSystem& rs, std::size_t depth);

}  // namespace tracepi
