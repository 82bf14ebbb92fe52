#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tracepi/equivalence.hpp"
#include "tracepi/logic.hpp"

namespace tracepi {

enum class PropertyVerdict { Holds, Fails, BoundedHolds };
std::string property_verdict_to_string(PropertyVerdict v);

// A failing instance: the assignment of the process's free variables, the
// recorded run, and the index at which the defining formula fails.  The
// triple replays through eval_modal.
struct PropertyCounterexample {
  Assignment assignment;
  Trace trace;
  std::size_t index = 0;
};

struct PropertyReport {
  std::string property;
  std::vector<std::string> variables;
  PropertyVerdict verdict = PropertyVerdict::Holds;
  std::optional<PropertyCounterexample> counterexample;
  std::string method = "direct-logic";  // or "equivalence-characterization"
  std::string note;                     // extra detail, e.g. "sufficient-condition-failed"
};

// A static formula with one designated slot variable; applying it to a
// variable renames the slot.  Any other variables are parameters and must
// not collide with the process's free variables.
struct SlotFormula {
  std::string slot;
  Formula body;
};

// x stays minimally secret under delta when, whenever delta(x) holds, the
// observer still considers its negation possible: A |= G(delta -> P(not
// delta)).  delta is written over x itself and must be static.
PropertyReport minimal_secrecy(const Process& a, const std::string& x, const Formula& delta,
                               const Signature& sig, const RewriteSystem& rs,
                               const LogicOptions& opts = {});

// x is totally secret when no admissible delta can ever be known to hold of
// it.  Checked through the characterization: the process is trace
// equivalent to itself with x renamed to a fresh variable.  ys lists the
// remaining parameters, for the report only.
PropertyReport total_secrecy(const Process& a, const std::string& x,
                             const std::vector<std::string>& ys, const Signature& sig,
                             const RewriteSystem& rs, const LogicOptions& opts = {});

// The i-th free variable (position in the sorted enumeration of free,
// non-domain variables) plays its role interchangeably with every other
// when, observing k_delta of it and any delta_j of another, the swapped
// attribution is still considered possible.  Tiered check: argument-swap
// trace equivalence is sufficient, and definitive with two variables;
// beyond that a failed swap falls back to direct evaluation of the
// defining formula.
PropertyReport role_interchangeability(const Process& a, std::size_t i,
                                       const SlotFormula& k_delta,
                                       const std::vector<SlotFormula>& deltas,
                                       const Signature& sig, const RewriteSystem& rs,
                                       const LogicOptions& opts = {});

// x is open under delta when at the end of every maximal run the observer
// knows delta(x) whenever it holds: delta(x) -> K delta(x) at |tr|.
PropertyReport openness(const Process& a, const std::string& x, const Formula& delta,
                        const Signature& sig, const RewriteSystem& rs,
                        const LogicOptions& opts = {});

}  // namespace tracepi
