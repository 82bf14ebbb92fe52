#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tracepi/process.hpp"
#include "tracepi/term.hpp"

namespace tracepi {

// An admissible order for a substitution multiset: position i's image avoids
// the domain variables at positions <= i.  nullopt when the multiset is
// cyclic.
std::optional<std::vector<std::size_t>>
cycle_free_order(const std::vector<std::pair<std::string, Term>>& bindings);

// Join of two composed substitutions: the combined multiset, reordered
// admissibly and applied through itself until images mention no domain
// variable.  Throws ProcessError on domain clash or cycle.
std::map<std::string, Term> uplus(const std::map<std::string, Term>& sigma,
                                  const std::map<std::string, Term>& rho);

// Decomposition nu names. nu rvars. (subst | plain): every exposed
// restriction floated to the top, exposed substitutions joined and fully
// applied through the plain part, restrictions on domain variables
// discharged.  rvars are restrictions whose variable only enters the domain
// after a prefix fires.  The result is structurally equivalent to the input.
struct PnfResult {
  std::vector<std::string> names;
  std::vector<std::string> rvars;
  std::map<std::string, Term> subst;
  Process plain = Process::nil();
  Process to_process() const;
};
PnfResult pnf(const Process& a);

// Canonical form for deciding structural equivalence: pnf, normalized
// substitution images, parallel components flattened and sorted, exposed
// choices oriented, binders renamed positionally.  Replication is never
// unfolded and nothing under a prefix is rewritten (structural equivalence
// only acts at evaluation-context positions).
struct CanonState {
  std::vector<std::string> names;
  std::vector<std::string> rvars;
  std::map<std::string, Term> subst;
  std::vector<Process> comps;
  Process to_process() const;
};
CanonState canonical(const Process& a, const RewriteSystem& rs);
Process canonical_process(const Process& a, const RewriteSystem& rs);
bool struct_equiv(const Process& a, const Process& b, const RewriteSystem& rs);

}  // namespace tracepi
