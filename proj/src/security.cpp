#include "tracepi/security.hpp"

#include <algorithm>

namespace tracepi {

namespace {

// The enumeration order behind positional variable indices.
std::vector<std::string> enumerated_vars(const Process& a) {
  std::set<std::string> fv = free_vars(a);
  for (const auto& d : domain(a)) fv.erase(d);
  return {fv.begin(), fv.end()};
}

void require_static_over(const Formula& delta, const std::string& x, const std::string& who) {
  if (!is_static(delta))
    throw LogicError(who + " needs a static condition, got " + formula_to_string(delta));
  for (const auto& v : formula_vars(delta))
    if (v != x)
      throw LogicError(who + " condition mentions " + v + ", expected only " + x);
}

Formula apply_slot(const SlotFormula& d, const std::string& x) {
  return formula_rename_vars(d.body, {{d.slot, x}});
}

// First index of tr at which the body of a G formula fails; the caller
// guarantees one exists.
std::size_t failing_index(const Formula& body, const Process& a, const Assignment& rho,
                          const Trace& tr, const Signature& sig, const RewriteSystem& rs,
                          const LogicOptions& opts) {
  for (std::size_t j = 0; j <= tr.length(); ++j)
    if (!eval_modal(body, a, rho, tr, j, sig, rs, opts).value) return j;
  return tr.length();
}

PropertyReport from_satisfaction(PropertyReport rep, const Satisfaction& s, const Formula& body,
                                 const Process& a, const Signature& sig, const RewriteSystem& rs,
                                 const LogicOptions& opts) {
  if (!s.holds) {
    rep.verdict = PropertyVerdict::Fails;
    PropertyCounterexample ce;
    ce.assignment = *s.rho;
    ce.trace = *s.counterexample;
    ce.index = failing_index(body, a, ce.assignment, ce.trace, sig, rs, opts);
    rep.counterexample = std::move(ce);
  } else {
    rep.verdict = s.bounded ? PropertyVerdict::BoundedHolds : PropertyVerdict::Holds;
  }
  return rep;
}

}  // namespace

std::string property_verdict_to_string(PropertyVerdict v) {
  switch (v) {
    case PropertyVerdict::Holds:
      return "holds";
    case PropertyVerdict::Fails:
      return "fails";
    default:
      return "bounded-holds";
  }
}

PropertyReport minimal_secrecy(const Process& a, const std::string& x, const Formula& delta,
                               const Signature& sig, const RewriteSystem& rs,
                               const LogicOptions& opts) {
  require_static_over(delta, x, "minimal secrecy");
  PropertyReport rep;
  rep.property = "minimal-secrecy";
  rep.variables = {x};
  Formula body = Formula::implies(delta, Formula::possible(Formula::lnot(delta)));
  Satisfaction s = satisfies(a, Formula::globally(body), sig, rs, opts);
  return from_satisfaction(std::move(rep), s, body, a, sig, rs, opts);
}

PropertyReport total_secrecy(const Process& a, const std::string& x,
                             const std::vector<std::string>& ys, const Signature& sig,
                             const RewriteSystem& rs, const LogicOptions& opts) {
  PropertyReport rep;
  rep.property = "total-secrecy";
  rep.variables = {x};
  rep.variables.insert(rep.variables.end(), ys.begin(), ys.end());
  rep.method = "equivalence-characterization";

  std::set<std::string> taken = free_vars(a);
  for (const auto& d : domain(a)) taken.insert(d);
  std::string fresh = x + "'";
  while (taken.count(fresh)) fresh += "'";

  FreshSource fs;
  Process renamed = substitute(a, {{x, Term::var(fresh)}}, fs);
  // With free variables the comparison runs over the name instantiation
  // pool only, so agreement cannot be promoted to an exact verdict.
  std::set<std::string> open = free_vars(a);
  for (const auto& d : domain(a)) open.erase(d);
  EquivResult e = trace_equiv(a, renamed, sig, rs, opts.trace);
  switch (e.verdict) {
    case Verdict::Equivalent:
      rep.verdict = open.empty() ? PropertyVerdict::Holds : PropertyVerdict::BoundedHolds;
      if (!open.empty()) rep.note = "agreement over the name instantiation pool";
      break;
    case Verdict::BoundedEquivalent:
      rep.verdict = PropertyVerdict::BoundedHolds;
      break;
    case Verdict::Inequivalent: {
      rep.verdict = PropertyVerdict::Fails;
      PropertyCounterexample ce;
      ce.assignment = Assignment(e.assignment.begin(), e.assignment.end());
      ce.trace = *e.witness;
      ce.index = ce.trace.length();
      rep.counterexample = std::move(ce);
      rep.note = e.witness_from_left ? "unmirrored run of the original"
                                     : "unmirrored run of the renamed variant";
      break;
    }
  }
  return rep;
}

PropertyReport role_interchangeability(const Process& a, std::size_t i,
                                       const SlotFormula& k_delta,
                                       const std::vector<SlotFormula>& deltas,
                                       const Signature& sig, const RewriteSystem& rs,
                                       const LogicOptions& opts) {
  std::vector<std::string> xs = enumerated_vars(a);
  if (xs.empty()) {
    PropertyReport rep;
    rep.property = "role-interchangeability";
    rep.verdict = PropertyVerdict::Holds;
    rep.method = "equivalence-characterization";
    rep.note = "no free variables; the swap is the identity";
    return rep;
  }
  if (i >= xs.size())
    throw LogicError("variable index " + std::to_string(i) + " out of range: the process has " +
                     std::to_string(xs.size()) + " free variables");
  auto check_slots = [&](const SlotFormula& d) {
    if (!is_static(d.body))
      throw LogicError("role conditions must be static, got " + formula_to_string(d.body));
    for (const auto& v : formula_vars(d.body))
      if (v != d.slot && std::find(xs.begin(), xs.end(), v) != xs.end())
        throw LogicError("role condition parameter " + v + " collides with a process variable");
  };
  check_slots(k_delta);
  for (const auto& d : deltas) check_slots(d);

  PropertyReport rep;
  rep.property = "role-interchangeability";
  rep.variables = {xs[i]};
  rep.method = "equivalence-characterization";

  // Sufficient tier: the process is trace equivalent to itself with the
  // target argument swapped against every other.
  std::optional<EquivResult> broken;
  for (std::size_t l = 0; l < xs.size() && !broken; ++l) {
    if (l == i) continue;
    FreshSource fs;
    Process swapped =
        substitute(a, {{xs[i], Term::var(xs[l])}, {xs[l], Term::var(xs[i])}}, fs);
    EquivResult e = trace_equiv(a, swapped, sig, rs, opts.trace);
    if (e.verdict == Verdict::Inequivalent) broken = std::move(e);
  }
  if (!broken) {
    if (xs.size() < 2) {
      // Nothing to swap with: any run mirrors itself.
      rep.verdict = PropertyVerdict::Holds;
      rep.note = "single free variable; vacuously interchangeable";
    } else {
      // The swaps were checked over the name instantiation pool only.
      rep.verdict = PropertyVerdict::BoundedHolds;
      rep.note = "argument-swap equivalence over the name instantiation pool";
    }
    return rep;
  }
  if (xs.size() == 2) {
    // With two variables swap equivalence is also necessary.
    rep.verdict = PropertyVerdict::Fails;
    PropertyCounterexample ce;
    ce.assignment = Assignment(broken->assignment.begin(), broken->assignment.end());
    ce.trace = *broken->witness;
    ce.index = ce.trace.length();
    rep.counterexample = std::move(ce);
    rep.note = "swap inequivalence; definitive with two variables";
    return rep;
  }

  // The sufficient condition failed and the swap verdict decides nothing;
  // evaluate the defining formula directly.
  rep.method = "direct-logic";
  rep.note = "sufficient-condition-failed; direct check";
  Formula guard = apply_slot(k_delta, xs[i]);
  Formula all = Formula::top();
  for (const auto& xl : xs)
    for (const auto& dj : deltas) {
      Formula swap_possible = Formula::possible(
          Formula::land(apply_slot(k_delta, xl), apply_slot(dj, xs[i])));
      all = Formula::land(all, Formula::implies(apply_slot(dj, xl), swap_possible));
    }
  Formula body = Formula::implies(guard, all);
  Satisfaction s = satisfies(a, Formula::globally(body), sig, rs, opts);
  PropertyReport out = from_satisfaction(std::move(rep), s, body, a, sig, rs, opts);
  if (out.verdict == PropertyVerdict::Holds) out.verdict = PropertyVerdict::BoundedHolds;
  return out;
}

PropertyReport openness(const Process& a, const std::string& x, const Formula& delta,
                        const Signature& sig, const RewriteSystem& rs, const LogicOptions& opts) {
  require_static_over(delta, x, "openness");
  PropertyReport rep;
  rep.property = "openness";
  rep.variables = {x};
  Formula body = Formula::implies(delta, Formula::knows(delta));

  std::set<std::string> vars = free_vars(a);
  for (const auto& d : domain(a)) vars.erase(d);
  std::set<std::string> anchors = free_names(a);
  for (const auto& n : formula_names(body)) anchors.insert(n);

  bool bounded = false;
  bool maximality_bounded = false;
  for (const auto& rho : assignment_representatives(vars, anchors)) {
    FreshSource fs;
    Process inst = substitute(a, rho, fs);
    TraceSet ts = traces(inst, sig, rs, opts.trace);
    // A cut or unfolded enumeration cannot certify which runs are maximal,
    // nor that all maximal runs were seen.
    if (ts.truncated || ts.used_replication) maximality_bounded = true;
    if (has_input(inst)) bounded = true;
    for (const auto& tr : ts.traces) {
      if (!is_maximal(tr, sig, rs, opts.trace)) continue;
      EvalResult r = eval_modal(body, a, rho, tr, tr.length(), sig, rs, opts);
      bounded |= r.bounded;
      if (!r.value) {
        rep.verdict = PropertyVerdict::Fails;
        PropertyCounterexample ce;
        ce.assignment = rho;
        ce.trace = tr;
        ce.index = tr.length();
        rep.counterexample = std::move(ce);
        return rep;
      }
    }
  }
  rep.verdict =
      (bounded || maximality_bounded) ? PropertyVerdict::BoundedHolds : PropertyVerdict::Holds;
  if (maximality_bounded) rep.note = "maximality-bounded";
  return rep;
}

}  // namespace tracepi
