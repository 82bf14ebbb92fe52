#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tracepi/equivalence.hpp"

namespace tracepi {

class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Formulas over a recorded run.  The static sublanguage (Top, Eq, InDom and
// their Or/Not combinations) reads only the frame at one index; the modal
// layer adds the step observer <mu>-, the future operator F and the
// knowledge operator K.  G, P, conjunction, implication and disequality are
// abbreviations and expand into the core constructors on construction.
class Formula {
 public:
  enum class Kind { Top, Eq, InDom, Or, Not, Prev, Future, Knows };

  static Formula top();
  static Formula eq(Term lhs, Term rhs);
  static Formula in_dom(Term t);
  static Formula lor(Formula l, Formula r);
  static Formula lnot(Formula f);
  static Formula prev(Action mu, Formula f);  // <mu>- f: the step into the
                                              // current state was mu, and f
                                              // held before it
  static Formula future(Formula f);
  static Formula knows(Formula f);

  // Abbreviations.
  static Formula land(Formula l, Formula r);     // not(not l or not r)
  static Formula implies(Formula l, Formula r);  // not l or r
  static Formula neq(Term lhs, Term rhs);        // not(lhs = rhs)
  static Formula globally(Formula f);            // not F not f
  static Formula possible(Formula f);            // not K not f

  Kind kind() const { return kind_; }
  const Term& lhs() const { return terms_[0]; }  // Eq / InDom
  const Term& rhs() const { return terms_[1]; }  // Eq
  const Action& action() const;                  // Prev
  const Formula& child(std::size_t i = 0) const { return kids_[i]; }
  std::size_t arity() const { return kids_.size(); }

  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }

 private:
  Formula(Kind k, std::vector<Term> ts, std::vector<Formula> kids)
      : kind_(k), terms_(std::move(ts)), kids_(std::move(kids)) {}
  Kind kind_;
  std::vector<Term> terms_;
  std::vector<Action> action_;  // Prev only
  std::vector<Formula> kids_;
};

// True when the formula stays inside the static sublanguage.
bool is_static(const Formula& f);

// Variables of the formula: test variables plus the free variables of step
// labels (input recipes, channels).  Output aliases are binders of their
// label and are not included.
std::set<std::string> formula_vars(const Formula& f);
std::set<std::string> formula_names(const Formula& f);

// Renames free variables, including those inside step labels.
Formula formula_rename_vars(const Formula& f, const std::map<std::string, std::string>& ren);

std::string formula_to_string(const Formula& f);

// An instantiation of a process's free variables by ground terms.
using Assignment = std::map<std::string, Term>;

// One representative per class of maps vars -> names, where two maps count
// as the same class when a permutation fixing `anchors` carries one to the
// other.  A class is a choice, per variable, of either an anchor or a fresh
// name, fresh names identified only up to the partition they induce.  The
// fresh supply is drawn from `fresh` (minus anchors) and topped up with
// reserved #f names.  Deterministic order: anchors sorted, partitions in
// restricted-growth order over sorted variables.
std::vector<Assignment> assignment_representatives(const std::set<std::string>& vars,
                                                   const std::set<std::string>& anchors,
                                                   const std::vector<std::string>& fresh = {});

// Exploration bounds for the evaluator.  The trace pool also bounds the
// universal quantification over closed terms for formula variables that are
// neither assigned nor aliases of the run.  By default recipes are atoms
// only (domain variables and public names, no invented constants, no
// compounds); raise the pool settings to widen both quantifications.
struct LogicOptions {
  TraceOptions trace;
  LogicOptions() {
    trace.pool.constants.clear();
    trace.pool.compound_depth = 0;
  }
};

// Truth of a static formula at index i of a recorded run of a`rho`.
// Every variable of delta must be assigned by rho or lie in the domain at
// index i; otherwise UnboundVariable is raised.  Tests are decided against
// the frame at index i, modulo the theory.
bool eval_static(const Formula& delta, const Process& a, const Assignment& rho, const Trace& tr,
                 std::size_t i, const RewriteSystem& rs);

// Truth of a modal formula at index i.  Formula variables beyond rho and the
// run's aliases are universally quantified over the ground pool terms, and
// the result is flagged bounded.  A test naming an alias at an index before
// the alias is published is false.  K quantifies over assignment
// representatives anchored at the names of the pattern, the run prefix and
// the formula, and over every run of the reinstantiated pattern whose first
// i steps mirror the reference prefix; it requires a name-valued rho.
// bounded reports every truncation met on the way.
struct EvalResult {
  bool value = false;
  bool bounded = false;
};
EvalResult eval_modal(const Formula& phi, const Process& a, const Assignment& rho, const Trace& tr,
                      std::size_t i, const Signature& sig, const RewriteSystem& rs,
                      const LogicOptions& opts = {});

// a |= phi: every assignment representative, every bounded run, index 0.
// The first failing (assignment, run) pair is returned as counterexample.
struct Satisfaction {
  bool holds = true;
  bool bounded = false;
  std::optional<Assignment> rho;
  std::optional<Trace> counterexample;
};
Satisfaction satisfies(const Process& a, const Formula& phi, const Signature& sig,
                       const RewriteSystem& rs, const LogicOptions& opts = {});

}  // namespace tracepi
