#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tracepi/term.hpp"

namespace tracepi {

struct ProcessError : std::runtime_error {
  explicit ProcessError(const std::string& what) : std::runtime_error(what) {}
};

// Extended processes.  Active substitutions {M/x} and variable restrictions
// may occur under prefixes; they only become part of the frame once every
// prefix guarding them has fired.
class Process {
public:
  enum class Kind {
    Nil,
    Output,        // ch<payload>.cont
    Input,         // ch(binder).cont
    RestrictName,  // new n. body
    RestrictVar,   // new x. body
    Match,         // if lhs = rhs then thenk else elsek
    Choice,        // left + right (commutative, not associative)
    Parallel,      // n-ary composition
    Replicate,     // !body
    ActiveSubst,   // {term/binder}
  };

  static Process nil();
  static Process output(Term ch, Term payload, Process cont);
  static Process input(Term ch, std::string var, Process cont);
  static Process restrict_name(std::string n, Process body);
  static Process restrict_var(std::string x, Process body);
  static Process match(Term lhs, Term rhs, Process then_k, Process else_k);
  static Process choice(Process l, Process r);
  static Process parallel(std::vector<Process> children);
  static Process replicate(Process body);
  static Process active_subst(std::string var, Term term);

  Kind kind() const { return kind_; }
  const std::string& binder() const { return binder_; }
  const Term& lhs() const { return terms_[0]; }  // channel / match-lhs / subst image
  const Term& rhs() const { return terms_[1]; }  // payload / match-rhs
  const std::vector<Process>& children() const { return kids_; }
  const Process& child(std::size_t i) const { return kids_[i]; }

  std::size_t node_count() const;
  bool operator==(const Process& o) const;
  bool operator!=(const Process& o) const { return !(*this == o); }

private:
  Process(Kind k, std::vector<Term> ts, std::string b, std::vector<Process> kids)
      : kind_(k), terms_(std::move(ts)), binder_(std::move(b)), kids_(std::move(kids)) {}
  Kind kind_;
  std::vector<Term> terms_;
  std::string binder_;
  std::vector<Process> kids_;
};

// Binder accounting.
std::set<std::string> free_names(const Process& a);
std::set<std::string> bound_names(const Process& a);
std::set<std::string> free_vars(const Process& a);
std::set<std::string> bound_vars(const Process& a);        // input- and nu-bound
std::set<std::string> restricted_vars(const Process& a);   // nu-bound only
std::set<std::string> domain(const Process& a);            // active substitutions in scope
std::set<std::string> all_names(const Process& a);
std::set<std::string> all_vars(const Process& a);

// Domain a substitution would have once all guarding prefixes fire; used to
// validate variable restrictions that bind a future alias.
std::set<std::string> eventual_domain(const Process& a);

bool is_closed(const Process& a);  // fv(a) == dom(a)
bool is_plain(const Process& a);   // no ActiveSubst / RestrictVar anywhere
bool has_replication(const Process& a);
bool has_input(const Process& a);

// Deterministic supply of reserved identifiers ('#' prefix is rejected by the
// parser, so these can never collide with user input).  The counter is the
// only mutable state in the toolkit; keep one per job.
struct FreshSource {
  std::size_t names = 0;
  std::size_t vars = 0;
  std::string fresh_name() { return "#n" + std::to_string(names++); }
  std::string fresh_var() { return "#v" + std::to_string(vars++); }
};

inline std::string alias_var(std::size_t step) { return "#x" + std::to_string(step); }

// Capture-avoiding simultaneous substitution of free variables.  Binders are
// renamed (via fs) when they would capture.  A substitution hitting the
// domain variable of an active substitution must map it to a variable.
Process substitute(const Process& a, const std::map<std::string, Term>& sub, FreshSource& fs);

// Capture-avoiding renaming of free names.
Process rename_free_names(const Process& a, const std::map<std::string, std::string>& ren,
                          FreshSource& fs);

// Renames binders so that all binders are pairwise distinct and disjoint from
// `avoid_names`/`avoid_vars` and from the free identifiers of `a` itself.
// Binder spellings are kept when already unique.
Process alpha_fresh(const Process& a, const std::set<std::string>& avoid_names,
                    const std::set<std::string>& avoid_vars, FreshSource& fs);

// Well-formedness: parallel domains disjoint, substitution multisets
// cycle-free, variable restrictions bind an (eventual) domain variable.
struct WellFormedness {
  bool ok = true;
  std::string issue;  // DomainClash / Cyclic / RestrictNonDomainVar + detail
};
WellFormedness well_formed(const Process& a);

std::string process_to_string(const Process& a);

}  // namespace tracepi
