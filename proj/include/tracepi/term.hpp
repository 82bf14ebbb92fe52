#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace tracepi {

// Terms over a signature: names, variables, and function applications.
// Names and variables live in separate lexical spaces; equality never
// identifies a name with a variable of the same spelling.
class Term {
public:
  enum class Kind { Name, Var, App };

  static Term name(std::string id);
  static Term var(std::string id);
  static Term app(std::string sym, std::vector<Term> args);

  Kind kind() const { return kind_; }
  const std::string& head() const { return head_; }
  const std::vector<Term>& args() const { return args_; }
  bool is_name() const { return kind_ == Kind::Name; }
  bool is_var() const { return kind_ == Kind::Var; }
  bool is_app() const { return kind_ == Kind::App; }
  bool is_ground() const;

  std::size_t size() const;   // node count
  std::size_t depth() const;  // 0 for atoms, 1+max(args) for applications

  bool operator==(const Term& o) const;
  bool operator!=(const Term& o) const { return !(*this == o); }

private:
  Term(Kind k, std::string h, std::vector<Term> a)
      : kind_(k), head_(std::move(h)), args_(std::move(a)) {}
  Kind kind_;
  std::string head_;
  std::vector<Term> args_;
};

// Total order on terms: size first, then atoms before applications,
// then head spelling, then arguments lexicographically.  Used wherever a
// deterministic choice between terms is needed (canonical forms, least
// witnesses, hook orientation).
bool term_less(const Term& a, const Term& b);

std::set<std::string> term_names(const Term& t);
std::set<std::string> term_vars(const Term& t);

// Simultaneous substitution of variables; terms have no binders so no
// capture can occur here.
Term term_subst(const Term& t, const std::map<std::string, Term>& sub);

// Rename names (used by alpha conversion of surrounding binders).
Term term_rename_names(const Term& t, const std::map<std::string, std::string>& ren);

std::string term_to_string(const Term& t);

struct TheoryError : std::runtime_error {
  explicit TheoryError(const std::string& what) : std::runtime_error(what) {}
};

// Function symbols with fixed arities.
class Signature {
public:
  void declare(const std::string& sym, std::size_t arity);
  bool known(const std::string& sym) const;
  std::size_t arity(const std::string& sym) const;  // throws TheoryError on unknown
  const std::map<std::string, std::size_t>& symbols() const { return arities_; }
  // Throws UnknownSymbol/ArityMismatch if t uses undeclared symbols or wrong arities.
  void check(const Term& t) const;

private:
  std::map<std::string, std::size_t> arities_;
};

struct RewriteRule {
  Term lhs;
  Term rhs;
};

// A convergent subterm rewrite system plus optional per-symbol commutation
// hooks of the shape f(x,g(y)) = f(y,g(x)).  The hook is handled by
// orienting each f-application to the least of the two axiom variants, which
// yields canonical forms for that single equation family.
class RewriteSystem {
public:
  explicit RewriteSystem(Signature sig) : sig_(std::move(sig)) {}

  // Throws TheoryError unless vars(rhs) <= vars(lhs), the lhs is an
  // application, and the rhs is a proper subterm of the lhs.
  void add_rule(Term lhs, Term rhs);
  // Registers the axiom f(x,g(y)) = f(y,g(x)).
  void add_commutation(const std::string& f, const std::string& g);

  const Signature& sig() const { return sig_; }
  const std::vector<RewriteRule>& rules() const { return rules_; }
  const std::map<std::string, std::string>& commutations() const { return comm_; }
  std::size_t max_lhs_depth() const;

  // Innermost-leftmost normalization; commutation hooks are applied after a
  // node is otherwise normal.
  Term normalize(const Term& t) const;
  bool equal(const Term& m, const Term& n) const;  // equality modulo the theory

private:
  Term normalize_node(const Term& t) const;
  Signature sig_;
  std::vector<RewriteRule> rules_;
  std::map<std::string, std::string> comm_;  // f -> g
};

// First-order matching: extends `binding` so that pattern*binding == t,
// returns false (leaving binding in unspecified state) if impossible.
bool term_match(const Term& pattern, const Term& t, std::map<std::string, Term>& binding);

bool is_proper_subterm(const Term& sub, const Term& of);

}  // namespace tracepi
