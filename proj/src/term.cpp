#include "tracepi/term.hpp"

#include <algorithm>
#include <sstream>

namespace tracepi {

Term Term::name(std::string id) { return Term(Kind::Name, std::move(id), {}); }
Term Term::var(std::string id) { return Term(Kind::Var, std::move(id), {}); }
Term Term::app(std::string sym, std::vector<Term> args) {
  return Term(Kind::App, std::move(sym), std::move(args));
}

bool Term::is_ground() const {
  if (kind_ == Kind::Var) return false;
  for (const auto& a : args_)
    if (!a.is_ground()) return false;
  return true;
}

std::size_t Term::size() const {
  std::size_t n = 1;
  for (const auto& a : args_) n += a.size();
  return n;
}

std::size_t Term::depth() const {
  std::size_t d = 0;
  for (const auto& a : args_) d = std::max(d, a.depth() + 1);
  return d;
}

bool Term::operator==(const Term& o) const {
  if (kind_ != o.kind_ || head_ != o.head_ || args_.size() != o.args_.size()) return false;
  for (std::size_t i = 0; i < args_.size(); ++i)
    if (!(args_[i] == o.args_[i])) return false;
  return true;
}

static int kind_rank(Term::Kind k) {
  switch (k) {
    case Term::Kind::Name: return 0;
    case Term::Kind::Var: return 1;
    case Term::Kind::App: return 2;
  }
  return 3;
}

bool term_less(const Term& a, const Term& b) {
  std::size_t sa = a.size(), sb = b.size();
  if (sa != sb) return sa < sb;
  int ka = kind_rank(a.kind()), kb = kind_rank(b.kind());
  if (ka != kb) return ka < kb;
  if (a.head() != b.head()) return a.head() < b.head();
  for (std::size_t i = 0; i < a.args().size() && i < b.args().size(); ++i) {
    if (term_less(a.args()[i], b.args()[i])) return true;
    if (term_less(b.args()[i], a.args()[i])) return false;
  }
  return a.args().size() < b.args().size();
}

static void collect(const Term& t, Term::Kind k, std::set<std::string>& out) {
  if (t.kind() == k) out.insert(t.head());
  for (const auto& a : t.args()) collect(a, k, out);
}

std::set<std::string> term_names(const Term& t) {
  std::set<std::string> s;
  collect(t, Term::Kind::Name, s);
  return s;
}

std::set<std::string> term_vars(const Term& t) {
  std::set<std::string> s;
  collect(t, Term::Kind::Var, s);
  return s;
}

Term term_subst(const Term& t, const std::map<std::string, Term>& sub) {
  switch (t.kind()) {
    case Term::Kind::Name: return t;
    case Term::Kind::Var: {
      auto it = sub.find(t.head());
      return it == sub.end() ? t : it->second;
    }
    case Term::Kind::App: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(term_subst(a, sub));
      return Term::app(t.head(), std::move(args));
    }
  }
  return t;
}

Term term_rename_names(const Term& t, const std::map<std::string, std::string>& ren) {
  switch (t.kind()) {
    case Term::Kind::Name: {
      auto it = ren.find(t.head());
      return it == ren.end() ? t : Term::name(it->second);
    }
    case Term::Kind::Var: return t;
    case Term::Kind::App: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(term_rename_names(a, ren));
      return Term::app(t.head(), std::move(args));
    }
  }
  return t;
}

std::string term_to_string(const Term& t) {
  std::ostringstream os;
  if (t.kind() != Term::Kind::App) {
    os << t.head();
    return os.str();
  }
  os << t.head() << '(';
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (i) os << ',';
    os << term_to_string(t.args()[i]);
  }
  os << ')';
  return os.str();
}

void Signature::declare(const std::string& sym, std::size_t arity) {
  auto it = arities_.find(sym);
  if (it != arities_.end() && it->second != arity)
    throw TheoryError("symbol '" + sym + "' redeclared with different arity");
  arities_[sym] = arity;
}

bool Signature::known(const std::string& sym) const { return arities_.count(sym) != 0; }

std::size_t Signature::arity(const std::string& sym) const {
  auto it = arities_.find(sym);
  if (it == arities_.end()) throw TheoryError("unknown symbol '" + sym + "'");
  return it->second;
}

void Signature::check(const Term& t) const {
  if (t.is_app()) {
    if (!known(t.head())) throw TheoryError("unknown symbol '" + t.head() + "'");
    if (arity(t.head()) != t.args().size())
      throw TheoryError("symbol '" + t.head() + "' expects " +
                        std::to_string(arity(t.head())) + " arguments, got " +
                        std::to_string(t.args().size()));
  }
  for (const auto& a : t.args()) check(a);
}

bool is_proper_subterm(const Term& sub, const Term& of) {
  for (const auto& a : of.args()) {
    if (a == sub || is_proper_subterm(sub, a)) return true;
  }
  return false;
}

void RewriteSystem::add_rule(Term lhs, Term rhs) {
  sig_.check(lhs);
  sig_.check(rhs);
  if (!lhs.is_app()) throw TheoryError("rewrite left-hand side must be an application");
  auto lv = term_vars(lhs), rv = term_vars(rhs);
  for (const auto& v : rv)
    if (!lv.count(v))
      throw TheoryError("rewrite rule introduces variable '" + v + "' on the right");
  if (!term_names(lhs).empty() || !term_names(rhs).empty())
    throw TheoryError("rewrite rules must not mention names");
  if (!is_proper_subterm(rhs, lhs))
    throw TheoryError("right-hand side '" + term_to_string(rhs) +
                      "' is not a proper subterm of '" + term_to_string(lhs) + "'");
  rules_.push_back({std::move(lhs), std::move(rhs)});
}

void RewriteSystem::add_commutation(const std::string& f, const std::string& g) {
  if (!sig_.known(f) || sig_.arity(f) != 2)
    throw TheoryError("commutation requires binary symbol '" + f + "'");
  if (!sig_.known(g) || sig_.arity(g) != 1)
    throw TheoryError("commutation requires unary symbol '" + g + "'");
  comm_[f] = g;
}

std::size_t RewriteSystem::max_lhs_depth() const {
  std::size_t d = 0;
  for (const auto& r : rules_) d = std::max(d, r.lhs.depth());
  return d;
}

bool term_match(const Term& pattern, const Term& t, std::map<std::string, Term>& binding) {
  switch (pattern.kind()) {
    case Term::Kind::Var: {
      auto it = binding.find(pattern.head());
      if (it != binding.end()) return it->second == t;
      binding.emplace(pattern.head(), t);
      return true;
    }
    case Term::Kind::Name:
      return t.is_name() && t.head() == pattern.head();
    case Term::Kind::App: {
      if (!t.is_app() || t.head() != pattern.head() || t.args().size() != pattern.args().size())
        return false;
      for (std::size_t i = 0; i < pattern.args().size(); ++i)
        if (!term_match(pattern.args()[i], t.args()[i], binding)) return false;
      return true;
    }
  }
  return false;
}

Term normalize_rulestep_only(const RewriteSystem& rs, const Term& t);

// One rewrite attempt at the root; arguments expected normal already.
Term RewriteSystem::normalize_node(const Term& t) const {
  if (t.is_app()) {
    for (const auto& r : rules_) {
      std::map<std::string, Term> b;
      if (term_match(r.lhs, t, b)) {
        // Contractum may expose fresh redexes (nested rule instances), so
        // renormalize from scratch.
        return normalize(term_subst(r.rhs, b));
      }
    }
    auto c = comm_.find(t.head());
    if (c != comm_.end()) {
      const Term& snd = t.args()[1];
      if (snd.is_app() && snd.head() == c->second) {
        // f(A, g(B)) = f(B, g(A)); keep the least variant.
        Term flipped = Term::app(t.head(), {snd.args()[0], Term::app(c->second, {t.args()[0]})});
        flipped = normalize_rulestep_only(*this, flipped);
        if (term_less(flipped, t)) return flipped;
      }
    }
  }
  return t;
}

// Rules only, no hooks: used to tidy a hook-flipped candidate without
// recursing back into the hook (the flip is its own inverse).
static Term normalize_rulestep_only_impl(const RewriteSystem& rs, const Term& t) {
  if (!t.is_app()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(normalize_rulestep_only_impl(rs, a));
  Term cur = Term::app(t.head(), std::move(args));
  for (const auto& r : rs.rules()) {
    std::map<std::string, Term> b;
    if (term_match(r.lhs, cur, b)) return normalize_rulestep_only_impl(rs, term_subst(r.rhs, b));
  }
  return cur;
}

Term normalize_rulestep_only(const RewriteSystem& rs, const Term& t) {
  return normalize_rulestep_only_impl(rs, t);
}

Term RewriteSystem::normalize(const Term& t) const {
  if (!t.is_app()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(normalize(a));
  return normalize_node(Term::app(t.head(), std::move(args)));
}

bool RewriteSystem::equal(const Term& m, const Term& n) const {
  return normalize(m) == normalize(n);
}

}  // namespace tracepi
