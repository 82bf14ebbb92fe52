#include "tracepi/process.hpp"

#include <algorithm>
#include <sstream>

namespace tracepi {

Process Process::nil() { return Process(Kind::Nil, {}, "", {}); }
Process Process::output(Term ch, Term payload, Process cont) {
  return Process(Kind::Output, {std::move(ch), std::move(payload)}, "", {std::move(cont)});
}
Process Process::input(Term ch, std::string var, Process cont) {
  return Process(Kind::Input, {std::move(ch)}, std::move(var), {std::move(cont)});
}
Process Process::restrict_name(std::string n, Process body) {
  return Process(Kind::RestrictName, {}, std::move(n), {std::move(body)});
}
Process Process::restrict_var(std::string x, Process body) {
  return Process(Kind::RestrictVar, {}, std::move(x), {std::move(body)});
}
Process Process::match(Term lhs, Term rhs, Process then_k, Process else_k) {
  return Process(Kind::Match, {std::move(lhs), std::move(rhs)},
                 "", {std::move(then_k), std::move(else_k)});
}
Process Process::choice(Process l, Process r) {
  return Process(Kind::Choice, {}, "", {std::move(l), std::move(r)});
}
Process Process::parallel(std::vector<Process> children) {
  return Process(Kind::Parallel, {}, "", std::move(children));
}
Process Process::replicate(Process body) {
  return Process(Kind::Replicate, {}, "", {std::move(body)});
}
Process Process::active_subst(std::string var, Term term) {
  return Process(Kind::ActiveSubst, {std::move(term)}, std::move(var), {});
}

std::size_t Process::node_count() const {
  std::size_t n = 1;
  for (const auto& k : kids_) n += k.node_count();
  return n;
}

bool Process::operator==(const Process& o) const {
  if (kind_ != o.kind_ || binder_ != o.binder_ || terms_.size() != o.terms_.size() ||
      kids_.size() != o.kids_.size())
    return false;
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (!(terms_[i] == o.terms_[i])) return false;
  for (std::size_t i = 0; i < kids_.size(); ++i)
    if (!(kids_[i] == o.kids_[i])) return false;
  return true;
}

namespace {

void unite(std::set<std::string>& into, const std::set<std::string>& from) {
  into.insert(from.begin(), from.end());
}

}  // namespace

std::set<std::string> free_names(const Process& a) {
  std::set<std::string> s;
  switch (a.kind()) {
    case Process::Kind::Nil: break;
    case Process::Kind::Output:
      unite(s, term_names(a.lhs()));
      unite(s, term_names(a.rhs()));
      unite(s, free_names(a.child(0)));
      break;
    case Process::Kind::Input:
      unite(s, term_names(a.lhs()));
      unite(s, free_names(a.child(0)));
      break;
    case Process::Kind::RestrictName:
      s = free_names(a.child(0));
      s.erase(a.binder());
      break;
    case Process::Kind::RestrictVar:
      s = free_names(a.child(0));
      break;
    case Process::Kind::Match:
      unite(s, term_names(a.lhs()));
      unite(s, term_names(a.rhs()));
      unite(s, free_names(a.child(0)));
      unite(s, free_names(a.child(1)));
      break;
    case Process::Kind::ActiveSubst:
      s = term_names(a.lhs());
      break;
    default:
      for (const auto& k : a.children()) unite(s, free_names(k));
  }
  return s;
}

std::set<std::string> bound_names(const Process& a) {
  std::set<std::string> s;
  if (a.kind() == Process::Kind::RestrictName) s.insert(a.binder());
  for (const auto& k : a.children()) unite(s, bound_names(k));
  return s;
}

std::set<std::string> free_vars(const Process& a) {
  std::set<std::string> s;
  switch (a.kind()) {
    case Process::Kind::Nil: break;
    case Process::Kind::Output:
      unite(s, term_vars(a.lhs()));
      unite(s, term_vars(a.rhs()));
      unite(s, free_vars(a.child(0)));
      break;
    case Process::Kind::Input: {
      unite(s, term_vars(a.lhs()));
      auto inner = free_vars(a.child(0));
      inner.erase(a.binder());
      unite(s, inner);
      break;
    }
    case Process::Kind::RestrictName:
      s = free_vars(a.child(0));
      break;
    case Process::Kind::RestrictVar:
      s = free_vars(a.child(0));
      s.erase(a.binder());
      break;
    case Process::Kind::Match:
      unite(s, term_vars(a.lhs()));
      unite(s, term_vars(a.rhs()));
      unite(s, free_vars(a.child(0)));
      unite(s, free_vars(a.child(1)));
      break;
    case Process::Kind::ActiveSubst:
      s = term_vars(a.lhs());
      s.insert(a.binder());
      break;
    default:
      for (const auto& k : a.children()) unite(s, free_vars(k));
  }
  return s;
}

std::set<std::string> bound_vars(const Process& a) {
  std::set<std::string> s;
  if (a.kind() == Process::Kind::Input || a.kind() == Process::Kind::RestrictVar)
    s.insert(a.binder());
  for (const auto& k : a.children()) unite(s, bound_vars(k));
  return s;
}

std::set<std::string> restricted_vars(const Process& a) {
  std::set<std::string> s;
  if (a.kind() == Process::Kind::RestrictVar) s.insert(a.binder());
  for (const auto& k : a.children()) unite(s, restricted_vars(k));
  return s;
}

std::set<std::string> domain(const Process& a) {
  std::set<std::string> s;
  switch (a.kind()) {
    case Process::Kind::ActiveSubst:
      s.insert(a.binder());
      break;
    case Process::Kind::Parallel:
      for (const auto& k : a.children()) unite(s, domain(k));
      break;
    case Process::Kind::RestrictName:
      s = domain(a.child(0));
      break;
    case Process::Kind::RestrictVar:
      s = domain(a.child(0));
      s.erase(a.binder());
      break;
    default:
      break;  // prefixes, conditionals, sums and replication export nothing
  }
  return s;
}

std::set<std::string> eventual_domain(const Process& a) {
  std::set<std::string> s;
  switch (a.kind()) {
    case Process::Kind::ActiveSubst:
      s.insert(a.binder());
      break;
    case Process::Kind::RestrictVar:
      s = eventual_domain(a.child(0));
      s.erase(a.binder());
      break;
    default:
      for (const auto& k : a.children()) unite(s, eventual_domain(k));
  }
  return s;
}

std::set<std::string> all_names(const Process& a) {
  auto s = free_names(a);
  unite(s, bound_names(a));
  return s;
}

std::set<std::string> all_vars(const Process& a) {
  auto s = free_vars(a);
  unite(s, bound_vars(a));
  return s;
}

bool is_closed(const Process& a) { return free_vars(a) == domain(a); }

bool is_plain(const Process& a) {
  if (a.kind() == Process::Kind::ActiveSubst || a.kind() == Process::Kind::RestrictVar)
    return false;
  for (const auto& k : a.children())
    if (!is_plain(k)) return false;
  return true;
}

bool has_replication(const Process& a) {
  if (a.kind() == Process::Kind::Replicate) return true;
  for (const auto& k : a.children())
    if (has_replication(k)) return true;
  return false;
}

bool has_input(const Process& a) {
  if (a.kind() == Process::Kind::Input) return true;
  for (const auto& k : a.children())
    if (has_input(k)) return true;
  return false;
}

namespace {

std::set<std::string> image_vars(const std::map<std::string, Term>& sub) {
  std::set<std::string> s;
  for (const auto& [_, t] : sub) unite(s, term_vars(t));
  return s;
}

std::set<std::string> image_names(const std::map<std::string, Term>& sub) {
  std::set<std::string> s;
  for (const auto& [_, t] : sub) unite(s, term_names(t));
  return s;
}

}  // namespace

Process substitute(const Process& a, const std::map<std::string, Term>& sub, FreshSource& fs) {
  if (sub.empty()) return a;
  auto tsub = [&](const Term& t) { return term_subst(t, sub); };
  switch (a.kind()) {
    case Process::Kind::Nil:
      return a;
    case Process::Kind::Output:
      return Process::output(tsub(a.lhs()), tsub(a.rhs()), substitute(a.child(0), sub, fs));
    case Process::Kind::Input: {
      auto inner = sub;
      inner.erase(a.binder());
      std::string x = a.binder();
      Process body = a.child(0);
      if (image_vars(inner).count(x)) {
        std::string x2 = fs.fresh_var();
        body = substitute(body, {{x, Term::var(x2)}}, fs);
        x = x2;
      }
      return Process::input(tsub(a.lhs()), x, substitute(body, inner, fs));
    }
    case Process::Kind::RestrictVar: {
      auto inner = sub;
      inner.erase(a.binder());
      std::string x = a.binder();
      Process body = a.child(0);
      if (image_vars(inner).count(x)) {
        std::string x2 = fs.fresh_var();
        body = substitute(body, {{x, Term::var(x2)}}, fs);
        x = x2;
      }
      return Process::restrict_var(x, substitute(body, inner, fs));
    }
    case Process::Kind::RestrictName: {
      std::string n = a.binder();
      Process body = a.child(0);
      if (image_names(sub).count(n)) {
        std::string n2 = fs.fresh_name();
        body = rename_free_names(body, {{n, n2}}, fs);
        n = n2;
      }
      return Process::restrict_name(n, substitute(body, sub, fs));
    }
    case Process::Kind::Match:
      return Process::match(tsub(a.lhs()), tsub(a.rhs()), substitute(a.child(0), sub, fs),
                            substitute(a.child(1), sub, fs));
    case Process::Kind::Choice:
      return Process::choice(substitute(a.child(0), sub, fs), substitute(a.child(1), sub, fs));
    case Process::Kind::Parallel: {
      std::vector<Process> kids;
      kids.reserve(a.children().size());
      for (const auto& k : a.children()) kids.push_back(substitute(k, sub, fs));
      return Process::parallel(std::move(kids));
    }
    case Process::Kind::Replicate:
      return Process::replicate(substitute(a.child(0), sub, fs));
    case Process::Kind::ActiveSubst: {
      std::string y = a.binder();
      auto it = sub.find(y);
      if (it != sub.end()) {
        if (!it->second.is_var())
          throw ProcessError("cannot substitute non-variable for substitution domain '" + y + "'");
        y = it->second.head();
      }
      return Process::active_subst(y, tsub(a.lhs()));
    }
  }
  return a;
}

Process rename_free_names(const Process& a, const std::map<std::string, std::string>& ren,
                          FreshSource& fs) {
  if (ren.empty()) return a;
  auto tren = [&](const Term& t) { return term_rename_names(t, ren); };
  switch (a.kind()) {
    case Process::Kind::Nil:
      return a;
    case Process::Kind::Output:
      return Process::output(tren(a.lhs()), tren(a.rhs()),
                             rename_free_names(a.child(0), ren, fs));
    case Process::Kind::Input:
      return Process::input(tren(a.lhs()), a.binder(),
                            rename_free_names(a.child(0), ren, fs));
    case Process::Kind::RestrictName: {
      auto inner = ren;
      inner.erase(a.binder());
      std::string n = a.binder();
      Process body = a.child(0);
      bool captures = false;
      for (const auto& [_, tgt] : inner)
        if (tgt == n) captures = true;
      if (captures) {
        std::string n2 = fs.fresh_name();
        body = rename_free_names(body, {{n, n2}}, fs);
        n = n2;
      }
      return Process::restrict_name(n, rename_free_names(body, inner, fs));
    }
    case Process::Kind::RestrictVar:
      return Process::restrict_var(a.binder(), rename_free_names(a.child(0), ren, fs));
    case Process::Kind::Match:
      return Process::match(tren(a.lhs()), tren(a.rhs()),
                            rename_free_names(a.child(0), ren, fs),
                            rename_free_names(a.child(1), ren, fs));
    case Process::Kind::Choice:
      return Process::choice(rename_free_names(a.child(0), ren, fs),
                             rename_free_names(a.child(1), ren, fs));
    case Process::Kind::Parallel: {
      std::vector<Process> kids;
      kids.reserve(a.children().size());
      for (const auto& k : a.children()) kids.push_back(rename_free_names(k, ren, fs));
      return Process::parallel(std::move(kids));
    }
    case Process::Kind::Replicate:
      return Process::replicate(rename_free_names(a.child(0), ren, fs));
    case Process::Kind::ActiveSubst:
      return Process::active_subst(a.binder(), tren(a.lhs()));
  }
  return a;
}

namespace {

struct AlphaWalk {
  std::set<std::string> used_names, used_vars;
  FreshSource* fs;

  Term fix_term(const Term& t, const std::map<std::string, std::string>& nenv,
                const std::map<std::string, Term>& venv) {
    return term_subst(term_rename_names(t, nenv), venv);
  }

  Process walk(const Process& a, std::map<std::string, std::string> nenv,
               std::map<std::string, Term> venv) {
    switch (a.kind()) {
      case Process::Kind::Nil:
        return a;
      case Process::Kind::Output:
        return Process::output(fix_term(a.lhs(), nenv, venv), fix_term(a.rhs(), nenv, venv),
                               walk(a.child(0), nenv, venv));
      case Process::Kind::Input: {
        Term ch = fix_term(a.lhs(), nenv, venv);
        std::string x = a.binder();
        if (used_vars.count(x)) {
          std::string x2 = fs->fresh_var();
          venv.insert_or_assign(x, Term::var(x2));
          x = x2;
        } else {
          venv.erase(x);
        }
        used_vars.insert(x);
        return Process::input(std::move(ch), x, walk(a.child(0), nenv, venv));
      }
      case Process::Kind::RestrictVar: {
        std::string x = a.binder();
        if (used_vars.count(x)) {
          std::string x2 = fs->fresh_var();
          venv.insert_or_assign(x, Term::var(x2));
          x = x2;
        } else {
          venv.erase(x);
        }
        used_vars.insert(x);
        return Process::restrict_var(x, walk(a.child(0), nenv, venv));
      }
      case Process::Kind::RestrictName: {
        std::string n = a.binder();
        if (used_names.count(n)) {
          std::string n2 = fs->fresh_name();
          nenv[n] = n2;
          n = n2;
        } else {
          nenv.erase(n);
        }
        used_names.insert(n);
        return Process::restrict_name(n, walk(a.child(0), nenv, venv));
      }
      case Process::Kind::Match:
        return Process::match(fix_term(a.lhs(), nenv, venv), fix_term(a.rhs(), nenv, venv),
                              walk(a.child(0), nenv, venv), walk(a.child(1), nenv, venv));
      case Process::Kind::Choice:
        return Process::choice(walk(a.child(0), nenv, venv), walk(a.child(1), nenv, venv));
      case Process::Kind::Parallel: {
        std::vector<Process> kids;
        kids.reserve(a.children().size());
        for (const auto& k : a.children()) kids.push_back(walk(k, nenv, venv));
        return Process::parallel(std::move(kids));
      }
      case Process::Kind::Replicate:
        return Process::replicate(walk(a.child(0), nenv, venv));
      case Process::Kind::ActiveSubst: {
        std::string y = a.binder();
        auto it = venv.find(y);
        if (it != venv.end()) y = it->second.head();
        return Process::active_subst(y, fix_term(a.lhs(), nenv, venv));
      }
    }
    return a;
  }
};

}  // namespace

Process alpha_fresh(const Process& a, const std::set<std::string>& avoid_names,
                    const std::set<std::string>& avoid_vars, FreshSource& fs) {
  AlphaWalk w;
  w.used_names = avoid_names;
  unite(w.used_names, free_names(a));
  w.used_vars = avoid_vars;
  unite(w.used_vars, free_vars(a));
  w.fs = &fs;
  return w.walk(a, {}, {});
}

namespace {

// Bindings an extended process contributes to the frame of its enclosing
// composition (stops at prefixes).
void local_bindings(const Process& a, std::vector<std::pair<std::string, Term>>& out) {
  switch (a.kind()) {
    case Process::Kind::ActiveSubst:
      out.emplace_back(a.binder(), a.lhs());
      break;
    case Process::Kind::Parallel:
      for (const auto& k : a.children()) local_bindings(k, out);
      break;
    case Process::Kind::RestrictName:
      local_bindings(a.child(0), out);
      break;
    case Process::Kind::RestrictVar: {
      std::vector<std::pair<std::string, Term>> inner;
      local_bindings(a.child(0), inner);
      for (auto& b : inner)
        if (b.first != a.binder()) out.push_back(std::move(b));
      break;
    }
    default:
      break;
  }
}

}  // namespace

WellFormedness well_formed(const Process& a) {
  std::vector<std::pair<std::string, Term>> bs;
  local_bindings(a, bs);
  std::set<std::string> dom;
  for (const auto& [x, _] : bs) {
    if (!dom.insert(x).second)
      return {false, "DomainClash: variable '" + x + "' defined twice in a composition"};
  }
  // Cycle-freedom: repeatedly peel a binding whose image avoids the rest.
  std::vector<std::pair<std::string, Term>> rest = bs;
  while (!rest.empty()) {
    std::set<std::string> doms;
    for (const auto& [x, _] : rest) doms.insert(x);
    bool peeled = false;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      auto vs = term_vars(rest[i].second);
      bool clean = true;
      for (const auto& v : vs)
        if (doms.count(v)) { clean = false; break; }
      if (clean) {
        rest.erase(rest.begin() + i);
        peeled = true;
        break;
      }
    }
    if (!peeled)
      return {false, "Cyclic: substitution multiset cannot be ordered"};
  }
  if (a.kind() == Process::Kind::RestrictVar) {
    if (!eventual_domain(a.child(0)).count(a.binder()))
      return {false, "RestrictNonDomainVar: 'new " + a.binder() +
                         "' does not bind a substitution domain variable"};
  }
  for (const auto& k : a.children()) {
    auto w = well_formed(k);
    if (!w.ok) return w;
  }
  return {};
}

namespace {

// Precedence: parallel (loosest), then choice, then prefixes/atoms.
void print(const Process& a, int prec, std::ostringstream& os) {
  auto paren = [&](int mine, auto body) {
    if (mine < prec) {
      os << '(';
      body();
      os << ')';
    } else {
      body();
    }
  };
  switch (a.kind()) {
    case Process::Kind::Nil:
      os << '0';
      break;
    case Process::Kind::Output:
      paren(2, [&] {
        os << "out(" << term_to_string(a.lhs()) << ',' << term_to_string(a.rhs()) << ')';
        if (a.child(0).kind() != Process::Kind::Nil) {
          os << '.';
          print(a.child(0), 2, os);
        }
      });
      break;
    case Process::Kind::Input:
      paren(2, [&] {
        os << "in(" << term_to_string(a.lhs()) << ',' << a.binder() << ')';
        if (a.child(0).kind() != Process::Kind::Nil) {
          os << '.';
          print(a.child(0), 2, os);
        }
      });
      break;
    case Process::Kind::RestrictName:
    case Process::Kind::RestrictVar:
      paren(2, [&] {
        os << "new " << a.binder() << '.';
        print(a.child(0), 2, os);
      });
      break;
    case Process::Kind::Match:
      paren(2, [&] {
        os << "if " << term_to_string(a.lhs()) << " = " << term_to_string(a.rhs()) << " then ";
        print(a.child(0), 2, os);
        if (a.child(1).kind() != Process::Kind::Nil) {
          os << " else ";
          print(a.child(1), 2, os);
        }
      });
      break;
    case Process::Kind::Choice:
      paren(1, [&] {
        print(a.child(0), 2, os);
        os << " + ";
        print(a.child(1), 2, os);
      });
      break;
    case Process::Kind::Parallel:
      if (a.children().empty()) {
        os << '0';
        break;
      }
      paren(0, [&] {
        for (std::size_t i = 0; i < a.children().size(); ++i) {
          if (i) os << " | ";
          print(a.children()[i], 1, os);
        }
      });
      break;
    case Process::Kind::Replicate:
      paren(2, [&] {
        os << '!';
        print(a.child(0), 3, os);
      });
      break;
    case Process::Kind::ActiveSubst:
      os << '{' << term_to_string(a.lhs()) << '/' << a.binder() << '}';
      break;
  }
  (void)prec;
}

}  // namespace

std::string process_to_string(const Process& a) {
  std::ostringstream os;
  print(a, 0, os);
  return os.str();
}

}  // namespace tracepi
