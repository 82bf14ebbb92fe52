#include "tracepi/structural.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace tracepi {

std::optional<std::vector<std::size_t>>
cycle_free_order(const std::vector<std::pair<std::string, Term>>& bindings) {
  // Construct the order back to front: the last position's image must avoid
  // every domain variable, so repeatedly peel a binding whose image avoids
  // all remaining domains.
  std::vector<std::size_t> remaining(bindings.size());
  for (std::size_t i = 0; i < bindings.size(); ++i) remaining[i] = i;
  std::vector<std::size_t> rev;
  while (!remaining.empty()) {
    std::set<std::string> doms;
    for (auto i : remaining) doms.insert(bindings[i].first);
    bool peeled = false;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      auto vs = term_vars(bindings[remaining[k]].second);
      bool clean = true;
      for (const auto& v : vs)
        if (doms.count(v)) { clean = false; break; }
      if (clean) {
        rev.push_back(remaining[k]);
        remaining.erase(remaining.begin() + k);
        peeled = true;
        break;
      }
    }
    if (!peeled) return std::nullopt;
  }
  std::reverse(rev.begin(), rev.end());
  return rev;
}

namespace {

// Apply the map through its own images until images mention no domain
// variable.  Precondition: cycle-free.
void fully_apply(std::map<std::string, Term>& sub) {
  for (std::size_t round = 0; round <= sub.size() + 1; ++round) {
    bool changed = false;
    for (auto& [x, img] : sub) {
      Term img2 = term_subst(img, sub);
      if (!(img2 == img)) {
        img = img2;
        changed = true;
      }
    }
    if (!changed) return;
  }
  throw ProcessError("Cyclic: substitution does not stabilise");
}

}  // namespace

std::map<std::string, Term> uplus(const std::map<std::string, Term>& sigma,
                                  const std::map<std::string, Term>& rho) {
  std::vector<std::pair<std::string, Term>> all;
  for (const auto& b : sigma) all.push_back(b);
  for (const auto& b : rho) {
    if (sigma.count(b.first))
      throw ProcessError("DomainClash: variable '" + b.first + "' defined twice");
    all.push_back(b);
  }
  if (!cycle_free_order(all))
    throw ProcessError("Cyclic: composed substitutions cannot be ordered");
  std::map<std::string, Term> out(all.begin(), all.end());
  fully_apply(out);
  return out;
}

namespace {

struct PnfBuilder {
  FreshSource fs;

  PnfResult run(const Process& a) {
    PnfResult r = walk(a);
    settle(r);
    return r;
  }

  void settle(PnfResult& r) {
    fully_apply(r.subst);
    r.plain = substitute(r.plain, r.subst, fs);
  }

  PnfResult walk(const Process& a) {
    switch (a.kind()) {
      case Process::Kind::ActiveSubst: {
        PnfResult r;
        r.subst.emplace(a.binder(), a.lhs());
        return r;
      }
      case Process::Kind::RestrictName: {
        PnfResult r = walk(a.child(0));
        r.names.insert(r.names.begin(), a.binder());
        return r;
      }
      case Process::Kind::RestrictVar: {
        PnfResult r = walk(a.child(0));
        if (r.subst.count(a.binder())) {
          // nu x.{M/x} vanishes once the binding has been applied through.
          settle(r);
          r.subst.erase(a.binder());
        } else {
          r.rvars.insert(r.rvars.begin(), a.binder());
        }
        return r;
      }
      case Process::Kind::Parallel: {
        PnfResult acc;
        for (const auto& k : a.children()) {
          PnfResult r = walk(k);
          acc.names.insert(acc.names.end(), r.names.begin(), r.names.end());
          acc.rvars.insert(acc.rvars.end(), r.rvars.begin(), r.rvars.end());
          acc.subst = uplus(acc.subst, r.subst);
          std::vector<Process> kids;
          if (acc.plain.kind() != Process::Kind::Nil) kids.push_back(acc.plain);
          if (r.plain.kind() != Process::Kind::Nil) kids.push_back(r.plain);
          acc.plain = kids.empty() ? Process::nil()
                    : kids.size() == 1 ? kids[0]
                                       : Process::parallel(std::move(kids));
        }
        return acc;
      }
      case Process::Kind::Nil:
        return {};
      default: {
        PnfResult r;
        r.plain = a;
        return r;
      }
    }
  }
};

Process wrap(const std::vector<std::string>& names, const std::vector<std::string>& rvars,
             const std::map<std::string, Term>& subst, std::vector<Process> comps) {
  std::vector<Process> items;
  for (const auto& [x, img] : subst) items.push_back(Process::active_subst(x, img));
  for (auto& c : comps) items.push_back(std::move(c));
  Process body = items.empty() ? Process::nil()
               : items.size() == 1 ? items[0]
                                   : Process::parallel(std::move(items));
  for (auto it = rvars.rbegin(); it != rvars.rend(); ++it)
    body = Process::restrict_var(*it, std::move(body));
  for (auto it = names.rbegin(); it != names.rend(); ++it)
    body = Process::restrict_name(*it, std::move(body));
  return body;
}

}  // namespace

Process PnfResult::to_process() const {
  std::vector<Process> comps;
  if (plain.kind() != Process::Kind::Nil) comps.push_back(plain);
  return wrap(names, rvars, subst, std::move(comps));
}

Process CanonState::to_process() const {
  return wrap(names, rvars, subst, comps);
}

PnfResult pnf(const Process& a) {
  FreshSource fs;
  PnfBuilder b;
  Process a1 = alpha_fresh(a, {}, {}, fs);
  return b.run(a1);
}

namespace {

void flatten_parallel(const Process& p, std::vector<Process>& out) {
  if (p.kind() == Process::Kind::Parallel) {
    for (const auto& k : p.children()) flatten_parallel(k, out);
  } else if (p.kind() != Process::Kind::Nil) {
    out.push_back(p);
  }
}

// Sort key that ignores the spelling of binders: top-level bound names and
// rvars print as fixed markers, binders inside the component print by
// traversal index.  Free identifiers print verbatim.
struct KeyBuilder {
  const std::set<std::string>* top_names;
  const std::set<std::string>* top_rvars;
  std::map<std::string, std::string> local;  // binder -> %b<k>
  std::size_t next = 0;

  std::string term_key(const Term& t) {
    switch (t.kind()) {
      case Term::Kind::Name: {
        auto it = local.find("n:" + t.head());
        if (it != local.end()) return it->second;
        if (top_names->count(t.head())) return "%N";
        return "n:" + t.head();
      }
      case Term::Kind::Var: {
        auto it = local.find("v:" + t.head());
        if (it != local.end()) return it->second;
        if (top_rvars->count(t.head())) return "%R";
        return "v:" + t.head();
      }
      case Term::Kind::App: {
        std::string s = "a:" + t.head() + "(";
        for (const auto& x : t.args()) s += term_key(x) + ",";
        return s + ")";
      }
    }
    return "?";
  }

  void bind(const std::string& tag, const std::string& id) {
    local[tag + ":" + id] = "%x" + std::to_string(next++);
  }

  std::string proc_key(const Process& p) {
    switch (p.kind()) {
      case Process::Kind::Nil:
        return "0";
      case Process::Kind::Output:
        return "out(" + term_key(p.lhs()) + "," + term_key(p.rhs()) + ")." +
               proc_key(p.child(0));
      case Process::Kind::Input: {
        std::string ch = term_key(p.lhs());
        auto saved = local;
        bind("v", p.binder());
        std::string body = proc_key(p.child(0));
        local = saved;
        return "in(" + ch + ")." + body;
      }
      case Process::Kind::RestrictName: {
        auto saved = local;
        bind("n", p.binder());
        std::string body = proc_key(p.child(0));
        local = saved;
        return "nun." + body;
      }
      case Process::Kind::RestrictVar: {
        auto saved = local;
        bind("v", p.binder());
        std::string body = proc_key(p.child(0));
        local = saved;
        return "nuv." + body;
      }
      case Process::Kind::Match:
        return "if(" + term_key(p.lhs()) + "," + term_key(p.rhs()) + "){" +
               proc_key(p.child(0)) + "}{" + proc_key(p.child(1)) + "}";
      case Process::Kind::Choice:
        return "sum{" + proc_key(p.child(0)) + "}{" + proc_key(p.child(1)) + "}";
      case Process::Kind::Parallel: {
        std::string s = "par{";
        for (const auto& k : p.children()) s += proc_key(k) + ";";
        return s + "}";
      }
      case Process::Kind::Replicate:
        return "bang{" + proc_key(p.child(0)) + "}";
      case Process::Kind::ActiveSubst:
        return "sub{" + term_key(p.lhs()) + "/" + term_key(Term::var(p.binder())) + "}";
    }
    return "?";
  }
};

std::string component_key(const Process& p, const std::set<std::string>& top_names,
                          const std::set<std::string>& top_rvars) {
  KeyBuilder kb;
  kb.top_names = &top_names;
  kb.top_rvars = &top_rvars;
  return kb.proc_key(p);
}

// Positional renaming of every bound identifier: top-level bound names use
// #b, top-level rvars #r, name binders under prefixes #c, variable binders
// #q.  Encounter order is: substitution images (by domain variable), then
// components in their sorted order.
struct Renamer {
  std::set<std::string> top_names, top_rvars;
  std::map<std::string, std::string> nmap, rmap;
  std::size_t nb = 0, nr = 0, nq = 0, nc = 0;

  std::string name_for(const std::string& n) {
    auto it = nmap.find(n);
    if (it != nmap.end()) return it->second;
    std::string fresh = "#b" + std::to_string(nb++);
    nmap.emplace(n, fresh);
    return fresh;
  }
  std::string rvar_for(const std::string& v) {
    auto it = rmap.find(v);
    if (it != rmap.end()) return it->second;
    std::string fresh = "#r" + std::to_string(nr++);
    rmap.emplace(v, fresh);
    return fresh;
  }

  Term fix_term(const Term& t, const std::map<std::string, std::string>& nloc,
                const std::map<std::string, std::string>& vloc) {
    switch (t.kind()) {
      case Term::Kind::Name: {
        auto it = nloc.find(t.head());
        if (it != nloc.end()) return Term::name(it->second);
        if (top_names.count(t.head())) return Term::name(name_for(t.head()));
        return t;
      }
      case Term::Kind::Var: {
        auto it = vloc.find(t.head());
        if (it != vloc.end()) return Term::var(it->second);
        if (top_rvars.count(t.head())) return Term::var(rvar_for(t.head()));
        return t;
      }
      case Term::Kind::App: {
        std::vector<Term> args;
        args.reserve(t.args().size());
        for (const auto& a : t.args()) args.push_back(fix_term(a, nloc, vloc));
        return Term::app(t.head(), std::move(args));
      }
    }
    return t;
  }

  Process walk(const Process& p, std::map<std::string, std::string> nloc,
               std::map<std::string, std::string> vloc) {
    switch (p.kind()) {
      case Process::Kind::Nil:
        return p;
      case Process::Kind::Output:
        return Process::output(fix_term(p.lhs(), nloc, vloc), fix_term(p.rhs(), nloc, vloc),
                               walk(p.child(0), nloc, vloc));
      case Process::Kind::Input: {
        Term ch = fix_term(p.lhs(), nloc, vloc);
        std::string x = "#q" + std::to_string(nq++);
        vloc[p.binder()] = x;
        return Process::input(std::move(ch), x, walk(p.child(0), nloc, vloc));
      }
      case Process::Kind::RestrictName: {
        std::string n = "#c" + std::to_string(nc++);
        nloc[p.binder()] = n;
        return Process::restrict_name(n, walk(p.child(0), nloc, vloc));
      }
      case Process::Kind::RestrictVar: {
        std::string x = "#q" + std::to_string(nq++);
        vloc[p.binder()] = x;
        return Process::restrict_var(x, walk(p.child(0), nloc, vloc));
      }
      case Process::Kind::Match:
        return Process::match(fix_term(p.lhs(), nloc, vloc), fix_term(p.rhs(), nloc, vloc),
                              walk(p.child(0), nloc, vloc), walk(p.child(1), nloc, vloc));
      case Process::Kind::Choice:
        return Process::choice(walk(p.child(0), nloc, vloc), walk(p.child(1), nloc, vloc));
      case Process::Kind::Parallel: {
        std::vector<Process> kids;
        kids.reserve(p.children().size());
        for (const auto& k : p.children()) kids.push_back(walk(k, nloc, vloc));
        return Process::parallel(std::move(kids));
      }
      case Process::Kind::Replicate:
        return Process::replicate(walk(p.child(0), nloc, vloc));
      case Process::Kind::ActiveSubst: {
        auto it = vloc.find(p.binder());
        std::string y = it != vloc.end() ? it->second : p.binder();
        if (top_rvars.count(p.binder())) y = rvar_for(p.binder());
        return Process::active_subst(y, fix_term(p.lhs(), nloc, vloc));
      }
    }
    return p;
  }
};

struct CanonParts {
  std::vector<std::string> names, rvars;
  std::map<std::string, Term> subst;
  std::vector<Process> comps;
};

CanonParts rename_pass(const CanonParts& in) {
  Renamer rn;
  rn.top_names = std::set<std::string>(in.names.begin(), in.names.end());
  rn.top_rvars = std::set<std::string>(in.rvars.begin(), in.rvars.end());
  CanonParts out;
  for (const auto& [x, img] : in.subst) out.subst.emplace(x, rn.fix_term(img, {}, {}));
  for (const auto& c : in.comps) out.comps.push_back(rn.walk(c, {}, {}));
  // Unused binders keep their relative order.
  for (const auto& n : in.names) rn.name_for(n);
  for (const auto& v : in.rvars) rn.rvar_for(v);
  out.names.resize(in.names.size());
  out.rvars.resize(in.rvars.size());
  for (const auto& n : in.names) {
    const std::string& id = rn.nmap.at(n);
    out.names[std::stoul(id.substr(2))] = id;
  }
  for (const auto& v : in.rvars) {
    const std::string& id = rn.rmap.at(v);
    out.rvars[std::stoul(id.substr(2))] = id;
  }
  return out;
}

}  // namespace

CanonState canonical(const Process& a, const RewriteSystem& rs) {
  PnfResult r = pnf(a);

  CanonParts parts;
  parts.names = r.names;
  parts.rvars = r.rvars;
  for (const auto& [x, img] : r.subst) parts.subst.emplace(x, rs.normalize(img));
  flatten_parallel(r.plain, parts.comps);

  // Orient exposed choices (sum commutativity acts at the component root).
  std::set<std::string> tn(parts.names.begin(), parts.names.end());
  std::set<std::string> tv(parts.rvars.begin(), parts.rvars.end());
  for (auto& c : parts.comps) {
    if (c.kind() == Process::Kind::Choice) {
      std::string k0 = component_key(c.child(0), tn, tv);
      std::string k1 = component_key(c.child(1), tn, tv);
      if (k1 < k0) c = Process::choice(c.child(1), c.child(0));
    }
  }

  std::stable_sort(parts.comps.begin(), parts.comps.end(),
                   [&](const Process& x, const Process& y) {
                     return component_key(x, tn, tv) < component_key(y, tn, tv);
                   });

  // Two renaming passes: the first fixes binder spellings positionally, the
  // second re-sorts with concrete spellings and renames again so that the
  // component order and the numbering agree.
  CanonParts p1 = rename_pass(parts);
  std::stable_sort(p1.comps.begin(), p1.comps.end(), [](const Process& x, const Process& y) {
    return process_to_string(x) < process_to_string(y);
  });
  CanonParts p2 = rename_pass(p1);
  std::stable_sort(p2.comps.begin(), p2.comps.end(), [](const Process& x, const Process& y) {
    return process_to_string(x) < process_to_string(y);
  });

  CanonState st;
  st.names = p2.names;
  st.rvars = p2.rvars;
  st.subst = p2.subst;
  st.comps = p2.comps;
  return st;
}

Process canonical_process(const Process& a, const RewriteSystem& rs) {
  return canonical(a, rs).to_process();
}

bool struct_equiv(const Process& a, const Process& b, const RewriteSystem& rs) {
  return canonical_process(a, rs) == canonical_process(b, rs);
}

}  // namespace tracepi
