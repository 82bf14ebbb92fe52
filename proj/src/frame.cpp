#include "tracepi/frame.hpp"

#include <algorithm>
#include <functional>

namespace tracepi {

namespace {

struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return term_less(a, b); }
};
using TermSet = std::set<Term, TermLess>;

void collect_subterms(const Term& t, TermSet& out) {
  out.insert(t);
  for (const auto& a : t.args()) collect_subterms(a, out);
}

// Value of a recipe under the frame.  Images are normally fully applied, but
// hand-built frames may chain, so iterate until no domain variable remains.
Term frame_value(const Frame& f, const Term& recipe, const RewriteSystem& rs) {
  Term t = recipe;
  for (std::size_t i = 0; i <= f.subst.size(); ++i) {
    bool hit = false;
    for (const auto& v : term_vars(t))
      if (f.subst.count(v)) { hit = true; break; }
    if (!hit) break;
    t = term_subst(t, f.subst);
  }
  return rs.normalize(t);
}

// Alpha conversion: every bound name becomes a reserved '#m<k>' identifier
// distinct from `avoid` and from the frame's free names.
Frame rename_apart(const Frame& f, std::set<std::string> avoid) {
  for (const auto& n : f.free_names()) avoid.insert(n);
  std::map<std::string, std::string> ren;
  Frame out;
  std::size_t k = 0;
  for (const auto& n : f.bound_names) {
    std::string nn;
    do { nn = "#m" + std::to_string(k++); } while (avoid.count(nn));
    avoid.insert(nn);
    ren[n] = nn;
    out.bound_names.push_back(nn);
  }
  for (const auto& [x, img] : f.subst) out.subst.emplace(x, term_rename_names(img, ren));
  return out;
}

// Shared disagreement detector: recipes are fed in a fixed order; two recipes
// whose values coincide in one frame but not the other are a witness, and the
// earlier recipe of the pair is reported first.
struct PairChecker {
  const Frame& f1;
  const Frame& f2;
  const RewriteSystem& rs;
  // value-in-one-frame -> (first recipe with that value, its value in the other frame)
  std::map<Term, std::pair<Term, Term>, TermLess> by1, by2;
  std::optional<std::pair<Term, Term>> witness;

  std::pair<Term, Term> add(const Term& recipe) {
    Term v1 = frame_value(f1, recipe, rs);
    Term v2 = frame_value(f2, recipe, rs);
    auto probe = [&](std::map<Term, std::pair<Term, Term>, TermLess>& by, const Term& key,
                     const Term& other) {
      auto it = by.find(key);
      if (it == by.end()) {
        by.emplace(key, std::make_pair(recipe, other));
      } else if (it->second.second != other && !witness) {
        witness = std::make_pair(it->second.first, recipe);
      }
    };
    probe(by1, v1, v2);
    probe(by2, v2, v1);
    return {v1, v2};
  }
};

std::vector<Term> shared_pool(const Frame& phi, const Frame& psi) {
  std::set<std::string> names = phi.free_names();
  for (const auto& n : psi.free_names()) names.insert(n);
  names.insert("#p0");  // two reserved fresh names so tests can mention
  names.insert("#p1");  // attacker data unrelated to either frame
  std::vector<Term> pool;
  for (const auto& n : names) pool.push_back(Term::name(n));
  return pool;
}

constexpr std::size_t kSaturationRounds = 64;

}  // namespace

std::set<std::string> Frame::dom() const {
  std::set<std::string> out;
  for (const auto& [x, img] : subst) { (void)img; out.insert(x); }
  return out;
}

std::set<std::string> Frame::free_names() const {
  std::set<std::string> out;
  for (const auto& [x, img] : subst) {
    (void)x;
    for (const auto& n : term_names(img)) out.insert(n);
  }
  for (const auto& n : bound_names) out.erase(n);
  return out;
}

Process Frame::to_process() const {
  std::vector<Process> comps;
  for (const auto& [x, img] : subst) comps.push_back(Process::active_subst(x, img));
  Process body = comps.empty()   ? Process::nil()
                 : comps.size() == 1 ? comps.front()
                                     : Process::parallel(comps);
  for (auto it = bound_names.rbegin(); it != bound_names.rend(); ++it)
    body = Process::restrict_name(*it, body);
  return body;
}

Frame frame_of(const Process& a, const RewriteSystem& rs) {
  PnfResult r = pnf(a);
  Frame f;
  f.bound_names = r.names;
  for (const auto& [x, img] : r.subst) f.subst.emplace(x, rs.normalize(img));
  return f;
}

bool test_holds(const Term& m, const Term& n, const Frame& phi, const RewriteSystem& rs) {
  auto d = phi.dom();
  for (const auto& v : term_vars(m))
    if (!d.count(v)) return false;
  for (const auto& v : term_vars(n))
    if (!d.count(v)) return false;
  std::set<std::string> avoid = term_names(m);
  for (const auto& nm : term_names(n)) avoid.insert(nm);
  Frame f = rename_apart(phi, avoid);
  return rs.equal(frame_value(f, m, rs), frame_value(f, n, rs));
}

Saturation saturate(const Frame& phi, const std::vector<Term>& pool,
                    const RewriteSystem& rs, std::size_t max_rounds) {
  Saturation sat;
  std::map<Term, Term, TermLess> recipe_of;
  auto insert = [&](const Term& value, const Term& recipe) -> bool {
    auto it = recipe_of.find(value);
    if (it == recipe_of.end()) {
      recipe_of.emplace(value, recipe);
      sat.entries.emplace_back(value, recipe);
      return true;
    }
    if (it->second != recipe) {
      sat.equations.emplace_back(it->second, recipe);
      if (term_less(recipe, it->second)) {
        it->second = recipe;
        for (auto& e : sat.entries)
          if (e.first == value) { e.second = recipe; break; }
      }
    }
    return false;
  };

  for (const auto& [x, img] : phi.subst) insert(rs.normalize(img), Term::var(x));
  for (const auto& p : pool) insert(rs.normalize(p), p);

  TermSet img_subterms;
  for (const auto& [x, img] : phi.subst) {
    (void)x;
    collect_subterms(rs.normalize(img), img_subterms);
  }

  // Close under symbol application.  A result is kept when a rule strictly
  // reduced the construction (so it is a subterm of an argument value) or
  // when the construction itself occurs inside the frame; commutation-hook
  // reorientations preserve size and are deliberately not treated as
  // discoveries, otherwise the closure would grow forever.
  bool changed = true;
  std::size_t round = 0;
  for (; round < max_rounds && changed; ++round) {
    changed = false;
    auto snapshot = sat.entries;
    for (const auto& [sym, ar] : rs.sig().symbols()) {
      if (ar == 0) {
        Term u = Term::app(sym, {});
        if (insert(rs.normalize(u), u)) changed = true;
        continue;
      }
      if (snapshot.empty()) continue;
      std::vector<std::size_t> idx(ar, 0);
      while (true) {
        std::vector<Term> vals, recs;
        vals.reserve(ar);
        recs.reserve(ar);
        for (auto i : idx) {
          vals.push_back(snapshot[i].first);
          recs.push_back(snapshot[i].second);
        }
        Term u = Term::app(sym, std::move(vals));
        Term v = rs.normalize(u);
        if (v.size() < u.size() || img_subterms.count(u))
          if (insert(v, Term::app(sym, std::move(recs)))) changed = true;
        std::size_t pos = ar;
        while (pos > 0 && ++idx[pos - 1] == snapshot.size()) { idx[pos - 1] = 0; --pos; }
        if (pos == 0) break;
      }
    }
  }
  sat.complete = !changed;
  return sat;
}

DeduceResult deduce(const Frame& phi, const Term& target, const RewriteSystem& rs,
                    std::size_t depth, const std::optional<std::vector<Term>>& pool) {
  // The target (and an explicit pool) is read with the frame's binders in
  // scope: a bound name in the target means that restricted name, so e.g.
  // `k` is derivable from `new k.{k/y}` by the recipe `y`.  Only the default
  // public pool must not leak bound names.
  std::vector<Term> the_pool;
  if (pool) {
    the_pool = *pool;
  } else {
    std::set<std::string> ns = phi.free_names();
    std::set<std::string> bound(phi.bound_names.begin(), phi.bound_names.end());
    for (const auto& n : term_names(target))
      if (!bound.count(n)) ns.insert(n);
    for (const auto& n : ns) the_pool.push_back(Term::name(n));
  }

  Saturation sat = saturate(phi, the_pool, rs, kSaturationRounds);
  std::map<Term, Term, TermLess> recipe_of;
  for (const auto& [value, recipe] : sat.entries) recipe_of.emplace(value, recipe);

  // Least recipe for a value: the saturated entry if any, or the least free
  // construction from child recipes.  Because the term order compares size
  // first and arguments lexicographically, minimizing each child
  // independently minimizes the application.
  std::map<Term, Term, TermLess> memo;
  TermSet failed;
  std::function<std::optional<Term>(const Term&)> build = [&](const Term& t) -> std::optional<Term> {
    if (auto it = memo.find(t); it != memo.end()) return it->second;
    if (failed.count(t)) return std::nullopt;
    std::optional<Term> best;
    if (auto it = recipe_of.find(t); it != recipe_of.end()) best = it->second;
    if (t.is_app()) {
      std::vector<Term> recs;
      bool ok = true;
      for (const auto& a : t.args()) {
        auto r = build(a);
        if (!r) { ok = false; break; }
        recs.push_back(*r);
      }
      if (ok) {
        Term cand = Term::app(t.head(), std::move(recs));
        if (!best || term_less(cand, *best)) best = cand;
      }
    }
    if (best)
      memo.emplace(t, *best);
    else
      failed.insert(t);
    return best;
  };

  DeduceResult res;
  auto r = build(rs.normalize(target));
  if (r && r->depth() <= depth) {
    res.recipe = *r;
    res.definitive = true;
  } else if (r) {
    res.definitive = false;  // derivable, but not within the depth bound
  } else {
    res.definitive = sat.complete;
  }
  return res;
}

StaticEquivResult static_equiv(const Frame& phi, const Frame& psi, const RewriteSystem& rs) {
  StaticEquivResult out;
  if (phi.dom() != psi.dom()) {
    out.domain_mismatch = true;
    return out;
  }
  std::vector<Term> pool = shared_pool(phi, psi);
  std::set<std::string> avoid;
  for (const auto& p : pool) avoid.insert(p.head());
  Frame f1 = rename_apart(phi, avoid);
  Frame f2 = rename_apart(psi, avoid);

  Saturation s1 = saturate(f1, pool, rs, kSaturationRounds);
  Saturation s2 = saturate(f2, pool, rs, kSaturationRounds);

  // Candidate recipes in a fixed order: domain variables first, then the
  // pool, then each side's discoveries and displaced recipes.  The witness
  // reported for an inequivalent pair is the first disagreement in this
  // order, so e.g. a domain variable comes before the name it leaks.
  std::vector<Term> base;
  TermSet seen;
  auto push = [&](const Term& r) {
    if (seen.insert(r).second) base.push_back(r);
  };
  for (const auto& [x, img] : f1.subst) { (void)img; push(Term::var(x)); }
  for (const auto& p : pool) push(p);
  for (const auto* s : {&s1, &s2}) {
    for (const auto& [v, r] : s->entries) { (void)v; push(r); }
    for (const auto& [r1, r2] : s->equations) {
      push(r1);
      push(r2);
    }
  }

  PairChecker chk{f1, f2, rs, {}, {}, {}};
  for (const auto& r : base) {
    chk.add(r);
    if (chk.witness) break;
  }
  // Rule left-hand sides instantiated with candidate recipes: detects values
  // that one frame lets a destructor open and the other does not.
  if (!chk.witness)
    for (const auto& rule : rs.rules()) {
      auto lhs_vars = term_vars(rule.lhs);
      std::vector<std::string> vars(lhs_vars.begin(), lhs_vars.end());
      if (vars.empty() || base.empty()) continue;
      std::vector<std::size_t> idx(vars.size(), 0);
      while (!chk.witness) {
        std::map<std::string, Term> theta;
        for (std::size_t i = 0; i < vars.size(); ++i) theta.emplace(vars[i], base[idx[i]]);
        chk.add(term_subst(rule.lhs, theta));
        chk.add(term_subst(rule.rhs, theta));
        std::size_t pos = vars.size();
        while (pos > 0 && ++idx[pos - 1] == base.size()) { idx[pos - 1] = 0; --pos; }
        if (pos == 0) break;
      }
      if (chk.witness) break;
    }
  // One application of a public symbol over the candidates.
  if (!chk.witness)
    for (const auto& [sym, ar] : rs.sig().symbols()) {
      if (ar == 0) {
        chk.add(Term::app(sym, {}));
        if (chk.witness) break;
        continue;
      }
      if (base.empty()) continue;
      std::vector<std::size_t> idx(ar, 0);
      while (!chk.witness) {
        std::vector<Term> recs;
        for (auto i : idx) recs.push_back(base[i]);
        chk.add(Term::app(sym, std::move(recs)));
        std::size_t pos = ar;
        while (pos > 0 && ++idx[pos - 1] == base.size()) { idx[pos - 1] = 0; --pos; }
        if (pos == 0) break;
      }
      if (chk.witness) break;
    }

  out.witness = chk.witness;
  out.equivalent = !chk.witness.has_value();
  return out;
}

StaticEquivResult static_equiv_oracle(const Frame& phi, const Frame& psi,
                                      const RewriteSystem& rs, std::size_t depth) {
  StaticEquivResult out;
  if (phi.dom() != psi.dom()) {
    out.domain_mismatch = true;
    return out;
  }
  std::vector<Term> pool = shared_pool(phi, psi);
  std::set<std::string> avoid;
  for (const auto& p : pool) avoid.insert(p.head());
  Frame f1 = rename_apart(phi, avoid);
  Frame f2 = rename_apart(psi, avoid);

  // A recipe is worth expanding only if its value still touches one of the
  // frames (or the pool); everything else can only build junk whose fate is
  // decided by its largest relevant subterms, which are expanded anyway.
  TermSet rel1, rel2;
  for (const auto& [x, img] : f1.subst) { (void)x; collect_subterms(rs.normalize(img), rel1); }
  for (const auto& [x, img] : f2.subst) { (void)x; collect_subterms(rs.normalize(img), rel2); }
  for (const auto& p : pool) {
    rel1.insert(p);
    rel2.insert(p);
  }

  PairChecker chk{f1, f2, rs, {}, {}, {}};
  std::set<std::pair<Term, Term>, bool (*)(const std::pair<Term, Term>&, const std::pair<Term, Term>&)>
      seen_pairs(+[](const std::pair<Term, Term>& a, const std::pair<Term, Term>& b) {
        if (a.first != b.first) return term_less(a.first, b.first);
        return term_less(a.second, b.second);
      });
  std::vector<Term> reps;

  auto consider = [&](const Term& recipe) {
    auto vv = chk.add(recipe);
    if (seen_pairs.insert(vv).second && (rel1.count(vv.first) || rel2.count(vv.second)))
      reps.push_back(recipe);
  };

  for (const auto& [x, img] : f1.subst) { (void)img; consider(Term::var(x)); }
  for (const auto& p : pool) consider(p);

  std::size_t prev_size = 0;
  for (std::size_t level = 1; level <= depth && !chk.witness; ++level) {
    std::size_t cur_size = reps.size();
    for (const auto& [sym, ar] : rs.sig().symbols()) {
      if (chk.witness) break;
      if (ar == 0) {
        if (level == 1) consider(Term::app(sym, {}));
        continue;
      }
      if (cur_size == 0) continue;
      std::vector<std::size_t> idx(ar, 0);
      while (!chk.witness) {
        bool fresh = false;  // skip tuples enumerated at an earlier level
        for (auto i : idx)
          if (i >= prev_size) { fresh = true; break; }
        if (fresh) {
          std::vector<Term> recs;
          for (auto i : idx) recs.push_back(reps[i]);
          consider(Term::app(sym, std::move(recs)));
        }
        std::size_t pos = ar;
        while (pos > 0 && ++idx[pos - 1] == cur_size) { idx[pos - 1] = 0; --pos; }
        if (pos == 0) break;
      }
    }
    prev_size = cur_size;
  }

  out.witness = chk.witness;
  out.equivalent = !chk.witness.has_value();
  return out;
}

}  // namespace tracepi
