#include "tracepi/semantics.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

namespace tracepi {

// ---------------------------------------------------------------- actions

Action Action::input(Term channel, Term payload) {
  Action a;
  a.kind_ = Kind::Input;
  a.terms_.push_back(std::move(channel));
  a.terms_.push_back(std::move(payload));
  return a;
}

Action Action::output(Term channel, std::string alias) {
  Action a;
  a.kind_ = Kind::Output;
  a.terms_.push_back(std::move(channel));
  a.alias_ = std::move(alias);
  return a;
}

const Term& Action::channel() const {
  if (is_silent()) throw SemanticsError("silent actions have no channel");
  return terms_[0];
}

const Term& Action::payload() const {
  if (!is_input()) throw SemanticsError("only inputs have a payload");
  return terms_[1];
}

const std::string& Action::alias() const {
  if (!is_output()) throw SemanticsError("only outputs have an alias");
  return alias_;
}

bool operator==(const Action& a, const Action& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Action::Kind::Silent:
      return true;
    case Action::Kind::Input:
      return a.channel() == b.channel() && a.payload() == b.payload();
    case Action::Kind::Output:
      return a.channel() == b.channel() && a.alias() == b.alias();
  }
  return false;
}

bool operator!=(const Action& a, const Action& b) { return !(a == b); }

bool action_less(const Action& a, const Action& b) {
  if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind());
  switch (a.kind()) {
    case Action::Kind::Silent:
      return false;
    case Action::Kind::Input:
      if (term_less(a.channel(), b.channel())) return true;
      if (term_less(b.channel(), a.channel())) return false;
      return term_less(a.payload(), b.payload());
    case Action::Kind::Output:
      if (term_less(a.channel(), b.channel())) return true;
      if (term_less(b.channel(), a.channel())) return false;
      return a.alias() < b.alias();
  }
  return false;
}

std::string action_to_string(const Action& a) {
  switch (a.kind()) {
    case Action::Kind::Silent:
      return "tau";
    case Action::Kind::Input:
      return "in(" + term_to_string(a.channel()) + "," + term_to_string(a.payload()) + ")";
    case Action::Kind::Output:
      return "new " + a.alias() + ".out(" + term_to_string(a.channel()) + "," + a.alias() + ")";
  }
  return "?";
}

std::set<std::string> action_names(const Action& a) {
  std::set<std::string> out;
  if (a.is_silent()) return out;
  out = term_names(a.channel());
  if (a.is_input()) {
    auto more = term_names(a.payload());
    out.insert(more.begin(), more.end());
  }
  return out;
}

std::set<std::string> action_free_vars(const Action& a) {
  std::set<std::string> out;
  if (a.is_silent()) return out;
  out = term_vars(a.channel());
  if (a.is_input()) {
    auto more = term_vars(a.payload());
    out.insert(more.begin(), more.end());
  }
  return out;
}

std::set<std::string> action_bound_vars(const Action& a) {
  if (a.is_output()) return {a.alias()};
  return {};
}

// ------------------------------------------------------------- successors

namespace {

void flatten_plain(const Process& p, std::vector<Process>& out) {
  if (p.kind() == Process::Kind::Parallel) {
    for (const auto& k : p.children()) flatten_plain(k, out);
  } else if (p.kind() != Process::Kind::Nil) {
    out.push_back(p);
  }
}

// One unfolded copy of a replicated component, decomposed like a canonical
// state.  Its binders are renamed apart from everything else in play, so the
// copy can be merged into a successor without capture.
struct CopyView {
  std::size_t origin = 0;
  std::vector<std::string> names, rvars;
  std::map<std::string, Term> subst;
  std::vector<Process> comps;
};

struct Entry {
  Process proc = Process::nil();
  bool is_copy = false;
  std::size_t comp = 0;       // base component index when !is_copy
  std::size_t view = 0;       // copy view index when is_copy
  std::size_t view_comp = 0;  // component index within the view
  bool secondary = false;     // belongs to the second copy of its replication
};

// A participant of a step and what it turns into.
struct Participation {
  const Entry* entry = nullptr;
  std::vector<Process> result;
};

struct Workbench {
  const RewriteSystem* rs = nullptr;
  CanonState base;
  std::set<std::string> base_names, base_rvars;
  std::vector<CopyView> views;
  std::vector<Entry> entries;
  FreshSource fs;

  void init(const Process& a, const RewriteSystem& system, bool unfold) {
    rs = &system;
    base = canonical(a, system);
    base_names = std::set<std::string>(base.names.begin(), base.names.end());
    base_rvars = std::set<std::string>(base.rvars.begin(), base.rvars.end());

    std::set<std::string> avoid_n = all_names(base.to_process());
    std::set<std::string> avoid_v = all_vars(base.to_process());
    for (std::size_t i = 0; i < base.comps.size(); ++i) {
      const Process& c = base.comps[i];
      if (c.kind() != Process::Kind::Replicate) {
        Entry e;
        e.proc = c;
        e.comp = i;
        entries.push_back(e);
        continue;
      }
      if (!unfold) continue;
      // Two copies: one step can involve at most two components of the same
      // replication (a communication between them).
      for (int copy = 0; copy < 2; ++copy) {
        Process body = alpha_fresh(c.child(0), avoid_n, avoid_v, fs);
        auto bn = all_names(body);
        avoid_n.insert(bn.begin(), bn.end());
        auto bv = all_vars(body);
        avoid_v.insert(bv.begin(), bv.end());
        PnfResult pr = pnf(body);
        CopyView cv;
        cv.origin = i;
        cv.names = pr.names;
        cv.rvars = pr.rvars;
        cv.subst = pr.subst;
        flatten_plain(pr.plain, cv.comps);
        std::size_t vidx = views.size();
        views.push_back(std::move(cv));
        for (std::size_t j = 0; j < views[vidx].comps.size(); ++j) {
          Entry e;
          e.proc = views[vidx].comps[j];
          e.is_copy = true;
          e.comp = i;
          e.view = vidx;
          e.view_comp = j;
          e.secondary = copy == 1;
          entries.push_back(e);
        }
      }
    }
  }

  // Restricted names / variables in scope of an entry's component.
  std::set<std::string> scope_names(const Entry& e) const {
    std::set<std::string> out = base_names;
    if (e.is_copy) out.insert(views[e.view].names.begin(), views[e.view].names.end());
    return out;
  }
  std::set<std::string> scope_rvars(const Entry& e) const {
    std::set<std::string> out = base_rvars;
    if (e.is_copy) out.insert(views[e.view].rvars.begin(), views[e.view].rvars.end());
    return out;
  }

  // Reassemble the state with the participants replaced by their results.
  // An untouched replication stays as it is; a touched copy materialises as
  // a whole, its binders joining the top restrictions.
  Process build(const std::vector<Participation>& parts,
                const std::optional<std::pair<std::string, Term>>& publish) const {
    CanonState ns;
    ns.names = base.names;
    ns.rvars = base.rvars;
    ns.subst = base.subst;

    std::map<std::size_t, const Participation*> base_touch;
    std::map<std::size_t, std::map<std::size_t, const Participation*>> view_touch;
    for (const auto& p : parts) {
      if (p.entry->is_copy)
        view_touch[p.entry->view][p.entry->view_comp] = &p;
      else
        base_touch[p.entry->comp] = &p;
    }

    for (std::size_t i = 0; i < base.comps.size(); ++i) {
      auto it = base_touch.find(i);
      if (it == base_touch.end()) {
        ns.comps.push_back(base.comps[i]);
        continue;
      }
      for (const auto& q : it->second->result) ns.comps.push_back(q);
    }
    for (const auto& [vidx, touched] : view_touch) {
      const CopyView& cv = views[vidx];
      ns.names.insert(ns.names.end(), cv.names.begin(), cv.names.end());
      ns.rvars.insert(ns.rvars.end(), cv.rvars.begin(), cv.rvars.end());
      for (const auto& [x, img] : cv.subst)
        if (!ns.subst.emplace(x, img).second)
          throw ProcessError("DomainClash: unfolding defines '" + x + "' twice");
      for (std::size_t j = 0; j < cv.comps.size(); ++j) {
        auto jt = touched.find(j);
        if (jt == touched.end()) {
          ns.comps.push_back(cv.comps[j]);
          continue;
        }
        for (const auto& q : jt->second->result) ns.comps.push_back(q);
      }
    }
    if (publish)
      if (!ns.subst.emplace(publish->first, publish->second).second)
        throw ProcessError("DomainClash: alias '" + publish->first + "' already bound");
    return canonical_process(ns.to_process(), *rs);
  }
};

struct Collector {
  std::vector<Successor> out;
  std::set<std::string> seen;

  void add(Action action, Process state, bool via) {
    std::string key = action_to_string(action) + "\n" + process_to_string(state);
    if (!seen.insert(key).second) return;
    Successor s;
    s.action = std::move(action);
    s.state = std::move(state);
    s.via_replication = via;
    out.push_back(std::move(s));
  }

  std::vector<Successor> finish() {
    std::stable_sort(out.begin(), out.end(), [](const Successor& x, const Successor& y) {
      if (action_less(x.action, y.action)) return true;
      if (action_less(y.action, x.action)) return false;
      return process_to_string(x.state) < process_to_string(y.state);
    });
    return std::move(out);
  }
};

}  // namespace

std::vector<Successor> internal_successors(const Process& a, const RewriteSystem& rs,
                                           bool unfold_replication) {
  Workbench wb;
  wb.init(a, rs, unfold_replication);
  Collector col;

  for (const Entry& e : wb.entries) {
    if (e.secondary) continue;
    switch (e.proc.kind()) {
      case Process::Kind::Match: {
        const Term& m = e.proc.lhs();
        const Term& n = e.proc.rhs();
        Process cont = Process::nil();
        if (rs.equal(m, n)) {
          cont = e.proc.child(0);
        } else if (m.is_ground() && n.is_ground()) {
          cont = e.proc.child(1);
        } else {
          throw SemanticsError("NonGroundGuard: cannot decide " + term_to_string(m) + " = " +
                               term_to_string(n) + "; instantiation could still equate them");
        }
        Participation p{&e, {cont}};
        col.add(Action::silent(), wb.build({p}, std::nullopt), e.is_copy);
        break;
      }
      case Process::Kind::Choice: {
        for (int side = 0; side < 2; ++side) {
          Participation p{&e, {e.proc.child(side)}};
          col.add(Action::silent(), wb.build({p}, std::nullopt), e.is_copy);
        }
        break;
      }
      default:
        break;
    }
  }

  for (const Entry& eo : wb.entries) {
    if (eo.proc.kind() != Process::Kind::Output) continue;
    for (const Entry& ei : wb.entries) {
      if (&ei == &eo) continue;
      if (ei.proc.kind() != Process::Kind::Input) continue;
      if (eo.secondary && ei.secondary) continue;
      if (!rs.equal(eo.proc.lhs(), ei.proc.lhs())) continue;
      Participation po{&eo, {eo.proc.child(0)}};
      std::map<std::string, Term> sub;
      sub.emplace(ei.proc.binder(), eo.proc.rhs());
      Participation pi{&ei, {substitute(ei.proc.child(0), sub, wb.fs)}};
      col.add(Action::silent(), wb.build({po, pi}, std::nullopt), eo.is_copy || ei.is_copy);
    }
  }

  return col.finish();
}

std::vector<Successor> labelled_successors(const Process& a, const std::vector<Term>& pool,
                                           const RewriteSystem& rs, bool unfold_replication) {
  Workbench wb;
  wb.init(a, rs, unfold_replication);
  Collector col;

  std::set<std::string> used = all_vars(wb.base.to_process());
  std::size_t k = 0;
  while (used.count(alias_var(k))) ++k;
  const std::string alias = alias_var(k);

  std::set<std::string> dom;
  for (const auto& [x, img] : wb.base.subst) dom.insert(x);

  for (const Entry& e : wb.entries) {
    if (e.secondary) continue;
    if (e.proc.kind() != Process::Kind::Output && e.proc.kind() != Process::Kind::Input) continue;
    std::set<std::string> sn = wb.scope_names(e);
    std::set<std::string> sv = wb.scope_rvars(e);
    const Term& ch = e.proc.lhs();
    bool ch_ok = true;
    for (const auto& n : term_names(ch))
      if (sn.count(n)) { ch_ok = false; break; }
    if (ch_ok)
      for (const auto& v : term_vars(ch))
        if (sv.count(v)) { ch_ok = false; break; }
    if (!ch_ok) continue;

    if (e.proc.kind() == Process::Kind::Output) {
      Participation p{&e, {e.proc.child(0)}};
      Process next = wb.build({p}, std::make_pair(alias, e.proc.rhs()));
      col.add(Action::output(ch, alias), std::move(next), e.is_copy);
    } else {
      for (const Term& recipe : pool) {
        bool ok = true;
        for (const auto& n : term_names(recipe))
          if (sn.count(n)) { ok = false; break; }
        if (ok)
          for (const auto& v : term_vars(recipe))
            if (sv.count(v)) { ok = false; break; }
        if (!ok) continue;
        std::map<std::string, Term> sub;
        sub.emplace(e.proc.binder(), recipe);
        Participation p{&e, {substitute(e.proc.child(0), sub, wb.fs)}};
        col.add(Action::input(ch, recipe), wb.build({p}, std::nullopt), e.is_copy);
      }
    }
  }

  return col.finish();
}

std::vector<Successor> step_with(const Process& a, const Action& action,
                                 const RewriteSystem& rs, bool unfold_replication) {
  if (action.is_silent()) return internal_successors(a, rs, unfold_replication);

  Workbench wb;
  wb.init(a, rs, unfold_replication);
  Collector col;

  // Read the label through the frame.
  Term channel = term_subst(action.channel(), wb.base.subst);

  if (action.is_output()) {
    std::set<std::string> used = all_vars(wb.base.to_process());
    if (used.count(action.alias())) return {};
  }

  for (const Entry& e : wb.entries) {
    if (e.secondary) continue;
    Process::Kind want =
        action.is_input() ? Process::Kind::Input : Process::Kind::Output;
    if (e.proc.kind() != want) continue;
    std::set<std::string> sn = wb.scope_names(e);
    std::set<std::string> sv = wb.scope_rvars(e);
    bool ok = true;
    for (const auto& n : action_names(action))
      if (sn.count(n)) { ok = false; break; }
    if (ok)
      for (const auto& v : action_free_vars(action))
        if (sv.count(v)) { ok = false; break; }
    if (!ok) continue;
    if (!rs.equal(channel, e.proc.lhs())) continue;

    if (action.is_output()) {
      Participation p{&e, {e.proc.child(0)}};
      Process next = wb.build({p}, std::make_pair(action.alias(), e.proc.rhs()));
      col.add(action, std::move(next), e.is_copy);
    } else {
      std::map<std::string, Term> sub;
      sub.emplace(e.proc.binder(), action.payload());
      Participation p{&e, {substitute(e.proc.child(0), sub, wb.fs)}};
      col.add(action, wb.build({p}, std::nullopt), e.is_copy);
    }
  }
  return col.finish();
}

// ------------------------------------------------------------------ pools

std::vector<Term> input_pool(const Process& state, const PoolConfig& cfg, const Signature& sig) {
  struct Less {
    bool operator()(const Term& a, const Term& b) const { return term_less(a, b); }
  };
  std::set<Term, Less> all;
  for (const auto& x : domain(state)) all.insert(Term::var(x));
  for (const auto& n : free_names(state)) all.insert(Term::name(n));
  for (const auto& c : cfg.constants) all.insert(Term::name(c));

  for (std::size_t d = 0; d < cfg.compound_depth; ++d) {
    std::vector<Term> prev(all.begin(), all.end());
    std::set<Term, Less> next = all;
    for (const auto& [sym, arity] : sig.symbols()) {
      if (arity == 0) {
        next.insert(Term::app(sym, {}));
        continue;
      }
      if (prev.empty()) continue;
      std::vector<std::size_t> idx(arity, 0);
      while (true) {
        std::vector<Term> args;
        args.reserve(arity);
        for (std::size_t i = 0; i < arity; ++i) args.push_back(prev[idx[i]]);
        next.insert(Term::app(sym, std::move(args)));
        std::size_t pos = arity;
        while (pos > 0 && ++idx[pos - 1] == prev.size()) {
          idx[pos - 1] = 0;
          --pos;
        }
        if (pos == 0) break;
      }
    }
    all = std::move(next);
  }
  for (const auto& t : cfg.extra) all.insert(t);
  return std::vector<Term>(all.begin(), all.end());
}

// ------------------------------------------------------------- weak steps

std::vector<std::pair<Process, std::size_t>>
silent_closure(const Process& a, const RewriteSystem& rs, std::size_t repl_budget) {
  Process start = canonical_process(a, rs);
  std::map<std::string, std::pair<Process, std::size_t>> best;
  std::deque<std::pair<Process, std::size_t>> dq;
  best.emplace(process_to_string(start), std::make_pair(start, std::size_t{0}));
  dq.emplace_back(start, 0);
  while (!dq.empty()) {
    auto [proc, cost] = dq.front();
    dq.pop_front();
    auto it = best.find(process_to_string(proc));
    if (it != best.end() && it->second.second < cost) continue;
    for (const auto& s : internal_successors(proc, rs, cost < repl_budget)) {
      std::size_t ncost = cost + (s.via_replication ? 1 : 0);
      std::string key = process_to_string(s.state);
      auto found = best.find(key);
      if (found != best.end() && found->second.second <= ncost) continue;
      best.insert_or_assign(key, std::make_pair(s.state, ncost));
      if (ncost == cost)
        dq.emplace_front(s.state, ncost);
      else
        dq.emplace_back(s.state, ncost);
    }
  }
  std::vector<std::pair<Process, std::size_t>> out;
  out.reserve(best.size());
  for (const auto& [key, val] : best) out.push_back(val);
  return out;
}

std::vector<WeakSuccessor> weak_successors(const Process& a, const std::vector<Term>& pool,
                                           const RewriteSystem& rs, std::size_t repl_budget) {
  std::map<std::string, WeakSuccessor> best;
  for (const auto& [state, cost] : silent_closure(a, rs, repl_budget)) {
    for (const auto& s : labelled_successors(state, pool, rs, cost < repl_budget)) {
      std::size_t total = cost + (s.via_replication ? 1 : 0);
      std::string key = action_to_string(s.action) + "\n" + process_to_string(s.state);
      auto it = best.find(key);
      if (it != best.end() && it->second.repl_cost <= total) continue;
      WeakSuccessor w;
      w.action = s.action;
      w.state = s.state;
      w.repl_cost = total;
      best.insert_or_assign(key, std::move(w));
    }
  }
  std::vector<WeakSuccessor> out;
  out.reserve(best.size());
  for (const auto& [key, w] : best) out.push_back(w);
  std::stable_sort(out.begin(), out.end(), [](const WeakSuccessor& x, const WeakSuccessor& y) {
    if (action_less(x.action, y.action)) return true;
    if (action_less(y.action, x.action)) return false;
    return process_to_string(x.state) < process_to_string(y.state);
  });
  return out;
}

// ----------------------------------------------------------------- traces

const Process& Trace::at(std::size_t i) const {
  if (i == 0) return origin;
  if (i > steps.size()) throw SemanticsError("trace index out of range");
  return steps[i - 1].state;
}

std::vector<Action> Trace::actions() const {
  std::vector<Action> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.action);
  return out;
}

std::string trace_to_string(const Trace& tr) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    if (i) os << ", ";
    os << action_to_string(tr.steps[i].action);
  }
  os << "]";
  if (tr.truncated) os << "...";
  return os.str();
}

namespace {

struct TraceBuilder {
  const Signature* sig = nullptr;
  const RewriteSystem* rs = nullptr;
  const TraceOptions* opts = nullptr;
  TraceSet out;
  Process origin = Process::nil();

  bool full() {
    if (out.traces.size() < opts->max_traces) return false;
    out.truncated = true;
    return true;
  }

  void emit(const std::vector<Step>& steps) {
    Trace t;
    t.origin = origin;
    t.steps = steps;
    for (const auto& s : steps)
      if (s.via_replication) t.used_replication = true;
    if (t.used_replication) out.used_replication = true;
    out.traces.push_back(std::move(t));
  }

  void dfs(const Process& state, std::vector<Step>& steps, std::size_t budget) {
    if (full()) return;
    emit(steps);
    std::size_t here = out.traces.size() - 1;

    std::vector<Term> pool = input_pool(state, opts->pool, *sig);
    if (opts->record_silent) {
      std::vector<Successor> nexts = internal_successors(state, *rs, budget > 0);
      std::vector<Successor> lab = labelled_successors(state, pool, *rs, budget > 0);
      nexts.insert(nexts.end(), lab.begin(), lab.end());
      if (steps.size() == opts->max_len) {
        if (!nexts.empty()) {
          out.traces[here].truncated = true;
          out.truncated = true;
        }
        return;
      }
      for (const auto& s : nexts) {
        Step st;
        st.action = s.action;
        st.state = s.state;
        st.via_replication = s.via_replication;
        steps.push_back(st);
        dfs(s.state, steps, budget - (s.via_replication ? 1 : 0));
        steps.pop_back();
        if (out.traces.size() >= opts->max_traces) return;
      }
      return;
    }

    std::vector<WeakSuccessor> nexts = weak_successors(state, pool, *rs, budget);
    if (steps.size() == opts->max_len) {
      if (!nexts.empty()) {
        out.traces[here].truncated = true;
        out.truncated = true;
      }
      return;
    }
    for (const auto& w : nexts) {
      Step st;
      st.action = w.action;
      st.state = w.state;
      st.via_replication = w.repl_cost > 0;
      steps.push_back(st);
      dfs(w.state, steps, budget - w.repl_cost);
      steps.pop_back();
      if (out.traces.size() >= opts->max_traces) return;
    }
  }
};

}  // namespace

TraceSet traces(const Process& a, const Signature& sig, const RewriteSystem& rs,
                const TraceOptions& opts) {
  Process start = canonical_process(a, rs);
  if (!is_closed(start)) {
    std::ostringstream os;
    os << "traces: the process must be closed; free variables:";
    auto fv = free_vars(start);
    auto dom = domain(start);
    for (const auto& v : fv)
      if (!dom.count(v)) os << " " << v;
    throw SemanticsError(os.str());
  }
  TraceBuilder tb;
  tb.sig = &sig;
  tb.rs = &rs;
  tb.opts = &opts;
  tb.origin = start;
  std::vector<Step> steps;
  tb.dfs(start, steps, opts.repl_budget);
  return std::move(tb.out);
}

bool is_maximal(const Process& a, const Signature& sig, const RewriteSystem& rs,
                const TraceOptions& opts) {
  for (const auto& [state, cost] : silent_closure(a, rs, opts.repl_budget)) {
    (void)cost;
    if (!internal_successors(state, rs, true).empty()) continue;
    std::vector<Term> pool = input_pool(state, opts.pool, sig);
    if (labelled_successors(state, pool, rs, true).empty()) return true;
  }
  return false;
}

bool is_maximal(const Trace& tr, const Signature& sig, const RewriteSystem& rs,
                const TraceOptions& opts) {
  return is_maximal(tr.last(), sig, rs, opts);
}

// ------------------------------------------------------------- validation

namespace {

ValidationResult fail(std::size_t i, const std::string& why) {
  ValidationResult r;
  r.ok = false;
  std::ostringstream os;
  os << "step " << i << ": " << why;
  r.reason = os.str();
  return r;
}

}  // namespace

ValidationResult validate_trace(const Trace& tr, const RewriteSystem& rs,
                                const TraceOptions& opts) {
  Process cur = canonical_process(tr.origin, rs);
  if (!is_closed(cur)) return fail(0, "the origin is not closed");
  std::size_t budget = opts.repl_budget;

  for (std::size_t i = 1; i <= tr.steps.size(); ++i) {
    const Step& st = tr.steps[i - 1];
    if (!is_closed(st.state)) return fail(i, "the state is not closed");

    std::set<std::string> dom = domain(cur);
    for (const auto& v : action_free_vars(st.action))
      if (!dom.count(v))
        return fail(i, "the label uses '" + v + "' outside the domain");

    if (st.action.is_silent()) {
      bool found = false;
      std::size_t spent = 0;
      for (const auto& [state, cost] : silent_closure(cur, rs, budget)) {
        if (struct_equiv(state, st.state, rs)) {
          found = true;
          spent = cost;
          break;
        }
      }
      if (!found) return fail(i, "no silent path reaches the recorded state");
      budget -= std::min(budget, spent);
    } else {
      bool found = false;
      std::size_t spent = 0;
      for (const auto& [state, cost] : silent_closure(cur, rs, budget)) {
        for (const auto& s : step_with(state, st.action, rs, cost < budget)) {
          if (struct_equiv(s.state, st.state, rs)) {
            found = true;
            spent = cost + (s.via_replication ? 1 : 0);
            break;
          }
        }
        if (found) break;
      }
      if (!found) return fail(i, "the recorded action does not lead to the recorded state");
      budget -= std::min(budget, spent);
    }
    cur = canonical_process(st.state, rs);
  }
  return {};
}

}  // namespace tracepi
