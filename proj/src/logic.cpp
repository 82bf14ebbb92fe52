#include "tracepi/logic.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "tracepi/frame.hpp"

namespace tracepi {

namespace {

std::string render_action(const Action& a) {
  std::ostringstream os;
  switch (a.kind()) {
    case Action::Kind::Silent:
      os << "tau";
      break;
    case Action::Kind::Input:
      os << "in(" << term_to_string(a.channel()) << "," << term_to_string(a.payload()) << ")";
      break;
    case Action::Kind::Output:
      os << "out(" << term_to_string(a.channel()) << "," << a.alias() << ")";
      break;
  }
  return os.str();
}

}  // namespace

Formula Formula::top() { return Formula(Kind::Top, {}, {}); }

Formula Formula::eq(Term lhs, Term rhs) {
  return Formula(Kind::Eq, {std::move(lhs), std::move(rhs)}, {});
}

Formula Formula::in_dom(Term t) { return Formula(Kind::InDom, {std::move(t)}, {}); }

Formula Formula::lor(Formula l, Formula r) {
  return Formula(Kind::Or, {}, {std::move(l), std::move(r)});
}

Formula Formula::lnot(Formula f) { return Formula(Kind::Not, {}, {std::move(f)}); }

Formula Formula::prev(Action mu, Formula f) {
  Formula out(Kind::Prev, {}, {std::move(f)});
  out.action_.push_back(std::move(mu));
  return out;
}

Formula Formula::future(Formula f) { return Formula(Kind::Future, {}, {std::move(f)}); }

Formula Formula::knows(Formula f) { return Formula(Kind::Knows, {}, {std::move(f)}); }

Formula Formula::land(Formula l, Formula r) {
  return lnot(lor(lnot(std::move(l)), lnot(std::move(r))));
}

Formula Formula::implies(Formula l, Formula r) { return lor(lnot(std::move(l)), std::move(r)); }

Formula Formula::neq(Term lhs, Term rhs) { return lnot(eq(std::move(lhs), std::move(rhs))); }

Formula Formula::globally(Formula f) { return lnot(future(lnot(std::move(f)))); }

Formula Formula::possible(Formula f) { return lnot(knows(lnot(std::move(f)))); }

const Action& Formula::action() const { return action_[0]; }

bool Formula::operator==(const Formula& o) const {
  if (kind_ != o.kind_ || terms_ != o.terms_ || kids_.size() != o.kids_.size()) return false;
  if (kind_ == Kind::Prev && action_[0] != o.action_[0]) return false;
  for (std::size_t i = 0; i < kids_.size(); ++i)
    if (!(kids_[i] == o.kids_[i])) return false;
  return true;
}

bool is_static(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Top:
    case Formula::Kind::Eq:
    case Formula::Kind::InDom:
      return true;
    case Formula::Kind::Or:
      return is_static(f.child(0)) && is_static(f.child(1));
    case Formula::Kind::Not:
      return is_static(f.child(0));
    default:
      return false;
  }
}

std::set<std::string> formula_vars(const Formula& f) {
  std::set<std::string> out;
  switch (f.kind()) {
    case Formula::Kind::Top:
      break;
    case Formula::Kind::Eq:
      out = term_vars(f.lhs());
      for (const auto& v : term_vars(f.rhs())) out.insert(v);
      break;
    case Formula::Kind::InDom:
      out = term_vars(f.lhs());
      break;
    case Formula::Kind::Prev: {
      out = action_free_vars(f.action());
      std::set<std::string> inner = formula_vars(f.child());
      for (const auto& b : action_bound_vars(f.action())) inner.erase(b);
      for (const auto& v : inner) out.insert(v);
      break;
    }
    default:
      for (std::size_t i = 0; i < f.arity(); ++i)
        for (const auto& v : formula_vars(f.child(i))) out.insert(v);
      break;
  }
  return out;
}

std::set<std::string> formula_names(const Formula& f) {
  std::set<std::string> out;
  switch (f.kind()) {
    case Formula::Kind::Top:
      break;
    case Formula::Kind::Eq:
      out = term_names(f.lhs());
      for (const auto& n : term_names(f.rhs())) out.insert(n);
      break;
    case Formula::Kind::InDom:
      out = term_names(f.lhs());
      break;
    case Formula::Kind::Prev:
      out = action_names(f.action());
      for (const auto& n : formula_names(f.child())) out.insert(n);
      break;
    default:
      for (std::size_t i = 0; i < f.arity(); ++i)
        for (const auto& n : formula_names(f.child(i))) out.insert(n);
      break;
  }
  return out;
}

namespace {

// Substitutes terms for free variables; the output alias of a step label
// binds inside that label's subformula.
Formula formula_subst(const Formula& f, const std::map<std::string, Term>& sub) {
  switch (f.kind()) {
    case Formula::Kind::Top:
      return Formula::top();
    case Formula::Kind::Eq:
      return Formula::eq(term_subst(f.lhs(), sub), term_subst(f.rhs(), sub));
    case Formula::Kind::InDom:
      return Formula::in_dom(term_subst(f.lhs(), sub));
    case Formula::Kind::Or:
      return Formula::lor(formula_subst(f.child(0), sub), formula_subst(f.child(1), sub));
    case Formula::Kind::Not:
      return Formula::lnot(formula_subst(f.child(0), sub));
    case Formula::Kind::Prev: {
      const Action& mu = f.action();
      Action inst = mu;
      if (mu.is_input())
        inst = Action::input(term_subst(mu.channel(), sub), term_subst(mu.payload(), sub));
      else if (mu.is_output())
        inst = Action::output(term_subst(mu.channel(), sub), mu.alias());
      std::map<std::string, Term> inner = sub;
      for (const auto& b : action_bound_vars(mu)) inner.erase(b);
      return Formula::prev(inst, formula_subst(f.child(), inner));
    }
    case Formula::Kind::Future:
      return Formula::future(formula_subst(f.child(), sub));
    case Formula::Kind::Knows:
      return Formula::knows(formula_subst(f.child(), sub));
  }
  return Formula::top();
}

bool contains_future(const Formula& f) {
  if (f.kind() == Formula::Kind::Future) return true;
  for (std::size_t i = 0; i < f.arity(); ++i)
    if (contains_future(f.child(i))) return true;
  return false;
}

}  // namespace

Formula formula_rename_vars(const Formula& f, const std::map<std::string, std::string>& ren) {
  std::map<std::string, Term> sub;
  for (const auto& [from, to] : ren) sub.emplace(from, Term::var(to));
  return formula_subst(f, sub);
}

std::string formula_to_string(const Formula& f) {
  std::ostringstream os;
  switch (f.kind()) {
    case Formula::Kind::Top:
      os << "true";
      break;
    case Formula::Kind::Eq:
      os << term_to_string(f.lhs()) << " = " << term_to_string(f.rhs());
      break;
    case Formula::Kind::InDom:
      os << term_to_string(f.lhs()) << " in dom";
      break;
    case Formula::Kind::Or:
      os << "(" << formula_to_string(f.child(0)) << " or " << formula_to_string(f.child(1)) << ")";
      break;
    case Formula::Kind::Not:
      os << "not(" << formula_to_string(f.child(0)) << ")";
      break;
    case Formula::Kind::Prev:
      os << "<" << render_action(f.action()) << ">- " << formula_to_string(f.child());
      break;
    case Formula::Kind::Future:
      os << "F(" << formula_to_string(f.child()) << ")";
      break;
    case Formula::Kind::Knows:
      os << "K(" << formula_to_string(f.child()) << ")";
      break;
  }
  return os.str();
}

std::vector<Assignment> assignment_representatives(const std::set<std::string>& vars,
                                                   const std::set<std::string>& anchors,
                                                   const std::vector<std::string>& fresh) {
  std::vector<std::string> xs(vars.begin(), vars.end());
  std::vector<std::string> anchor_list(anchors.begin(), anchors.end());
  std::vector<std::string> supply;
  std::set<std::string> taken = anchors;
  for (const auto& n : fresh)
    if (taken.insert(n).second) supply.push_back(n);
  for (std::size_t k = 0; supply.size() < xs.size(); ++k) {
    std::string n = "#f" + std::to_string(k);
    if (taken.insert(n).second) supply.push_back(n);
  }

  std::vector<Assignment> out;
  std::vector<std::string> value(xs.size());
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t p, std::size_t blocks) {
    if (p == xs.size()) {
      Assignment asg;
      for (std::size_t k = 0; k < xs.size(); ++k) asg.emplace(xs[k], Term::name(value[k]));
      out.push_back(std::move(asg));
      return;
    }
    for (const auto& a : anchor_list) {
      value[p] = a;
      walk(p + 1, blocks);
    }
    for (std::size_t b = 0; b <= blocks; ++b) {  // existing fresh blocks, then a new one
      value[p] = supply[b];
      walk(p + 1, std::max(blocks, b + 1));
    }
  };
  walk(0, 0);
  return out;
}

namespace {

struct Ctx {
  const Process* pattern = nullptr;
  const Signature* sig = nullptr;
  const RewriteSystem* rs = nullptr;
  const LogicOptions* opts = nullptr;
  bool* bounded = nullptr;
};

bool eval(const Ctx& c, const Formula& f, const Assignment& rho, const Trace& tr, std::size_t i);

Trace prefix_of(const Trace& tr, std::size_t i) {
  Trace out;
  out.origin = tr.origin;
  out.steps.assign(tr.steps.begin(), tr.steps.begin() + i);
  for (const auto& s : out.steps) out.used_replication = out.used_replication || s.via_replication;
  return out;
}

// All runs of `from` whose actions equal the reference prefix and whose
// frames are statically equivalent to it at every index, one run per
// distinct final state (continuations from equal states coincide, and the
// prefix frames are interchangeable for evaluation).
std::vector<Trace> mirror_runs(const Process& from, const Trace& ref, const RewriteSystem& rs,
                               const TraceOptions& opts) {
  std::vector<Trace> out;
  if (!static_equiv(frame_of(from, rs), frame_of(ref.at(0), rs), rs).equivalent) return out;

  struct Node {
    std::vector<Step> steps;
    Process state = Process::nil();
    std::size_t budget = 0;
  };
  std::vector<Node> frontier{{{}, from, opts.repl_budget}};
  for (std::size_t k = 0; k < ref.length(); ++k) {
    const Action& want = ref.steps[k].action;
    Frame target = frame_of(ref.at(k + 1), rs);
    std::vector<Node> next;
    std::map<std::string, std::size_t> slot;  // final state -> index in next
    auto push = [&](const Node& base, const Process& st, std::size_t left, bool via) {
      if (!static_equiv(frame_of(st, rs), target, rs).equivalent) return;
      std::string key = process_to_string(st);
      auto it = slot.find(key);
      if (it != slot.end() && next[it->second].budget >= left) return;
      Node n{base.steps, st, left};
      Step s;
      s.action = want;
      s.state = st;
      s.via_replication = via;
      n.steps.push_back(std::move(s));
      if (it != slot.end())
        next[it->second] = std::move(n);
      else {
        slot.emplace(std::move(key), next.size());
        next.push_back(std::move(n));
      }
    };
    for (const auto& node : frontier) {
      for (const auto& [mid, cost] : silent_closure(node.state, rs, node.budget)) {
        if (want.is_silent()) {
          push(node, mid, node.budget - cost, cost > 0);
        } else {
          for (const auto& s : step_with(mid, want, rs, node.budget > cost)) {
            std::size_t spent = cost + (s.via_replication ? 1 : 0);
            if (spent > node.budget) continue;
            push(node, s.state, node.budget - spent, spent > 0);
          }
        }
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  for (auto& node : frontier) {
    Trace tr;
    tr.origin = from;
    tr.steps = std::move(node.steps);
    for (const auto& s : tr.steps) tr.used_replication = tr.used_replication || s.via_replication;
    out.push_back(std::move(tr));
  }
  return out;
}

bool eval_knows(const Ctx& c, const Formula& child, const Assignment& rho, const Trace& tr,
                std::size_t i) {
  for (const auto& [v, t] : rho)
    if (!t.is_name())
      throw LogicError("K needs a name assignment, but " + v + " is mapped to " +
                       term_to_string(t));

  Trace ref = prefix_of(tr, i);
  std::set<std::string> vars = free_vars(*c.pattern);
  for (const auto& d : domain(*c.pattern)) vars.erase(d);
  std::set<std::string> anchors = free_names(*c.pattern);
  for (const auto& n : formula_names(child)) anchors.insert(n);
  for (std::size_t j = 0; j <= i; ++j) {
    for (const auto& n : free_names(ref.at(j))) anchors.insert(n);
    if (j > 0)
      for (const auto& n : action_names(ref.steps[j - 1].action)) anchors.insert(n);
  }

  bool need_ext = contains_future(child);
  for (const auto& rep : assignment_representatives(vars, anchors)) {
    FreshSource fs;
    Process inst = substitute(*c.pattern, rep, fs);
    if (has_replication(inst)) *c.bounded = true;
    for (const auto& run : mirror_runs(inst, ref, *c.rs, c.opts->trace)) {
      if (!need_ext) {
        if (!eval(c, child, rep, run, i)) return false;
        continue;
      }
      TraceOptions ext_opts = c.opts->trace;
      ext_opts.max_len = c.opts->trace.max_len > i ? c.opts->trace.max_len - i : 0;
      TraceSet ts = traces(run.last(), *c.sig, *c.rs, ext_opts);
      *c.bounded = *c.bounded || ts.truncated || ts.used_replication || has_input(run.last());
      for (const auto& ext : ts.traces) {
        Trace whole = run;
        whole.steps.insert(whole.steps.end(), ext.steps.begin(), ext.steps.end());
        whole.used_replication = whole.used_replication || ext.used_replication;
        if (!eval(c, child, rep, whole, i)) return false;
      }
    }
  }
  return true;
}

bool eval(const Ctx& c, const Formula& f, const Assignment& rho, const Trace& tr, std::size_t i) {
  switch (f.kind()) {
    case Formula::Kind::Top:
      return true;
    case Formula::Kind::Eq:
      return test_holds(term_subst(f.lhs(), rho), term_subst(f.rhs(), rho),
                        frame_of(tr.at(i), *c.rs), *c.rs);
    case Formula::Kind::InDom: {
      Term t = term_subst(f.lhs(), rho);
      return t.is_var() && domain(tr.at(i)).count(t.head()) > 0;
    }
    case Formula::Kind::Or:
      return eval(c, f.child(0), rho, tr, i) || eval(c, f.child(1), rho, tr, i);
    case Formula::Kind::Not:
      return !eval(c, f.child(0), rho, tr, i);
    case Formula::Kind::Prev: {
      if (i == 0) return false;
      const Action& got = tr.steps[i - 1].action;
      const Action& want = f.action();
      if (want.kind() != got.kind()) return false;
      Formula body = f.child();
      if (want.is_input()) {
        if (term_subst(want.channel(), rho) != got.channel() ||
            term_subst(want.payload(), rho) != got.payload())
          return false;
      } else if (want.is_output()) {
        if (term_subst(want.channel(), rho) != got.channel()) return false;
        if (want.alias() != got.alias())
          body = formula_rename_vars(body, {{want.alias(), got.alias()}});
      }
      return eval(c, body, rho, tr, i - 1);
    }
    case Formula::Kind::Future:
      for (std::size_t j = i; j <= tr.length(); ++j)
        if (eval(c, f.child(), rho, tr, j)) return true;
      return false;
    case Formula::Kind::Knows:
      return eval_knows(c, f.child(), rho, tr, i);
  }
  return false;
}

void require_ground(const Assignment& rho) {
  for (const auto& [v, t] : rho)
    if (!t.is_ground())
      throw LogicError("assignment maps " + v + " to the non-ground term " + term_to_string(t));
}

// Variables occurring in equality tests. Membership tests are exempt from the
// binding condition: "x in dom" is simply false while x is absent.
void test_vars(const Formula& f, std::set<std::string>& out) {
  if (f.kind() == Formula::Kind::Eq) {
    for (const auto& v : term_vars(f.lhs())) out.insert(v);
    for (const auto& v : term_vars(f.rhs())) out.insert(v);
  }
  for (std::size_t i = 0; i < f.arity(); ++i) test_vars(f.child(i), out);
}

}  // namespace

bool eval_static(const Formula& delta, const Process& a, const Assignment& rho, const Trace& tr,
                 std::size_t i, const RewriteSystem& rs) {
  if (!is_static(delta))
    throw LogicError("modal operator in a static context: " + formula_to_string(delta));
  if (i > tr.length()) throw LogicError("index past the end of the run");
  require_ground(rho);
  std::set<std::string> dom = domain(tr.at(i));
  std::set<std::string> tested;
  test_vars(delta, tested);
  for (const auto& v : tested)
    if (!rho.count(v) && !dom.count(v))
      throw LogicError("UnboundVariable: " + v +
                       " is neither assigned nor in the domain at index " + std::to_string(i));
  Ctx c;
  c.pattern = &a;
  c.rs = &rs;
  return eval(c, delta, rho, tr, i);
}

EvalResult eval_modal(const Formula& phi, const Process& a, const Assignment& rho, const Trace& tr,
                      std::size_t i, const Signature& sig, const RewriteSystem& rs,
                      const LogicOptions& opts) {
  if (i > tr.length()) throw LogicError("index past the end of the run");
  require_ground(rho);

  EvalResult out;
  Ctx c;
  c.pattern = &a;
  c.sig = &sig;
  c.rs = &rs;
  c.opts = &opts;
  c.bounded = &out.bounded;

  // Variables beyond the assignment and the run's aliases are universally
  // quantified over the ground pool terms; aliases keep their pointwise
  // meaning and are simply absent from early domains.
  std::set<std::string> extra;
  std::set<std::string> aliases = domain(tr.at(tr.length()));
  for (const auto& v : formula_vars(phi))
    if (!rho.count(v) && !aliases.count(v)) extra.insert(v);

  if (extra.empty()) {
    out.value = eval(c, phi, rho, tr, i);
    return out;
  }

  out.bounded = true;
  std::vector<Term> pool;
  for (const auto& t : input_pool(tr.at(tr.length()), opts.trace.pool, sig))
    if (t.is_ground()) pool.push_back(t);
  if (pool.empty()) pool.push_back(Term::name("#f0"));

  std::vector<std::string> xs(extra.begin(), extra.end());
  std::vector<std::size_t> idx(xs.size(), 0);
  out.value = true;
  while (true) {
    std::map<std::string, Term> sub;
    for (std::size_t k = 0; k < xs.size(); ++k) sub.emplace(xs[k], pool[idx[k]]);
    if (!eval(c, formula_subst(phi, sub), rho, tr, i)) {
      out.value = false;
      break;
    }
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == pool.size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return out;
}

Satisfaction satisfies(const Process& a, const Formula& phi, const Signature& sig,
                       const RewriteSystem& rs, const LogicOptions& opts) {
  std::set<std::string> vars = free_vars(a);
  for (const auto& d : domain(a)) vars.erase(d);
  std::set<std::string> anchors = free_names(a);
  for (const auto& n : formula_names(phi)) anchors.insert(n);

  Satisfaction out;
  for (const auto& rep : assignment_representatives(vars, anchors)) {
    FreshSource fs;
    Process inst = substitute(a, rep, fs);
    TraceSet ts = traces(inst, sig, rs, opts.trace);
    out.bounded = out.bounded || ts.truncated || ts.used_replication || has_input(inst);
    for (const auto& tr : ts.traces) {
      EvalResult r = eval_modal(phi, a, rep, tr, 0, sig, rs, opts);
      out.bounded = out.bounded || r.bounded;
      if (!r.value) {
        out.holds = false;
        out.rho = rep;
        out.counterexample = tr;
        return out;
      }
    }
  }
  return out;
}

}  // namespace tracepi
