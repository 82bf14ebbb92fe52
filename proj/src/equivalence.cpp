#include "tracepi/equivalence.hpp"

#include <algorithm>
#include <cstdlib>
#include <future>
#include <numeric>
#include <thread>

namespace tracepi {

namespace {

// Positional alias matching: a growing bijection from the aliases of one run
// to the aliases of the other.
struct AliasMap {
  std::map<std::string, std::string> fwd;
  std::set<std::string> taken;

  Term apply(const Term& t) const {
    std::map<std::string, Term> sub;
    for (const auto& [x, y] : fwd) sub.emplace(x, Term::var(y));
    return term_subst(t, sub);
  }

  bool bind(const std::string& x, const std::string& y) {
    auto it = fwd.find(x);
    if (it != fwd.end()) return it->second == y;
    if (taken.count(y)) return false;
    fwd.emplace(x, y);
    taken.insert(y);
    return true;
  }
};

bool match_action(const Action& a, const Action& b, AliasMap& m) {
  if (a.kind() != b.kind()) return false;
  if (a.is_silent()) return true;
  if (!(m.apply(a.channel()) == b.channel())) return false;
  if (a.is_input()) return m.apply(a.payload()) == b.payload();
  return m.bind(a.alias(), b.alias());
}

StaticEquivResult frames_compare(const Process& pa, const Process& pb, const AliasMap& m,
                                 const RewriteSystem& rs) {
  Frame fa = frame_of(pa, rs);
  Frame fb = frame_of(pb, rs);
  Frame fa2;
  fa2.bound_names = fa.bound_names;
  for (const auto& [x, img] : fa.subst) {
    auto it = m.fwd.find(x);
    fa2.subst.emplace(it != m.fwd.end() ? it->second : x, img);
  }
  return static_equiv(fa2, fb, rs);
}

}  // namespace

TraceCompareResult trace_static_equiv(const Trace& a, const Trace& b, const RewriteSystem& rs) {
  TraceCompareResult r;
  AliasMap m;
  std::size_t n = std::min(a.length(), b.length());
  for (std::size_t i = 0; i <= n; ++i) {
    if (i > 0 && !match_action(a.steps[i - 1].action, b.steps[i - 1].action, m)) {
      r.equal = false;
      r.index = i;
      r.reason = "action";
      return r;
    }
    StaticEquivResult se = frames_compare(a.at(i), b.at(i), m, rs);
    if (!se.equivalent) {
      r.equal = false;
      r.index = i;
      r.reason = "frame";
      r.test = se.witness;
      return r;
    }
  }
  if (a.length() != b.length()) {
    r.equal = false;
    r.index = n;
    r.reason = "length";
  }
  return r;
}

namespace {

struct Matcher {
  const Trace* ref = nullptr;
  const RewriteSystem* rs = nullptr;
  const TraceOptions* opts = nullptr;

  bool frames_ok(std::size_t i, const Process& state) const {
    return static_equiv(frame_of(ref->at(i), *rs), frame_of(state, *rs), *rs).equivalent;
  }

  bool grow(std::size_t i, const Process& state, std::size_t budget,
            std::vector<Step>& steps) const {
    if (i == ref->length()) return true;
    const Action& want = ref->steps[i].action;
    if (want.is_silent()) {
      for (const auto& [t, cost] : silent_closure(state, *rs, budget)) {
        if (!frames_ok(i + 1, t)) continue;
        Step st;
        st.action = Action::silent();
        st.state = t;
        st.via_replication = cost > 0;
        steps.push_back(st);
        if (grow(i + 1, t, budget - cost, steps)) return true;
        steps.pop_back();
      }
      return false;
    }
    for (const auto& [t, cost] : silent_closure(state, *rs, budget)) {
      for (const auto& s : step_with(t, want, *rs, cost < budget)) {
        std::size_t spent = cost + (s.via_replication ? 1 : 0);
        if (!frames_ok(i + 1, s.state)) continue;
        Step st;
        st.action = want;
        st.state = s.state;
        st.via_replication = spent > 0;
        steps.push_back(st);
        if (grow(i + 1, s.state, budget - spent, steps)) return true;
        steps.pop_back();
      }
    }
    return false;
  }
};

}  // namespace

std::optional<Trace> trace_match(const Trace& ref, const Process& b, const RewriteSystem& rs,
                                 const TraceOptions& opts) {
  Process start = canonical_process(b, rs);
  Matcher m;
  m.ref = &ref;
  m.rs = &rs;
  m.opts = &opts;
  if (!m.frames_ok(0, start)) return std::nullopt;
  std::vector<Step> steps;
  if (!m.grow(0, start, opts.repl_budget, steps)) return std::nullopt;
  Trace out;
  out.origin = start;
  out.steps = std::move(steps);
  for (const auto& s : out.steps)
    if (s.via_replication) out.used_replication = true;
  return out;
}

namespace {

std::size_t job_count() {
  const char* env = std::getenv("TRACEPI_JOBS");
  if (!env) return 1;
  long n = std::strtol(env, nullptr, 10);
  if (n <= 1) return 1;
  return std::min<long>(n, 64);
}

}  // namespace

InclusionResult trace_inclusion(const Process& a, const Process& b, const Signature& sig,
                                const RewriteSystem& rs, const TraceOptions& opts) {
  InclusionResult r;
  TraceSet ts = traces(a, sig, rs, opts);
  r.truncated = ts.truncated;

  // Shortest-first: a failing prefix is always reported before any of its
  // extensions.
  std::vector<std::size_t> order(ts.traces.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return ts.traces[x].length() < ts.traces[y].length();
  });

  std::size_t jobs = job_count();
  if (jobs <= 1) {
    for (std::size_t idx : order) {
      if (!trace_match(ts.traces[idx], b, rs, opts)) {
        r.included = false;
        r.witness = ts.traces[idx];
        return r;
      }
    }
    return r;
  }

  std::vector<char> ok(ts.traces.size(), 1);
  std::vector<std::future<void>> work;
  work.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    work.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t k = w; k < order.size(); k += jobs) {
        std::size_t idx = order[k];
        if (!trace_match(ts.traces[idx], b, rs, opts)) ok[idx] = 0;
      }
    }));
  }
  for (auto& f : work) f.get();
  for (std::size_t idx : order) {
    if (!ok[idx]) {
      r.included = false;
      r.witness = ts.traces[idx];
      return r;
    }
  }
  return r;
}

std::string verdict_to_string(Verdict v) {
  switch (v) {
    case Verdict::Equivalent:
      return "equivalent";
    case Verdict::Inequivalent:
      return "inequivalent";
    case Verdict::BoundedEquivalent:
      return "bounded-equivalent";
  }
  return "?";
}

namespace {

EquivResult closed_equiv(const Process& a, const Process& b, const Signature& sig,
                         const RewriteSystem& rs, const TraceOptions& opts) {
  EquivResult r;
  r.bounds = opts;
  InclusionResult left = trace_inclusion(a, b, sig, rs, opts);
  if (!left.included) {
    r.verdict = Verdict::Inequivalent;
    r.witness = left.witness;
    r.witness_from_left = true;
    return r;
  }
  InclusionResult right = trace_inclusion(b, a, sig, rs, opts);
  if (!right.included) {
    r.verdict = Verdict::Inequivalent;
    r.witness = right.witness;
    r.witness_from_left = false;
    return r;
  }
  bool bounded = has_input(a) || has_input(b) || has_replication(a) || has_replication(b) ||
                 left.truncated || right.truncated;
  r.verdict = bounded ? Verdict::BoundedEquivalent : Verdict::Equivalent;
  return r;
}

}  // namespace

EquivResult trace_equiv(const Process& a, const Process& b, const Signature& sig,
                        const RewriteSystem& rs, const TraceOptions& opts) {
  std::set<std::string> vars;
  for (const auto& v : free_vars(a)) vars.insert(v);
  for (const auto& v : free_vars(b)) vars.insert(v);
  for (const auto& v : domain(a)) vars.erase(v);
  for (const auto& v : domain(b)) vars.erase(v);

  if (vars.empty()) return closed_equiv(a, b, sig, rs, opts);

  // Ground the free variables: every assignment into the free names of both
  // sides plus two fresh names.
  std::vector<std::string> xs(vars.begin(), vars.end());
  std::vector<std::string> pool;
  {
    std::set<std::string> names = free_names(a);
    for (const auto& n : free_names(b)) names.insert(n);
    pool.assign(names.begin(), names.end());
    pool.push_back("#e0");
    pool.push_back("#e1");
  }

  EquivResult agg;
  agg.verdict = Verdict::Equivalent;
  agg.bounds = opts;
  std::vector<std::size_t> idx(xs.size(), 0);
  FreshSource fs;
  while (true) {
    std::map<std::string, Term> sigma;
    for (std::size_t i = 0; i < xs.size(); ++i) sigma.emplace(xs[i], Term::name(pool[idx[i]]));
    EquivResult r =
        closed_equiv(substitute(a, sigma, fs), substitute(b, sigma, fs), sig, rs, opts);
    if (r.verdict == Verdict::Inequivalent) {
      r.assignment = sigma;
      return r;
    }
    if (r.verdict == Verdict::BoundedEquivalent) agg.verdict = Verdict::BoundedEquivalent;

    std::size_t pos = xs.size();
    while (pos > 0 && ++idx[pos - 1] == pool.size()) {
      idx[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return agg;
}

}  // namespace tracepi
