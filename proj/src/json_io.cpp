#include "tracepi/json_io.hpp"

#include <stdexcept>

namespace tracepi {

using nlohmann::json;

json term_to_json(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Name:
      return json{{"kind", "name"}, {"id", t.head()}};
    case Term::Kind::Var:
      return json{{"kind", "var"}, {"id", t.head()}};
    default: {
      json args = json::array();
      for (const auto& a : t.args()) args.push_back(term_to_json(a));
      return json{{"kind", "app"}, {"sym", t.head()}, {"args", std::move(args)}};
    }
  }
}

Term term_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "name") return Term::name(j.at("id"));
  if (kind == "var") return Term::var(j.at("id"));
  if (kind != "app") throw std::runtime_error("bad term kind '" + kind + "'");
  std::vector<Term> args;
  for (const auto& a : j.at("args")) args.push_back(term_from_json(a));
  return Term::app(j.at("sym"), std::move(args));
}

json process_to_json(const Process& a) {
  switch (a.kind()) {
    case Process::Kind::Nil:
      return json{{"kind", "nil"}};
    case Process::Kind::Output:
      return json{{"kind", "output"},
                  {"channel", term_to_json(a.lhs())},
                  {"payload", term_to_json(a.rhs())},
                  {"cont", process_to_json(a.child(0))}};
    case Process::Kind::Input:
      return json{{"kind", "input"},
                  {"channel", term_to_json(a.lhs())},
                  {"binder", a.binder()},
                  {"cont", process_to_json(a.child(0))}};
    case Process::Kind::RestrictName:
      return json{
          {"kind", "new-name"}, {"binder", a.binder()}, {"body", process_to_json(a.child(0))}};
    case Process::Kind::RestrictVar:
      return json{
          {"kind", "new-var"}, {"binder", a.binder()}, {"body", process_to_json(a.child(0))}};
    case Process::Kind::Match:
      return json{{"kind", "if"},
                  {"lhs", term_to_json(a.lhs())},
                  {"rhs", term_to_json(a.rhs())},
                  {"then", process_to_json(a.child(0))},
                  {"else", process_to_json(a.child(1))}};
    case Process::Kind::Choice:
      return json{{"kind", "choice"},
                  {"left", process_to_json(a.child(0))},
                  {"right", process_to_json(a.child(1))}};
    case Process::Kind::Parallel: {
      json kids = json::array();
      for (const auto& k : a.children()) kids.push_back(process_to_json(k));
      return json{{"kind", "parallel"}, {"children", std::move(kids)}};
    }
    case Process::Kind::Replicate:
      return json{{"kind", "replicate"}, {"body", process_to_json(a.child(0))}};
    default:
      return json{
          {"kind", "subst"}, {"binder", a.binder()}, {"term", term_to_json(a.lhs())}};
  }
}

Process process_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "nil") return Process::nil();
  if (kind == "output")
    return Process::output(term_from_json(j.at("channel")), term_from_json(j.at("payload")),
                           process_from_json(j.at("cont")));
  if (kind == "input")
    return Process::input(term_from_json(j.at("channel")), j.at("binder"),
                          process_from_json(j.at("cont")));
  if (kind == "new-name") return Process::restrict_name(j.at("binder"), process_from_json(j.at("body")));
  if (kind == "new-var") return Process::restrict_var(j.at("binder"), process_from_json(j.at("body")));
  if (kind == "if")
    return Process::match(term_from_json(j.at("lhs")), term_from_json(j.at("rhs")),
                          process_from_json(j.at("then")), process_from_json(j.at("else")));
  if (kind == "choice")
    return Process::choice(process_from_json(j.at("left")), process_from_json(j.at("right")));
  if (kind == "parallel") {
    std::vector<Process> kids;
    for (const auto& k : j.at("children")) kids.push_back(process_from_json(k));
    return Process::parallel(std::move(kids));
  }
  if (kind == "replicate") return Process::replicate(process_from_json(j.at("body")));
  if (kind == "subst") return Process::active_subst(j.at("binder"), term_from_json(j.at("term")));
  throw std::runtime_error("bad process kind '" + kind + "'");
}

json action_to_json(const Action& a) {
  if (a.is_silent()) return json{{"kind", "tau"}};
  if (a.is_input())
    return json{{"kind", "in"},
                {"channel", term_to_json(a.channel())},
                {"payload", term_to_json(a.payload())}};
  return json{
      {"kind", "out"}, {"channel", term_to_json(a.channel())}, {"alias", a.alias()}};
}

Action action_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "tau") return Action::silent();
  if (kind == "in") return Action::input(term_from_json(j.at("channel")), term_from_json(j.at("payload")));
  if (kind == "out") return Action::output(term_from_json(j.at("channel")), j.at("alias"));
  throw std::runtime_error("bad action kind '" + kind + "'");
}

json trace_to_json(const Trace& tr) {
  json steps = json::array();
  for (const auto& s : tr.steps) {
    steps.push_back(json{{"action", action_to_json(s.action)},
                         {"label", action_to_string(s.action)},
                         {"state", process_to_json(s.state)},
                         {"via_replication", s.via_replication}});
  }
  return json{{"origin", process_to_json(tr.origin)},
              {"steps", std::move(steps)},
              {"used_replication", tr.used_replication},
              {"truncated", tr.truncated}};
}

Trace trace_from_json(const json& j) {
  Trace tr;
  tr.origin = process_from_json(j.at("origin"));
  for (const auto& s : j.at("steps")) {
    Step step;
    step.action = action_from_json(s.at("action"));
    step.state = process_from_json(s.at("state"));
    step.via_replication = s.value("via_replication", false);
    tr.steps.push_back(std::move(step));
  }
  tr.used_replication = j.value("used_replication", false);
  tr.truncated = j.value("truncated", false);
  return tr;
}

json assignment_to_json(const Assignment& rho) {
  json out = json::object();
  for (const auto& [v, t] : rho) out[v] = term_to_json(t);
  return out;
}

Assignment assignment_from_json(const json& j) {
  Assignment rho;
  for (const auto& [v, t] : j.items()) rho.emplace(v, term_from_json(t));
  return rho;
}

json trace_options_to_json(const TraceOptions& opts) {
  json constants = json::array();
  for (const auto& c : opts.pool.constants) constants.push_back(c);
  return json{{"max_trace_len", opts.max_len},
              {"repl_bound", opts.repl_budget},
              {"max_traces", opts.max_traces},
              {"comparison_mode", opts.record_silent ? "silent-granular" : "labelled-only"},
              {"recipe_depth", opts.pool.compound_depth},
              {"pool_constants", std::move(constants)}};
}

json equiv_result_to_json(const EquivResult& r) {
  json out{{"verdict", verdict_to_string(r.verdict)}};
  if (r.witness) {
    out["witness"] = trace_to_json(*r.witness);
    out["witness_side"] = r.witness_from_left ? "left" : "right";
  }
  if (!r.assignment.empty()) {
    json asg = json::object();
    for (const auto& [v, t] : r.assignment) asg[v] = term_to_json(t);
    out["assignment"] = std::move(asg);
  }
  return out;
}

json property_report_to_json(const PropertyReport& r) {
  json out{{"property", r.property},
           {"variables", r.variables},
           {"verdict", property_verdict_to_string(r.verdict)},
           {"method", r.method}};
  if (!r.note.empty()) out["note"] = r.note;
  if (r.counterexample) {
    out["counterexample"] = json{{"assignment", assignment_to_json(r.counterexample->assignment)},
                                 {"trace", trace_to_json(r.counterexample->trace)},
                                 {"index", r.counterexample->index}};
  }
  return out;
}

json report(const std::string& command, const json& config, const json& result) {
  return json{{"schema_version", kReportSchemaVersion},
              {"command", command},
              {"config", config},
              {"result", result}};
}

}  // namespace tracepi
