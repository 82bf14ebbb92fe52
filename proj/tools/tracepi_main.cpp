#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tracepi/json_io.hpp"
#include "tracepi/parser.hpp"
#include "tracepi/security.hpp"

using namespace tracepi;
using nlohmann::json;

namespace {

// Exit codes: 0 positive verdict, 1 definitive negative, 2 bounded or
// otherwise inconclusive, 3 usage or input errors.
constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kInconclusive = 2;
constexpr int kUsage = 3;

struct Config {
  std::size_t max_trace_len = 6;
  std::size_t repl_bound = 2;
  std::size_t recipe_depth = 1;
  std::size_t fresh_pool_size = 2;
  std::string comparison_mode = "labelled-only";
  std::uint64_t seed = 0;
  std::string theory_file;

  TraceOptions trace_options() const {
    TraceOptions opts;
    opts.max_len = max_trace_len;
    opts.repl_budget = repl_bound;
    opts.record_silent = comparison_mode == "silent-granular";
    opts.pool.compound_depth = recipe_depth;
    opts.pool.constants.clear();
    for (std::size_t i = 0; i < fresh_pool_size; ++i)
      opts.pool.constants.push_back("#a" + std::to_string(i));
    return opts;
  }

  LogicOptions logic_options() const {
    LogicOptions opts;
    opts.trace = trace_options();
    return opts;
  }

  json to_json() const {
    return json{{"max_trace_len", max_trace_len},
                {"repl_bound", repl_bound},
                {"recipe_depth", recipe_depth},
                {"fresh_pool_size", fresh_pool_size},
                {"comparison_mode", comparison_mode},
                {"seed", seed}};
  }
};

void add_config_flags(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--max-len", cfg.max_trace_len, "Recorded steps per trace")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--repl-bound", cfg.repl_bound, "Replication unfoldings per trace");
  cmd->add_option("--recipe-depth", cfg.recipe_depth, "Compound depth of input recipes");
  cmd->add_option("--pool-size", cfg.fresh_pool_size, "Environment constants in the recipe pool");
  cmd->add_option("--mode", cfg.comparison_mode, "Step recording")
      ->check(CLI::IsMember({"labelled-only", "silent-granular"}));
  cmd->add_option("--seed", cfg.seed, "Seed recorded in the report");
  cmd->add_option("--theory", cfg.theory_file, "Theory file (.thy)");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<Signature, RewriteSystem> load_theory(const Config& cfg) {
  if (cfg.theory_file.empty()) {
    Signature sig;
    return {sig, RewriteSystem(sig)};
  }
  return parse_theory(slurp(cfg.theory_file));
}

json load_json(const std::string& path, std::size_t nth) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::string line;
  std::size_t at = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (at++ == nth) return json::parse(line);
  }
  throw std::runtime_error("'" + path + "' has no entry " + std::to_string(nth));
}

void emit(const std::string& command, const Config& cfg, const json& result) {
  std::cout << report(command, cfg.to_json(), result).dump(2) << "\n";
}

int exit_of(Verdict v) {
  switch (v) {
    case Verdict::Equivalent:
      return kOk;
    case Verdict::Inequivalent:
      return kNegative;
    default:
      return kInconclusive;
  }
}

int exit_of(PropertyVerdict v) {
  switch (v) {
    case PropertyVerdict::Holds:
      return kOk;
    case PropertyVerdict::Fails:
      return kNegative;
    default:
      return kInconclusive;
  }
}

int run_equiv(const Config& cfg, const std::string& left, const std::string& right) {
  auto [sig, rs] = load_theory(cfg);
  Process a = parse_process(slurp(left), sig);
  Process b = parse_process(slurp(right), sig);
  EquivResult r = trace_equiv(a, b, sig, rs, cfg.trace_options());
  emit("equiv", cfg, equiv_result_to_json(r));
  return exit_of(r.verdict);
}

int run_static_equiv(const Config& cfg, const std::string& left, const std::string& right) {
  auto [sig, rs] = load_theory(cfg);
  Process a = parse_process(slurp(left), sig);
  Process b = parse_process(slurp(right), sig);
  StaticEquivResult r = static_equiv(frame_of(a, rs), frame_of(b, rs), rs);
  json out{{"equivalent", r.equivalent}, {"domain_mismatch", r.domain_mismatch}};
  if (r.witness)
    out["witness"] = json{{"lhs", term_to_json(r.witness->first)},
                          {"rhs", term_to_json(r.witness->second)}};
  emit("static-equiv", cfg, out);
  return r.equivalent ? kOk : kNegative;
}

int run_trace(const Config& cfg, const std::string& file, const std::string& jsonl) {
  auto [sig, rs] = load_theory(cfg);
  Process a = parse_process(slurp(file), sig);
  TraceSet ts = traces(a, sig, rs, cfg.trace_options());
  json listed = json::array();
  for (const auto& tr : ts.traces) {
    json labels = json::array();
    for (const auto& act : tr.actions()) labels.push_back(action_to_string(act));
    listed.push_back(json{{"labels", std::move(labels)},
                          {"maximal", is_maximal(tr, sig, rs, cfg.trace_options())}});
  }
  if (!jsonl.empty()) {
    std::ofstream out(jsonl);
    if (!out) throw std::runtime_error("cannot write '" + jsonl + "'");
    for (const auto& tr : ts.traces) out << trace_to_json(tr).dump() << "\n";
  }
  emit("trace", cfg,
       json{{"count", ts.traces.size()},
            {"truncated", ts.truncated},
            {"used_replication", ts.used_replication},
            {"traces", std::move(listed)}});
  return ts.truncated ? kInconclusive : kOk;
}

int run_match(const Config& cfg, const std::string& file, const std::string& trace_file,
              std::size_t nth) {
  auto [sig, rs] = load_theory(cfg);
  Process b = parse_process(slurp(file), sig);
  Trace ref = trace_from_json(load_json(trace_file, nth));
  std::optional<Trace> mirror = trace_match(ref, b, rs, cfg.trace_options());
  json out{{"matched", mirror.has_value()}};
  if (mirror) out["mirror"] = trace_to_json(*mirror);
  emit("match", cfg, out);
  return mirror ? kOk : kNegative;
}

int run_eval(const Config& cfg, const std::string& file, const std::string& formula_text,
             const std::vector<std::string>& free_vars_flag, const std::string& trace_file,
             std::size_t nth, std::int64_t index, const std::string& assign_file) {
  auto [sig, rs] = load_theory(cfg);
  Process a = parse_process(slurp(file), sig);
  std::set<std::string> vars = free_vars(a);
  for (const auto& v : free_vars_flag) vars.insert(v);
  Formula phi = parse_formula(formula_text, sig, vars);

  if (!trace_file.empty()) {
    Trace tr = trace_from_json(load_json(trace_file, nth));
    Assignment rho;
    if (!assign_file.empty()) rho = assignment_from_json(json::parse(slurp(assign_file)));
    std::size_t at = index < 0 ? tr.length() : static_cast<std::size_t>(index);
    EvalResult r = eval_modal(phi, a, rho, tr, at, sig, rs, cfg.logic_options());
    emit("eval", cfg,
         json{{"formula", formula_to_string(phi)},
              {"index", at},
              {"value", r.value},
              {"bounded", r.bounded}});
    if (!r.value) return kNegative;
    return r.bounded ? kInconclusive : kOk;
  }

  Satisfaction s = satisfies(a, phi, sig, rs, cfg.logic_options());
  json out{{"formula", formula_to_string(phi)}, {"holds", s.holds}, {"bounded", s.bounded}};
  if (!s.holds) {
    out["assignment"] = assignment_to_json(*s.rho);
    out["counterexample"] = trace_to_json(*s.counterexample);
  }
  emit("eval", cfg, out);
  if (!s.holds) return kNegative;
  return s.bounded ? kInconclusive : kOk;
}

int run_property(const Config& cfg, const std::string& file, const std::string& check,
                 const std::string& var, const std::string& delta_text, std::size_t index,
                 const std::string& slot, const std::string& k_delta_text,
                 const std::vector<std::string>& delta_j_texts) {
  auto [sig, rs] = load_theory(cfg);
  Process a = parse_process(slurp(file), sig);
  PropertyReport rep;
  if (check == "minimal-secrecy" || check == "openness") {
    if (delta_text.empty()) throw std::runtime_error("--delta is required for " + check);
    Formula delta = parse_static_formula(delta_text, sig, {var});
    rep = check == "minimal-secrecy"
              ? minimal_secrecy(a, var, delta, sig, rs, cfg.logic_options())
              : openness(a, var, delta, sig, rs, cfg.logic_options());
  } else if (check == "total-secrecy") {
    std::vector<std::string> ys;
    for (const auto& v : free_vars(a))
      if (v != var && !domain(a).count(v)) ys.push_back(v);
    rep = total_secrecy(a, var, ys, sig, rs, cfg.logic_options());
  } else {  // role-interchangeability
    if (k_delta_text.empty()) throw std::runtime_error("--k-delta is required for " + check);
    SlotFormula k{slot, parse_static_formula(k_delta_text, sig, {slot})};
    std::vector<SlotFormula> deltas;
    for (const auto& d : delta_j_texts)
      deltas.push_back(SlotFormula{slot, parse_static_formula(d, sig, {slot})});
    rep = role_interchangeability(a, index, k, deltas, sig, rs, cfg.logic_options());
  }
  emit("property", cfg, property_report_to_json(rep));
  return exit_of(rep.verdict);
}

int run_selftest(const Config& cfg) {
  json checks = json::array();
  bool all_ok = true;
  auto record = [&](const std::string& name, bool ok) {
    checks.push_back(json{{"name", name}, {"ok", ok}});
    std::cerr << (ok ? "ok - " : "FAIL - ") << name << "\n";
    all_ok = all_ok && ok;
  };

  {
    auto [sig, rs] = parse_theory("fun enc/2. fun dec/2. reduc dec(enc(X,K),K) -> X.");
    record("decryption rule normalizes",
           rs.normalize(parse_formula("dec(enc(s,k),k) = s", sig).lhs()) == Term::name("s"));
  }
  {
    Signature sig;
    RewriteSystem rs{sig};
    Process p = parse_process("out(a,s).out(b,s) + out(a,s).out(c,s)", sig);
    Process q = parse_process("out(a,s).(out(b,s) + out(c,s))", sig);
    EquivResult r = trace_equiv(p, q, sig, rs, cfg.trace_options());
    record("choice of senders folds", r.verdict == Verdict::Equivalent);
  }
  {
    Signature sig;
    RewriteSystem rs{sig};
    Process fa = parse_process("{a/y}", sig);
    Process fb = parse_process("{b/y}", sig);
    record("frames with different images separate",
           !static_equiv(frame_of(fa, rs), frame_of(fb, rs), rs).equivalent);
  }
  {
    Signature sig;
    RewriteSystem rs{sig};
    Process p = parse_process("var x. if x = a then out(c,s) else out(d,s)", sig);
    Formula delta = parse_static_formula("x != a and x != b", sig, {"x"});
    PropertyReport rep = minimal_secrecy(p, "x", delta, sig, rs, cfg.logic_options());
    record("branching sender keeps its guard secret", rep.verdict == PropertyVerdict::Holds);
  }

  emit("selftest", cfg, json{{"checks", std::move(checks)}, {"ok", all_ok}});
  return all_ok ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tracepi: trace equivalence and epistemic checks for applied pi processes"};
  app.require_subcommand(1);
  Config cfg;

  std::string left, right, file, jsonl, trace_file, assign_file;
  std::string formula_text, check, var = "x", delta_text, slot = "z", k_delta_text;
  std::vector<std::string> free_vars_flag, delta_j_texts;
  std::size_t nth = 0, role_index = 0;
  std::int64_t eval_index = -1;

  CLI::App* equiv = app.add_subcommand("equiv", "Trace equivalence of two processes");
  equiv->add_option("left", left, "Process file")->required();
  equiv->add_option("right", right, "Process file")->required();
  add_config_flags(equiv, cfg);

  CLI::App* stat = app.add_subcommand("static-equiv", "Static equivalence of two frames");
  stat->add_option("left", left, "Process file")->required();
  stat->add_option("right", right, "Process file")->required();
  add_config_flags(stat, cfg);

  CLI::App* trace_cmd = app.add_subcommand("trace", "Enumerate recorded runs");
  trace_cmd->add_option("file", file, "Process file")->required();
  trace_cmd->add_option("--jsonl", jsonl, "Write one trace JSON per line");
  add_config_flags(trace_cmd, cfg);

  CLI::App* match = app.add_subcommand("match", "Mirror a recorded run in another process");
  match->add_option("file", file, "Process file")->required();
  match->add_option("--trace", trace_file, "Trace JSON (or JSONL) file")->required();
  match->add_option("--nth", nth, "Line to read from a JSONL file");
  add_config_flags(match, cfg);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a formula");
  eval->add_option("file", file, "Process file")->required();
  CLI::Option* opt_formula = eval->add_option("--formula", formula_text, "Formula text");
  std::string formula_file;
  eval->add_option("--formula-file", formula_file, "Formula file (.frm)")->excludes(opt_formula);
  eval->add_option("--free-var", free_vars_flag, "Extra identifiers to read as variables");
  eval->add_option("--trace", trace_file, "Evaluate over this recorded run");
  eval->add_option("--nth", nth, "Line to read from a JSONL file");
  eval->add_option("--index", eval_index, "Run index (default: the end)");
  eval->add_option("--assign", assign_file, "Assignment JSON for the run evaluation");
  add_config_flags(eval, cfg);

  CLI::App* prop = app.add_subcommand("property", "Check a security property");
  prop->add_option("file", file, "Process file")->required();
  prop->add_option("--check", check, "Property")
      ->required()
      ->check(CLI::IsMember(
          {"minimal-secrecy", "total-secrecy", "role-interchangeability", "openness"}));
  prop->add_option("--var", var, "Target variable");
  prop->add_option("--delta", delta_text, "Static condition over the target variable");
  prop->add_option("--index", role_index, "Target position for role interchangeability");
  prop->add_option("--slot", slot, "Slot variable of role conditions");
  prop->add_option("--k-delta", k_delta_text, "Observed role condition");
  prop->add_option("--delta-j", delta_j_texts, "Reference role conditions");
  add_config_flags(prop, cfg);

  CLI::App* self = app.add_subcommand("selftest", "Run built-in smoke checks");
  add_config_flags(self, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (equiv->parsed()) return run_equiv(cfg, left, right);
    if (stat->parsed()) return run_static_equiv(cfg, left, right);
    if (trace_cmd->parsed()) return run_trace(cfg, file, jsonl);
    if (match->parsed()) return run_match(cfg, file, trace_file, nth);
    if (eval->parsed()) {
      if (!formula_file.empty()) formula_text = slurp(formula_file);
      if (formula_text.empty()) throw std::runtime_error("--formula or --formula-file is required");
      return run_eval(cfg, file, formula_text, free_vars_flag, trace_file, nth, eval_index,
                      assign_file);
    }
    if (prop->parsed())
      return run_property(cfg, file, check, var, delta_text, role_index, slot, k_delta_text,
                          delta_j_texts);
    if (self->parsed()) return run_selftest(cfg);
  } catch (const std::exception& e) {
    std::cerr << "tracepi: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
