#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracepi/structural.hpp"

namespace tracepi {

class SemanticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A transition label.  Silent steps carry nothing.  An input carries the
// channel and the recipe the environment supplies as payload.  An output
// carries the channel and the alias under which the sent term is published;
// the term itself lands in the frame, never in the label.
class Action {
 public:
  enum class Kind { Silent, Input, Output };

  Action() = default;
  static Action silent() { return Action(); }
  static Action input(Term channel, Term payload);
  static Action output(Term channel, std::string alias);

  Kind kind() const { return kind_; }
  bool is_silent() const { return kind_ == Kind::Silent; }
  bool is_input() const { return kind_ == Kind::Input; }
  bool is_output() const { return kind_ == Kind::Output; }

  const Term& channel() const;             // inputs and outputs
  const Term& payload() const;             // inputs only
  const std::string& alias() const;        // outputs only

 private:
  Kind kind_ = Kind::Silent;
  std::vector<Term> terms_;                // [channel] or [channel, payload]
  std::string alias_;
};

bool operator==(const Action& a, const Action& b);
bool operator!=(const Action& a, const Action& b);

// Total order: silent < input < output, then channel, then payload / alias.
bool action_less(const Action& a, const Action& b);

std::string action_to_string(const Action& a);

std::set<std::string> action_names(const Action& a);       // names in the label
std::set<std::string> action_free_vars(const Action& a);   // variables in the label
std::set<std::string> action_bound_vars(const Action& a);  // the output alias

// One-step successor: the action taken and the canonical process after it.
struct Successor {
  Action action;
  Process state = Process::nil();
  bool via_replication = false;
};

// Internal reduction: guard resolution, choice resolution, synchronous
// communication on equal channels, each applied at an evaluation-context
// position of the canonical form.  Replicated components contribute unfolded
// copies (two per component, so a communication inside one replication is
// found); successors that consume a copy are flagged via_replication and keep
// the replicated component.  Guards are decided by normalization; a guard
// that fails the equality check but is not ground raises SemanticsError, as
// instantiation could still make it succeed.
std::vector<Successor> internal_successors(const Process& a, const RewriteSystem& rs,
                                           bool unfold_replication = true);

// Labelled transitions.  An output nu x. M<x> fires when the channel mentions
// no restricted name or variable; the alias is the first #x<k> not occurring
// in the process, and the payload moves into the frame.  An input M(R) fires
// for every pool recipe R whose names avoid the restricted names and whose
// variables lie in the domain.  Guards and choices have no labelled rule;
// they must resolve silently first.
std::vector<Successor> labelled_successors(const Process& a, const std::vector<Term>& pool,
                                           const RewriteSystem& rs,
                                           bool unfold_replication = true);

// One step with a requested label.  The channel (and the rest of the label)
// may be written through the frame: it is read under the state's active
// substitution before matching, so in(z, R) fires on channel c when the
// frame maps z to c.  An output uses the requested alias, which must be
// fresh for the state.  A silent request returns the internal successors.
// Several successors arise when distinct components can answer the label.
std::vector<Successor> step_with(const Process& a, const Action& action,
                                 const RewriteSystem& rs, bool unfold_replication = true);

// Recipe pool the environment draws input payloads from: the domain
// variables and free names of the state, the listed environment constants,
// compound applications of the signature's symbols up to the given depth,
// and any explicit extras.
struct PoolConfig {
  std::vector<std::string> constants = {"#a0", "#a1"};
  std::size_t compound_depth = 1;
  std::vector<Term> extra;
};
std::vector<Term> input_pool(const Process& state, const PoolConfig& cfg, const Signature& sig);

// States reachable by silent steps alone (the state itself included), each
// with the replication steps spent on a cheapest path to it.  Replication is
// only unfolded while the budget lasts.
std::vector<std::pair<Process, std::size_t>>
silent_closure(const Process& a, const RewriteSystem& rs, std::size_t repl_budget);

// A weak labelled step: any number of silent steps, then one labelled
// action.  repl_cost counts the replication steps a cheapest derivation
// spends.
struct WeakSuccessor {
  Action action;
  Process state = Process::nil();
  std::size_t repl_cost = 0;
};
std::vector<WeakSuccessor> weak_successors(const Process& a, const std::vector<Term>& pool,
                                           const RewriteSystem& rs, std::size_t repl_budget);

// One recorded step of a trace and a recorded run.  at(0) is the origin,
// at(i) the state after step i.  In the default trace mode every recorded
// step is a weak labelled step; with record_silent each silent step is
// recorded individually.
struct Step {
  Action action;
  Process state = Process::nil();
  bool via_replication = false;
};

struct Trace {
  Process origin = Process::nil();
  std::vector<Step> steps;
  bool used_replication = false;
  bool truncated = false;

  std::size_t length() const { return steps.size(); }
  const Process& at(std::size_t i) const;
  const Process& last() const { return at(steps.size()); }
  std::vector<Action> actions() const;
};

std::string trace_to_string(const Trace& tr);

struct TraceOptions {
  std::size_t max_len = 6;          // recorded steps per trace
  std::size_t repl_budget = 2;      // replication steps per trace
  std::size_t max_traces = 50000;   // safety valve for the enumeration
  bool record_silent = false;
  PoolConfig pool;
};

// Every run of the closed process a up to the limits, one Trace per prefix
// (the empty trace included), in a deterministic order.  truncated is set on
// a trace cut at max_len with moves remaining, and on the set when any trace
// was cut or the safety valve triggered.
struct TraceSet {
  std::vector<Trace> traces;
  bool truncated = false;
  bool used_replication = false;
};
TraceSet traces(const Process& a, const Signature& sig, const RewriteSystem& rs,
                const TraceOptions& opts = {});

// A state is final when no silent or labelled move exists; a trace is
// maximal when some silent extension of its last state is final.
bool is_maximal(const Process& a, const Signature& sig, const RewriteSystem& rs,
                const TraceOptions& opts = {});
bool is_maximal(const Trace& tr, const Signature& sig, const RewriteSystem& rs,
                const TraceOptions& opts = {});

// Replay checking for traces read back from disk or built by hand.
struct ValidationResult {
  bool ok = true;
  std::string reason;
};
ValidationResult validate_trace(const Trace& tr, const RewriteSystem& rs,
                                const TraceOptions& opts = {});

}  // namespace tracepi
