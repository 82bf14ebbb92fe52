#pragma once

#include <map>
#include <optional>
#include <string>

#include "tracepi/frame.hpp"
#include "tracepi/semantics.hpp"

namespace tracepi {

// Pointwise comparison of two recorded runs: same length, same labels at
// every position (aliases are matched positionally, so runs published under
// different alias spellings still compare), and statically equivalent
// frames at every index, the origin included.
struct TraceCompareResult {
  bool equal = true;
  // On failure, the first index where the runs separate and why.
  std::size_t index = 0;
  std::string reason;                         // "length" | "action" | "frame"
  std::optional<std::pair<Term, Term>> test;  // separating recipes when reason is "frame"
};
TraceCompareResult trace_static_equiv(const Trace& a, const Trace& b, const RewriteSystem& rs);

// A run of b that mirrors the reference run label by label with statically
// equivalent frames at every index.  The candidate adopts the reference
// aliases, so recipes in later reference labels read directly in the
// candidate's frames.  The search is deterministic; nullopt when no mirror
// exists within the exploration limits.
std::optional<Trace> trace_match(const Trace& ref, const Process& b, const RewriteSystem& rs,
                                 const TraceOptions& opts = {});

// Does every run of a have a mirror in b?  The witness is a shortest
// unmirrored run (ties broken by enumeration order).  Honours TRACEPI_JOBS
// for parallel matching.
struct InclusionResult {
  bool included = true;
  std::optional<Trace> witness;
  bool truncated = false;  // the run enumeration of a was cut by the limits
};
InclusionResult trace_inclusion(const Process& a, const Process& b, const Signature& sig,
                                const RewriteSystem& rs, const TraceOptions& opts = {});

enum class Verdict { Equivalent, Inequivalent, BoundedEquivalent };
std::string verdict_to_string(Verdict v);

// Trace equivalence: inclusion both ways.  Open processes are compared under
// every assignment of their free variables to the free names of both sides
// plus two fresh names.  A verdict is exact when the exploration was
// exhaustive (no inputs, no replication, nothing truncated); otherwise an
// agreement is reported as BoundedEquivalent.  A witness is always concrete:
// an unmirrored run of the instantiated process.
struct EquivResult {
  Verdict verdict = Verdict::Equivalent;
  std::optional<Trace> witness;
  bool witness_from_left = true;           // which side the witness run belongs to
  std::map<std::string, Term> assignment;  // instantiation of free variables used
  TraceOptions bounds;
};
EquivResult trace_equiv(const Process& a, const Process& b, const Signature& sig,
                        const RewriteSystem& rs, const TraceOptions& opts = {});

}  // namespace tracepi
