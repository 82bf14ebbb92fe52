#pragma once

#include <string>

#include "json.hpp"
#include "tracepi/equivalence.hpp"
#include "tracepi/security.hpp"
#include "tracepi/semantics.hpp"

namespace tracepi {

// Structured JSON for every value a report may carry, with exact inverses
// for the pieces a replay needs.  Readers throw ParseError-free plain
// runtime_error on malformed documents.

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json term_to_json(const Term& t);
Term term_from_json(const nlohmann::json& j);

nlohmann::json process_to_json(const Process& a);
Process process_from_json(const nlohmann::json& j);

nlohmann::json action_to_json(const Action& a);
Action action_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const Trace& tr);
Trace trace_from_json(const nlohmann::json& j);

nlohmann::json assignment_to_json(const Assignment& rho);
Assignment assignment_from_json(const nlohmann::json& j);

nlohmann::json trace_options_to_json(const TraceOptions& opts);

nlohmann::json equiv_result_to_json(const EquivResult& r);
nlohmann::json property_report_to_json(const PropertyReport& r);

// Report envelope: schema version, the subcommand, its configuration, and
// the payload under "result".
nlohmann::json report(const std::string& command, const nlohmann::json& config,
                      const nlohmann::json& result);

}  // namespace tracepi
