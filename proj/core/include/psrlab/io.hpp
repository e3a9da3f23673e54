#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "psrlab/crane.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/lift.hpp"
#include "psrlab/pomdp.hpp"
#include "psrlab/psr.hpp"

namespace psrlab {

using Json = nlohmann::ordered_json;

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes (truncate + write); throws
/// ParseError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
Json parse_json_text(const std::string& text, const std::string& origin);

/// Throws ParseError naming the first key of `obj` outside `allowed`.
void require_known_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where);

Json psr_to_json(const PsrModel& model);
/// Strict: unknown keys, wrong shapes and bad ids are ParseErrors;
/// dimension errors surface as DimensionMismatch from the model itself.
PsrModel psr_from_json(const Json& j);

Json pomdp_to_json(const Pomdp& pomdp);
Pomdp pomdp_from_json(const Json& j);

Json generator_spec_to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const Json& j);

/// Tabular policies are written row by row; other kinds by their parameters.
Json policy_to_json(const Policy& pi, int horizon, int obsCount);

Json validation_to_json(const ValidationReport& r);
Json lift_report_to_json(const LiftReport& r);

/// Trace CSV with the fixed column order
/// k,V_star,V_pik_true,V_pik_optimistic,conf_set_size,fstar_in_set,cum_regret,tv_max,b_err_max,wall_ms.
/// Reals use %.17g; absent diagnostics are empty fields.
void write_trace_csv(std::ostream& os, const RegretTrace& trace);
std::string trace_csv(const RegretTrace& trace);
/// Reads back the rows of a trace CSV (diagnostic columns optional).
std::vector<TraceRow> read_trace_csv(const std::string& text);

/// %.17g formatting.
std::string format_real(double x);

/// Integer observation/action id list; throws ParseError.
std::vector<int> int_list(const Json& j, const std::string& where);

}  // namespace psrlab
