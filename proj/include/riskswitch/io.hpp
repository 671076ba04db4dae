#pragma once

// JSON documents read and written by the command-line tool. Every document carries
// "version": 1. Loaders throw Error(Schema) on malformed input.

#include <string>

#include <json.hpp>

#include "riskswitch/horizon.hpp"
#include "riskswitch/hydro.hpp"
#include "riskswitch/rbsde.hpp"
#include "riskswitch/stopping.hpp"
#include "riskswitch/switching.hpp"

namespace riskswitch::io {

using nlohmann::json;

inline constexpr int kVersion = 1;

json parse(const std::string& text);
json read_file(const std::string& path);

// {"outcomes": [...], "probs": [...]} plus "filtration": [[blocks]] at the document level.
std::shared_ptr<const FilteredSpace> load_space(const json& doc);
json dump_space(const FilteredSpace& space);

RiskSpec load_risk(const json& j);
json dump_risk(const RiskSpec& r);

// A random variable is an array of one value per outcome or a single number (constant).
RandomVariable load_rv(const json& j, std::size_t n, const std::string& where);
json dump_rv(const RandomVariable& x);

SwitchingProblem load_problem(const json& doc);
json dump_problem(const SwitchingProblem& p);

StoppingProblem load_stopping(const json& doc);
json dump_stopping(const StoppingProblem& sp);

json dump_table(const Table& t);
Table load_table(const json& j, std::size_t modes, std::size_t steps, std::size_t n, const std::string& where);

json dump_value_field(const ValueField& vf);
ValueField load_value_field(const json& doc, const SwitchingProblem& p);

json dump_strategy(const Strategy& xi);

json dump_triple(const RbsdeTriple& tr);
RbsdeTriple load_triple(const json& doc, std::size_t modes, int horizon, std::size_t n);

json dump_report(const VerificationReport& r);

// "kind": "discounted_markov" (switching) or "discounted_markov_stopping".
DiscountedMarkovParams load_discounted(const json& doc);
DiscountedStoppingParams load_discounted_stopping(const json& doc);

// Fields absent from the document keep their defaults.
HydroConfig load_hydro(const json& doc);
json dump_hydro_config(const HydroConfig& cfg);

// Compact rendering with a trailing newline.
std::string render(const json& j);

}  // namespace riskswitch::io
