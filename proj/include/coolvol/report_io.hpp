#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "coolvol/estimator.hpp"

namespace coolvol {

std::string mode_name(EstimateMode mode);          // "volume" / "gaussian-volume"
std::string profile_name(ConstantProfile profile); // "practical" / "paper"

/// Report document written by the CLI. Non-finite values (the terminal
/// sigma_sq_next, an unbounded roundness) serialize as null.
nlohmann::json report_to_json(const VolumeReport& report, double wall_time_seconds,
                              const std::string& body_path,
                              std::optional<double> boost_p = std::nullopt);

/// One row per estimated phase ratio:
/// phase,sigma_sq_cur,sigma_sq_next,W,second_moment_ratio,proper_steps,proposals
void write_trace_csv(std::ostream& out, const VolumeReport& report);

}  // namespace coolvol
