#include "coolvol/report_io.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace coolvol {

namespace {

using nlohmann::json;

json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

std::string mode_name(EstimateMode mode) {
    return mode == EstimateMode::uniform_volume ? "volume" : "gaussian-volume";
}

std::string profile_name(ConstantProfile profile) {
    return profile == ConstantProfile::practical ? "practical" : "paper";
}

json report_to_json(const VolumeReport& report, double wall_time_seconds,
                    const std::string& body_path, std::optional<double> boost_p) {
    const ResolvedConfig& cfg = report.config;
    json phases = json::array();
    for (const PhaseEstimate& p : report.phases) {
        phases.push_back({{"index", p.phase_index},
                          {"sigma_sq_cur", p.sigma_sq_cur},
                          {"sigma_sq_next", finite_or_null(p.sigma_sq_next)},
                          {"W", p.ratio_estimate},
                          {"second_moment_ratio", p.second_moment_ratio},
                          {"proper_steps", p.proper_steps},
                          {"proposals", p.proposals}});
    }
    json config_echo = {{"mode", mode_name(report.mode)},
                        {"body", body_path},
                        {"n", cfg.n},
                        {"c", finite_or_null(cfg.roundness)},
                        {"eps", cfg.eps},
                        {"nu", cfg.nu},
                        {"k", cfg.samples_per_phase},
                        {"seed", cfg.seed},
                        {"profile", profile_name(cfg.profile)},
                        {"mixing_constant", cfg.mixing_constant},
                        {"delta_divisor", cfg.delta_divisor},
                        {"lazy", cfg.lazy},
                        {"speedy_map", cfg.apply_speedy_map},
                        {"parallel_chains", cfg.parallel_chains},
                        {"boost_p", boost_p ? json(*boost_p) : json(nullptr)}};
    json doc = {{"mode", mode_name(report.mode)},
                {"estimate", report.estimate},
                {"log_estimate", report.log_estimate},
                {"relative_error_target", cfg.eps},
                {"phases", std::move(phases)},
                {"total_oracle_calls", report.total_oracle_calls},
                {"wall_time_seconds", wall_time_seconds},
                {"config_echo", std::move(config_echo)}};
    if (report.mode == EstimateMode::gaussian_volume)
        doc["gaussian_raw_integral"] = report.raw_gaussian_integral;
    return doc;
}

void write_trace_csv(std::ostream& out, const VolumeReport& report) {
    out << "phase,sigma_sq_cur,sigma_sq_next,W,second_moment_ratio,proper_steps,proposals\n";
    out << std::setprecision(17);
    for (const PhaseEstimate& p : report.phases) {
        out << p.phase_index << ',' << p.sigma_sq_cur << ',' << p.sigma_sq_next << ','
            << p.ratio_estimate << ',' << p.second_moment_ratio << ',' << p.proper_steps << ','
            << p.proposals << '\n';
    }
}

}  // namespace coolvol
