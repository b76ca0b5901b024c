#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coolvol/geometry.hpp"
#include "coolvol/phases.hpp"
#include "coolvol/walk.hpp"

namespace coolvol {

enum class EstimateMode { uniform_volume, gaussian_volume };

/// Two constant profiles. The worst-case ("paper") constants exist for
/// formula audit; desk-scale runs use the practical profile. Acceptance
/// statistics are calibrated against the practical defaults.
enum class ConstantProfile { practical, paper };

struct ProfileConstants {
    double mixing_constant;          // multiplies max{sigma^2,1} n^2 log(1/nu)
    double delta_divisor;            // divides min{sigma,1}/sqrt(n log(n/eps))
    double sample_count_coefficient; // multiplies log(range)/eps^2 for per-phase k
    double sample_log_floor;         // lower bound on that log factor (keeps
                                     // small-range schedules from starving)
    /// Whether volume estimation maps each delivered sample to the target
    /// density. The map needs an independent stream point per rejection, so
    /// it is enabled only where budgets make those points independent;
    /// sampling mode always applies it.
    bool map_samples_to_target;
};

ProfileConstants profile_constants(ConstantProfile profile);

struct EstimatorOptions {
    double eps = 0.25;
    std::uint64_t seed = 1;
    ConstantProfile profile = ConstantProfile::practical;

    // Per-run overrides; defaults come from the profile.
    std::optional<double> mixing_constant;
    std::optional<double> delta_divisor;
    std::optional<std::uint64_t> samples_per_phase;

    bool lazy = true;
    std::optional<bool> apply_speedy_map;  // profile default when unset
    int parallel_chains = 1;  // >1 splits the per-phase sample count across chains
    int max_retries = 5;      // full-run restarts after a walk abort
    bool collect_log_ratios = false;  // keep the per-sample log Y values in the report
};

/// Everything that determines a run, resolved from options + body + mode.
/// Echoed verbatim in reports; identical echoes reproduce identical output.
struct ResolvedConfig {
    EstimateMode mode = EstimateMode::uniform_volume;
    int n = 0;
    double roundness = 1.0;  // C; +inf when the body is unbounded (gaussian mode only)
    double eps = 0.25;
    double nu = 0.0;
    std::uint64_t samples_per_phase = 1;
    std::uint64_t seed = 1;
    ConstantProfile profile = ConstantProfile::practical;
    double mixing_constant = 8.0;
    double delta_divisor = 8.0;
    bool lazy = true;
    bool apply_speedy_map = true;
    int parallel_chains = 1;
};

struct PhaseEstimate {
    int phase_index = 0;
    double sigma_sq_cur = 0.0;
    double sigma_sq_next = 0.0;
    double ratio_estimate = 1.0;       // W = mean of the Y_j
    double log_ratio_estimate = 0.0;   // ln W, accumulated exactly in log space
    double second_moment_ratio = 1.0;  // mean(Y_j^2) / W^2
    std::uint64_t proper_steps = 0;
    std::uint64_t proposals = 0;
    std::vector<double> log_ratios;    // per-sample ln Y_j when collected
};

struct VolumeReport {
    EstimateMode mode = EstimateMode::uniform_volume;
    double estimate = 0.0;
    double log_estimate = 0.0;
    /// Gaussian mode also reports the unnormalized integral of
    /// e^{-||x||^2/2} over K; NaN in uniform mode.
    double raw_gaussian_integral = 0.0;
    std::vector<PhaseEstimate> phases;
    std::uint64_t total_oracle_calls = 0;
    ResolvedConfig config;
};

/// Walk inputs shared by every phase of a run.
struct PhaseWalkSettings {
    double eps = 0.25;
    double nu = 1e-6;
    double mixing_constant = 8.0;
    double delta_divisor = 8.0;
    bool lazy = true;
    bool apply_speedy_map = true;
};

/// Resolves options against a body and mode without running anything:
/// validates eps and containment requirements and pins nu, k, and the walk
/// constants. Every run starts by resolving exactly this.
ResolvedConfig resolve_run_config(EstimateMode mode, const ConvexBody& body,
                                  const EstimatorOptions& options);

/// Collects `samples` points from the current phase (each separated by a
/// full mixing budget, optionally mapped to the target density) and averages
/// the density ratios against the next phase. The chain is left at its final
/// state, which warm-starts the following phase.
PhaseEstimate estimate_phase_ratio(const ConvexBody& body, const GaussianPhase& cur,
                                   const GaussianPhase& next, std::uint64_t samples,
                                   WalkState& chain, const PhaseWalkSettings& settings,
                                   bool collect_log_ratios = false);

/// Volume of a body with B_n inside and a finite declared outer radius.
/// Requires 2^-n <= eps < 1.
VolumeReport uniform_volume(const ConvexBody& body, const EstimatorOptions& options);

/// Standard Gaussian measure of a body with B_n inside; no outer containment
/// needed. The estimate is the normalized probability in [0,1]; the report
/// also carries the raw integral. Requires 0 < eps < 1.
VolumeReport gaussian_volume(const ConvexBody& body, const EstimatorOptions& options);

/// Near-uniform points from the body: cools to sigma^2 = C^2 n, then filters
/// Gaussian samples with the density-ratio acceptance normalized to peak at 1
/// on the outer radius sphere.
std::vector<Point> uniform_sample(const ConvexBody& body, int count,
                                  const EstimatorOptions& options);

/// Failure-probability boosting: runs ceil(log(1/failure_probability)) times
/// (rounded up to odd) with derived seeds and returns the run with the median
/// estimate.
VolumeReport boosted_median(EstimateMode mode, const ConvexBody& body,
                            const EstimatorOptions& options, double failure_probability);

/// log-acceptance of the Gaussian-to-uniform filter at squared norm r2:
/// (r2 - C^2 n)/(2 C^2 n); its maximum over K is 0, attained at the outer
/// radius sphere.
double uniform_filter_log_acceptance(double norm_sq, double roundness, int n);

}  // namespace coolvol
