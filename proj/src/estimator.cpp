#include "coolvol/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace coolvol {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double log_mean_exp(const std::vector<double>& logs, double scale = 1.0) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : logs) m = std::max(m, scale * v);
    double sum = 0.0;
    for (double v : logs) sum += std::exp(scale * v - m);
    return m + std::log(sum / logs.size());
}

std::uint64_t saturating_ceil_u64(double v) {
    constexpr double kMax = 9.2e18;
    if (!(v > 0.0)) return 0;
    if (v >= kMax) return static_cast<std::uint64_t>(kMax);
    return static_cast<std::uint64_t>(std::ceil(v));
}

StepPolicy phase_policy(const GaussianPhase& phase, const PhaseWalkSettings& s) {
    StepPolicy policy;
    policy.delta = step_size(std::sqrt(phase.variance()), phase.dimension(), s.eps, s.delta_divisor);
    policy.proper_step_budget =
        proper_step_budget(phase.variance(), phase.dimension(), s.nu, s.mixing_constant);
    policy.lazy = s.lazy;
    return policy;
}

// A sample from the phase density: one full mixing budget, then the
// shrink-and-filter map when enabled. Every rejected map attempt consumes a
// further full budget: the filter is only correct on (near-)independent
// stream points, and reusing a correlated state would neutralize it.
Point draw_phase_sample(const ConvexBody& body, const GaussianPhase& phase,
                        const StepPolicy& policy, WalkState& chain,
                        const PhaseWalkSettings& settings) {
    run_until_mixed(chain, phase, policy, body);
    if (!settings.apply_speedy_map) return chain.position();
    bool first = true;
    const auto stream = [&]() -> const Point& {
        if (!first) run_until_mixed(chain, phase, policy, body);
        first = false;
        return chain.position();
    };
    return map_speedy_to_target(stream, phase, body, chain.rng());
}

PhaseEstimate finish_phase_estimate(int index, const GaussianPhase& cur, const GaussianPhase& next,
                                    std::vector<double> log_ratios, std::uint64_t proper,
                                    std::uint64_t proposals, bool keep_logs) {
    PhaseEstimate est;
    est.phase_index = index;
    est.sigma_sq_cur = cur.variance();
    est.sigma_sq_next = next.variance();
    est.log_ratio_estimate = log_mean_exp(log_ratios);
    est.ratio_estimate = std::exp(est.log_ratio_estimate);
    est.second_moment_ratio = std::exp(log_mean_exp(log_ratios, 2.0) - 2.0 * est.log_ratio_estimate);
    est.proper_steps = proper;
    est.proposals = proposals;
    if (keep_logs) est.log_ratios = std::move(log_ratios);
    return est;
}

}  // namespace

ProfileConstants profile_constants(ConstantProfile profile) {
    switch (profile) {
        case ConstantProfile::paper:
            return {1e16, 4096.0, 512.0, 0.0, true};
        case ConstantProfile::practical:
        default:
            return {8.0, 8.0, 6.0, 2.0, false};
    }
}

double uniform_filter_log_acceptance(double norm_sq, double roundness, int n) {
    const double cap = roundness * roundness * n;
    return (norm_sq - cap) / (2.0 * cap);
}

PhaseEstimate estimate_phase_ratio(const ConvexBody& body, const GaussianPhase& cur,
                                   const GaussianPhase& next, std::uint64_t samples,
                                   WalkState& chain, const PhaseWalkSettings& settings,
                                   bool collect_log_ratios) {
    if (samples == 0) throw std::invalid_argument("estimate_phase_ratio: needs at least one sample");
    const StepPolicy policy = phase_policy(cur, settings);
    const std::uint64_t proper0 = chain.counters().proper_steps;
    const std::uint64_t proposals0 = chain.counters().proposals();
    std::vector<double> log_ratios;
    log_ratios.reserve(samples);
    for (std::uint64_t j = 0; j < samples; ++j) {
        const Point x = draw_phase_sample(body, cur, policy, chain, settings);
        log_ratios.push_back(log_density_ratio_from_norm_sq(next, cur, squared_norm(x)));
    }
    return finish_phase_estimate(0, cur, next, std::move(log_ratios),
                                 chain.counters().proper_steps - proper0,
                                 chain.counters().proposals() - proposals0, collect_log_ratios);
}

namespace {

ResolvedConfig resolve_config(EstimateMode mode, const ConvexBody& body,
                              const EstimatorOptions& options, bool sampling = false) {
    const int n = body.dimension();
    ResolvedConfig cfg;
    cfg.mode = mode;
    cfg.n = n;
    cfg.eps = options.eps;
    cfg.seed = options.seed;
    cfg.profile = options.profile;
    const ProfileConstants defaults = profile_constants(options.profile);
    cfg.mixing_constant = options.mixing_constant.value_or(defaults.mixing_constant);
    cfg.delta_divisor = options.delta_divisor.value_or(defaults.delta_divisor);
    cfg.lazy = options.lazy;
    cfg.apply_speedy_map = options.apply_speedy_map.value_or(defaults.map_samples_to_target);
    cfg.parallel_chains = std::max(1, options.parallel_chains);

    if (!(options.eps > 0.0 && options.eps < 1.0))
        throw std::invalid_argument("estimator: eps must be in (0,1)");
    if (mode == EstimateMode::uniform_volume) {
        if (!sampling && options.eps < std::pow(2.0, -n))
            throw std::invalid_argument("uniform_volume: eps must be at least 2^-n");
        const double c = body.outer_radius() / std::sqrt(static_cast<double>(n));
        if (!std::isfinite(c))
            throw std::invalid_argument("uniform_volume: body must declare a finite outer radius");
        cfg.roundness = std::max(c, 1.0);
    } else {
        const double c = body.outer_radius() / std::sqrt(static_cast<double>(n));
        cfg.roundness = std::isfinite(c) ? std::max(c, 1.0) : kInfiniteVariance;
    }
    cfg.nu = std::pow(options.eps / n, 16.0);

    if (options.samples_per_phase) {
        cfg.samples_per_phase = *options.samples_per_phase;
    } else {
        // log of the variance range the schedule must traverse: C^2 n / sigma_0^2
        // spans via log(C^2 n) in volume mode; the Gaussian mode ends at 1, so
        // its range is 1/sigma_0^2 = 4n.
        const double range = mode == EstimateMode::uniform_volume
                                 ? cfg.roundness * cfg.roundness * n
                                 : 4.0 * n;
        const double log_factor = std::max(std::log(range), defaults.sample_log_floor);
        const double k =
            defaults.sample_count_coefficient * log_factor / (options.eps * options.eps);
        cfg.samples_per_phase = std::max<std::uint64_t>(saturating_ceil_u64(k), 1);
    }
    if (cfg.samples_per_phase == 0)
        throw std::invalid_argument("estimator: samples_per_phase must be positive");
    return cfg;
}

}  // namespace

ResolvedConfig resolve_run_config(EstimateMode mode, const ConvexBody& body,
                                  const EstimatorOptions& options) {
    return resolve_config(mode, body, options);
}

namespace {

PhaseWalkSettings walk_settings(const ResolvedConfig& cfg) {
    PhaseWalkSettings s;
    s.eps = cfg.eps;
    s.nu = cfg.nu;
    s.mixing_constant = cfg.mixing_constant;
    s.delta_divisor = cfg.delta_divisor;
    s.lazy = cfg.lazy;
    s.apply_speedy_map = cfg.apply_speedy_map;
    return s;
}

struct ChainPhaseData {
    std::vector<std::vector<double>> log_ratios;  // per phase
    std::vector<std::uint64_t> proper_steps;
    std::vector<std::uint64_t> proposals;
};

ChainPhaseData run_chain(const ConvexBody& body, const CoolingSchedule& schedule,
                         const ResolvedConfig& cfg, std::uint64_t chain_index,
                         std::uint64_t chain_samples) {
    const PhaseWalkSettings settings = walk_settings(cfg);
    Rng init_rng(split_seed(cfg.seed, 2 * chain_index));
    Point x0 = sample_initial(body, schedule.variances().front(), init_rng);
    WalkState chain(std::move(x0), split_seed(cfg.seed, 2 * chain_index + 1));

    const std::size_t ratio_count = schedule.phase_count() - 1;
    ChainPhaseData data;
    data.log_ratios.resize(ratio_count);
    data.proper_steps.assign(ratio_count, 0);
    data.proposals.assign(ratio_count, 0);
    for (std::size_t i = 0; i < ratio_count; ++i) {
        const GaussianPhase cur = schedule.phase(i);
        const GaussianPhase next = schedule.phase(i + 1);
        PhaseEstimate est = estimate_phase_ratio(body, cur, next, chain_samples, chain, settings,
                                                 /*collect_log_ratios=*/true);
        data.log_ratios[i] = std::move(est.log_ratios);
        data.proper_steps[i] = est.proper_steps;
        data.proposals[i] = est.proposals;
    }
    return data;
}

VolumeReport run_schedule(EstimateMode mode, const ConvexBody& body, const ResolvedConfig& cfg,
                          bool collect_log_ratios) {
    const CoolingSchedule schedule = CoolingSchedule::build(
        cfg.n, std::isfinite(cfg.roundness) ? cfg.roundness : 1.0,
        mode == EstimateMode::uniform_volume ? ScheduleTarget::uniform_volume
                                             : ScheduleTarget::gaussian_volume);
    const std::uint64_t oracle0 = body.oracle_calls();

    const int chains = cfg.parallel_chains;
    std::vector<ChainPhaseData> chain_data(chains);
    if (chains == 1) {
        chain_data[0] = run_chain(body, schedule, cfg, 0, cfg.samples_per_phase);
    } else {
        // Split the per-phase sample count across independent chains, each
        // replaying the full schedule from its own initial point.
        std::vector<std::uint64_t> share(chains, cfg.samples_per_phase / chains);
        for (std::uint64_t c = 0; c < cfg.samples_per_phase % chains; ++c) ++share[c];
        std::vector<std::future<ChainPhaseData>> futures;
        futures.reserve(chains);
        for (int c = 0; c < chains; ++c) {
            if (share[c] == 0) continue;
            futures.push_back(std::async(std::launch::async, [&, c] {
                return run_chain(body, schedule, cfg, static_cast<std::uint64_t>(c), share[c]);
            }));
        }
        chain_data.resize(futures.size());
        for (std::size_t f = 0; f < futures.size(); ++f) chain_data[f] = futures[f].get();
    }

    const std::size_t ratio_count = schedule.phase_count() - 1;
    VolumeReport report;
    report.mode = mode;
    report.config = cfg;
    report.phases.reserve(ratio_count);
    const double sigma0_sq = schedule.variances().front();
    double log_estimate = 0.5 * cfg.n * std::log(2.0 * M_PI * sigma0_sq);
    for (std::size_t i = 0; i < ratio_count; ++i) {
        std::vector<double> merged;
        std::uint64_t proper = 0, proposals = 0;
        for (const auto& cd : chain_data) {
            merged.insert(merged.end(), cd.log_ratios[i].begin(), cd.log_ratios[i].end());
            proper += cd.proper_steps[i];
            proposals += cd.proposals[i];
        }
        PhaseEstimate est = finish_phase_estimate(static_cast<int>(i), schedule.phase(i),
                                                  schedule.phase(i + 1), std::move(merged), proper,
                                                  proposals, collect_log_ratios);
        log_estimate += est.log_ratio_estimate;
        report.phases.push_back(std::move(est));
    }

    if (mode == EstimateMode::uniform_volume) {
        report.log_estimate = log_estimate;
        report.estimate = std::exp(log_estimate);
        report.raw_gaussian_integral = kNan;
    } else {
        report.raw_gaussian_integral = std::exp(log_estimate);
        report.log_estimate = log_estimate - 0.5 * cfg.n * std::log(2.0 * M_PI);
        report.estimate = std::exp(report.log_estimate);
    }
    report.total_oracle_calls = body.oracle_calls() - oracle0;
    return report;
}

VolumeReport run_mode_with_retries(EstimateMode mode, const ConvexBody& body,
                                   const EstimatorOptions& options) {
    ResolvedConfig cfg = resolve_config(mode, body, options);
    const std::uint64_t base_seed = cfg.seed;
    for (int attempt = 0;; ++attempt) {
        try {
            return run_schedule(mode, body, cfg, options.collect_log_ratios);
        } catch (const walk_stuck_error&) {
            if (attempt >= options.max_retries) throw;
            cfg.seed = split_seed(base_seed, 0xabf5ULL + attempt);
        }
    }
}

}  // namespace

VolumeReport uniform_volume(const ConvexBody& body, const EstimatorOptions& options) {
    return run_mode_with_retries(EstimateMode::uniform_volume, body, options);
}

VolumeReport gaussian_volume(const ConvexBody& body, const EstimatorOptions& options) {
    return run_mode_with_retries(EstimateMode::gaussian_volume, body, options);
}

namespace {

std::vector<Point> uniform_sample_once(const ConvexBody& body, int count, ResolvedConfig cfg) {
    const PhaseWalkSettings settings = walk_settings(cfg);
    const double final_variance = cfg.roundness * cfg.roundness * cfg.n;
    const CoolingSchedule schedule =
        CoolingSchedule::build(cfg.n, cfg.roundness, ScheduleTarget::sample_only, final_variance);

    Rng init_rng(split_seed(cfg.seed, 0));
    Point x0 = sample_initial(body, schedule.variances().front(), init_rng);
    WalkState chain(std::move(x0), split_seed(cfg.seed, 1));

    // Traverse the ladder once; each phase warm-starts the next.
    for (std::size_t i = 0; i + 1 < schedule.phase_count(); ++i)
        run_until_mixed(chain, schedule.phase(i), phase_policy(schedule.phase(i), settings), body);

    const GaussianPhase final_phase = schedule.phase(schedule.phase_count() - 1);
    const StepPolicy policy = phase_policy(final_phase, settings);
    std::vector<Point> points;
    points.reserve(count);
    while (static_cast<int>(points.size()) < count) {
        // Like the target mapping, the Gaussian-to-uniform filter needs a
        // fresh Gaussian sample per attempt.
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 100000)
                throw walk_stuck_error("uniform_sample: acceptance filter stalled");
            Point x = draw_phase_sample(body, final_phase, policy, chain, settings);
            const double log_acc = uniform_filter_log_acceptance(squared_norm(x), cfg.roundness, cfg.n);
            if (log_acc >= 0.0 || uniform01(chain.rng()) < std::exp(log_acc)) {
                points.push_back(std::move(x));
                break;
            }
        }
    }
    return points;
}

}  // namespace

std::vector<Point> uniform_sample(const ConvexBody& body, int count,
                                  const EstimatorOptions& options) {
    if (count < 0) throw std::invalid_argument("uniform_sample: count must be nonnegative");
    ResolvedConfig cfg = resolve_config(EstimateMode::uniform_volume, body, options, /*sampling=*/true);
    cfg.apply_speedy_map = options.apply_speedy_map.value_or(true);
    const std::uint64_t base_seed = cfg.seed;
    for (int attempt = 0;; ++attempt) {
        try {
            return uniform_sample_once(body, count, cfg);
        } catch (const walk_stuck_error&) {
            if (attempt >= options.max_retries) throw;
            cfg.seed = split_seed(base_seed, 0xabf5ULL + attempt);
        }
    }
}

VolumeReport boosted_median(EstimateMode mode, const ConvexBody& body,
                            const EstimatorOptions& options, double failure_probability) {
    if (!(failure_probability > 0.0 && failure_probability < 1.0))
        throw std::invalid_argument("boosted_median: failure probability must be in (0,1)");
    std::uint64_t runs = saturating_ceil_u64(std::log(1.0 / failure_probability));
    runs = std::max<std::uint64_t>(runs, 1);
    if (runs % 2 == 0) ++runs;
    std::vector<VolumeReport> reports;
    reports.reserve(runs);
    for (std::uint64_t r = 0; r < runs; ++r) {
        EstimatorOptions per_run = options;
        per_run.seed = runs == 1 ? options.seed : split_seed(options.seed, 0xb005ULL + r);
        reports.push_back(mode == EstimateMode::uniform_volume ? uniform_volume(body, per_run)
                                                               : gaussian_volume(body, per_run));
    }
    std::sort(reports.begin(), reports.end(),
              [](const VolumeReport& a, const VolumeReport& b) { return a.estimate < b.estimate; });
    return std::move(reports[reports.size() / 2]);
}

}  // namespace coolvol
