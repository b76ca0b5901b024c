#include "coolvol/walk.hpp"

#include <cmath>
#include <limits>

namespace coolvol {

namespace {

std::uint64_t saturating_ceil(double v) {
    constexpr double kMax = 9.2e18;  // just under 2^63
    if (!(v > 0.0)) return 0;
    if (v >= kMax) return static_cast<std::uint64_t>(kMax);
    return static_cast<std::uint64_t>(std::ceil(v));
}

}  // namespace

WalkState::WalkState(Point position, std::uint64_t seed)
    : position_(std::move(position)),
      position_norm_sq_(squared_norm(position_)),
      proposal_(position_.size(), 0.0),
      rng_(seed) {}

double step_size(double sigma, int n, double eps, double divisor) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("step_size: eps must be in (0,1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("step_size: sigma must be positive");
    if (!(divisor > 0.0)) throw std::invalid_argument("step_size: divisor must be positive");
    return std::min(sigma, 1.0) / (divisor * std::sqrt(n * std::log(n / eps)));
}

std::uint64_t proper_step_budget(double sigma_sq, int n, double nu, double mixing_constant) {
    if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("proper_step_budget: nu must be in (0,1)");
    const double steps = mixing_constant * std::max(sigma_sq, 1.0) * static_cast<double>(n) * n *
                         std::log(1.0 / nu);
    return saturating_ceil(steps);
}

StepOutcome ball_walk_step(WalkState& s, const GaussianPhase& phase, const StepPolicy& policy,
                           const ConvexBody& body) {
    Rng& rng = s.rng_;
    if (policy.lazy && (rng() & 1ull)) {
        ++s.counters_.lazy_stays;
        return StepOutcome::lazy_stay;
    }
    const int n = static_cast<int>(s.position_.size());
    double dir_norm_sq;
    do {
        dir_norm_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = s.gauss_(rng);
            s.proposal_[i] = g;
            dir_norm_sq += g * g;
        }
    } while (dir_norm_sq == 0.0);
    const double scale = policy.delta * ball_radius_factor(rng, n) / std::sqrt(dir_norm_sq);
    double y_norm_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = s.position_[i] + scale * s.proposal_[i];
        s.proposal_[i] = y;
        y_norm_sq += y * y;
    }
    if (y_norm_sq > phase.restriction_radius_sq() || !body.contains(s.proposal_)) {
        ++s.counters_.wasted_steps;
        return StepOutcome::wasted;
    }
    ++s.counters_.proper_steps;
    // min{1, f(y)/f(x)} in log space; never exponentiate the densities.
    const double log_ratio = phase.log_weight(y_norm_sq) - phase.log_weight(s.position_norm_sq_);
    if (log_ratio >= 0.0 || uniform01(rng) < std::exp(log_ratio)) {
        s.position_.swap(s.proposal_);
        s.position_norm_sq_ = y_norm_sq;
        return StepOutcome::moved;
    }
    ++s.counters_.filter_rejections;
    return StepOutcome::filter_rejected;
}

void run_until_mixed(WalkState& state, const GaussianPhase& phase, const StepPolicy& policy,
                     const ConvexBody& body) {
    if (policy.proper_step_budget == 0) return;
    const std::uint64_t target = state.counters().proper_steps + policy.proper_step_budget;
    const std::uint64_t cap = saturating_ceil(policy.proposal_cap_factor *
                                              static_cast<double>(policy.proper_step_budget));
    const std::uint64_t proposals_start = state.counters().proposals();
    while (state.counters().proper_steps < target) {
        ball_walk_step(state, phase, policy, body);
        if (state.counters().proposals() - proposals_start > cap)
            throw walk_stuck_error(
                "walk stuck: proposal cap exceeded (body likely violates the unit-ball "
                "containment precondition)");
    }
}

Point sample_initial(const ConvexBody& body, double sigma0_sq, Rng& rng) {
    if (!(sigma0_sq > 0.0)) throw std::invalid_argument("sample_initial: variance must be positive");
    const int n = body.dimension();
    const double sigma0 = std::sqrt(sigma0_sq);
    const double radius_sq = 16.0 * sigma0_sq * n;  // restriction ball of the starting phase
    NormalSampler gauss;
    Point x(n);
    for (int trial = 0; trial < 1000000; ++trial) {
        double norm_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] = sigma0 * gauss(rng);
            norm_sq += x[i] * x[i];
        }
        if (norm_sq <= radius_sq && body.contains(x)) return x;
    }
    throw walk_stuck_error("sample_initial: unit ball not inside body (rejection sampling stalled)");
}

double speedy_map_log_acceptance(const GaussianPhase& phase, double u_norm_sq) {
    const double c = 1.0 - 0.5 / phase.dimension();
    const double v_norm_sq = u_norm_sq / (c * c);
    return phase.log_weight(v_norm_sq) - phase.log_weight(u_norm_sq);
}

Point map_speedy_to_target(const std::function<const Point&()>& next_point,
                           const GaussianPhase& phase, const ConvexBody& body,
                           Rng& rng) {
    const double c = 1.0 - 0.5 / phase.dimension();
    Point v(static_cast<std::size_t>(phase.dimension()), 0.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const Point& u = next_point();
        double u_norm_sq = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            v[i] = u[i] / c;
            u_norm_sq += u[i] * u[i];
        }
        const double v_norm_sq = u_norm_sq / (c * c);
        if (v_norm_sq > phase.restriction_radius_sq() || !body.contains(v)) continue;
        const double log_acc = phase.log_weight(v_norm_sq) - phase.log_weight(u_norm_sq);
        if (log_acc >= 0.0 || uniform01(rng) < std::exp(log_acc)) return v;
    }
    throw walk_stuck_error("map_speedy_to_target: rejection stalled (stream not speedy-stationary?)");
}

double estimate_local_conductance(std::span<const double> x, double delta, const ConvexBody& body,
                                  int trials, Rng& rng) {
    if (trials <= 0) throw std::invalid_argument("estimate_local_conductance: trials must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("estimate_local_conductance: delta must be positive");
    const int n = static_cast<int>(x.size());
    NormalSampler gauss;
    Point y(n);
    int inside = 0;
    for (int t = 0; t < trials; ++t) {
        double dir_norm_sq;
        do {
            dir_norm_sq = 0.0;
            for (int i = 0; i < n; ++i) {
                y[i] = gauss(rng);
                dir_norm_sq += y[i] * y[i];
            }
        } while (dir_norm_sq == 0.0);
        const double scale = delta * ball_radius_factor(rng, n) / std::sqrt(dir_norm_sq);
        for (int i = 0; i < n; ++i) y[i] = x[i] + scale * y[i];
        if (body.contains(y)) ++inside;
    }
    return static_cast<double>(inside) / trials;
}

}  // namespace coolvol
