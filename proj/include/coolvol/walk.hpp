#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "coolvol/geometry.hpp"
#include "coolvol/phases.hpp"
#include "coolvol/rng.hpp"

namespace coolvol {

/// Raised when a walk exceeds its hard proposal cap, when initial rejection
/// sampling stalls, or when the target-distribution mapping stalls. All of
/// these signal a body violating the declared containment preconditions.
class walk_stuck_error : public std::runtime_error {
public:
    explicit walk_stuck_error(const std::string& what) : std::runtime_error(what) {}
};

struct WalkCounters {
    std::uint64_t proper_steps = 0;      // proposals landing in K and the restriction ball
    std::uint64_t wasted_steps = 0;      // proposals landing outside
    std::uint64_t filter_rejections = 0; // proper steps rejected by the Metropolis filter
    std::uint64_t lazy_stays = 0;        // coin said stay; no proposal drawn
    std::uint64_t proposals() const { return proper_steps + wasted_steps; }
};

struct StepPolicy {
    double delta = 0.0;                     // proposal ball radius
    std::uint64_t proper_step_budget = 1;   // proper steps per delivered sample
    bool lazy = true;                       // stay put with probability 1/2 first
    double proposal_cap_factor = 100.0;     // hard cap: proposals <= factor * budget
};

enum class StepOutcome { moved, filter_rejected, wasted, lazy_stay };

/// Mutable chain state: current position (always inside K and the restriction
/// ball), its cached squared norm, a seeded engine, and the step tallies.
/// Single-threaded by construction; run one WalkState per thread.
class WalkState {
public:
    WalkState(Point position, std::uint64_t seed);

    const Point& position() const { return position_; }
    double position_norm_sq() const { return position_norm_sq_; }
    Rng& rng() { return rng_; }
    WalkCounters& counters() { return counters_; }
    const WalkCounters& counters() const { return counters_; }

private:
    friend StepOutcome ball_walk_step(WalkState&, const GaussianPhase&, const StepPolicy&,
                                      const ConvexBody&);
    Point position_;
    double position_norm_sq_ = 0.0;
    Point proposal_;  // scratch, same length as position_
    Rng rng_;
    NormalSampler gauss_;
    WalkCounters counters_;
};

/// delta = min{sigma,1} / (divisor * sqrt(n * log(n/eps))). The default
/// divisor is the worst-case constant; the practical profile shrinks it.
/// Throws std::invalid_argument unless 0 < eps < 1.
double step_size(double sigma, int n, double eps, double divisor = 4096.0);

/// ceil(mixing_constant * max{sigma^2,1} * n^2 * log(1/nu)), saturated at
/// 2^63 for audit-scale constants. Throws unless nu is in (0,1).
std::uint64_t proper_step_budget(double sigma_sq, int n, double nu, double mixing_constant);

/// One transition of the lazy Metropolis ball walk targeting the phase
/// density on K intersected with the restriction ball.
StepOutcome ball_walk_step(WalkState& state, const GaussianPhase& phase, const StepPolicy& policy,
                           const ConvexBody& body);

/// Advances the chain until proper_steps has grown by policy.proper_step_budget.
/// Throws walk_stuck_error once total proposals drawn in this call exceed
/// policy.proposal_cap_factor times the budget.
void run_until_mixed(WalkState& state, const GaussianPhase& phase, const StepPolicy& policy,
                     const ConvexBody& body);

/// Rejection-samples N(0, sigma0_sq I) until the draw lies in K and the
/// phase restriction ball. Gives up after 10^6 consecutive rejections.
Point sample_initial(const ConvexBody& body, double sigma0_sq, Rng& rng);

/// log acceptance probability of the shrink-and-filter map at a point with
/// the given squared norm: the factor f(u/c)/f(u) with c = 1 - 1/(2n).
double speedy_map_log_acceptance(const GaussianPhase& phase, double u_norm_sq);

/// Maps a stream of points distributed as the proper-step (speedy) stationary
/// law to a single point distributed as the phase density: scale u -> u/c
/// with c = 1 - 1/(2n), accept with probability f(u/c)/f(u), move to the next
/// stream point on rejection. Stream points must be (near-)independent draws;
/// correlated reuse degrades the filter. Gives up after 10^3 consecutive
/// rejections.
Point map_speedy_to_target(const std::function<const Point&()>& next_point,
                           const GaussianPhase& phase, const ConvexBody& body,
                           Rng& rng);

/// Monte Carlo estimate of the local conductance ell(x): the fraction of
/// `trials` uniform draws from x + delta B_n that lie in K.
double estimate_local_conductance(std::span<const double> x, double delta, const ConvexBody& body,
                                  int trials, Rng& rng);

}  // namespace coolvol
