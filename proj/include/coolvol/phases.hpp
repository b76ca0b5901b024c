#pragma once

#include <limits>
#include <span>
#include <vector>

#include "coolvol/geometry.hpp"

namespace coolvol {

inline constexpr double kInfiniteVariance = std::numeric_limits<double>::infinity();

/// One annealing stage: a spherical Gaussian of the given variance restricted
/// to K intersected with the ball of radius 4*sigma*sqrt(n). Infinite
/// variance encodes the final uniform stage (flat weight, no restriction).
class GaussianPhase {
public:
    GaussianPhase(int dimension, double variance);

    int dimension() const { return dimension_; }
    double variance() const { return variance_; }
    bool is_uniform() const { return variance_ == kInfiniteVariance; }
    double restriction_radius() const { return restriction_radius_; }
    double restriction_radius_sq() const { return restriction_radius_sq_; }

    /// Gaussian exponent -r^2/(2 sigma^2) as a function of the squared norm;
    /// 0 for the uniform stage. Support restrictions are not applied here.
    double log_weight(double norm_sq) const { return -norm_sq * inv_two_variance_; }

    /// Full log density: log_weight inside K and the restriction ball,
    /// -infinity outside. (Unnormalized.)
    double log_density_at(const ConvexBody& body, std::span<const double> x) const;

private:
    int dimension_;
    double variance_;
    double inv_two_variance_;  // 1/(2 sigma^2), exactly 0 for the uniform stage
    double restriction_radius_;
    double restriction_radius_sq_;
};

/// Cooling rate beta(sigma): 1 + 1/n while sigma^2 <= 1, then 1 + sigma^2/(C^2 n).
/// Throws std::invalid_argument for nonpositive sigma^2.
double cooling_rate(double sigma_sq, int n, double roundness);

/// log of f_next(x)/f_cur(x) = ||x||^2/2 * (1/sigma_cur^2 - 1/sigma_next^2),
/// with 1/inf = 0. Requires x inside the current phase's restriction ball
/// (zero current density is a contract violation). Membership in K is the
/// caller's responsibility; the two supports nest since variances increase.
double log_density_ratio(const GaussianPhase& next, const GaussianPhase& cur,
                         std::span<const double> x);
double log_density_ratio_from_norm_sq(const GaussianPhase& next, const GaussianPhase& cur,
                                      double norm_sq);

enum class ScheduleTarget {
    uniform_volume,   // ends with an infinite-variance (uniform) stage
    gaussian_volume,  // ends exactly at sigma^2 = 1
    sample_only,      // ends exactly at a caller-chosen variance
};

/// The ordered variance ladder sigma_0^2 < sigma_1^2 < ... starting at
/// 1/(4n). Deterministic: identical inputs give bit-identical ladders.
class CoolingSchedule {
public:
    static CoolingSchedule build(int n, double roundness, ScheduleTarget target,
                                 double final_variance = 1.0);

    int dimension() const { return n_; }
    double roundness() const { return roundness_; }
    ScheduleTarget target() const { return target_; }
    const std::vector<double>& variances() const { return variances_; }
    std::size_t phase_count() const { return variances_.size(); }
    GaussianPhase phase(std::size_t i) const { return GaussianPhase(n_, variances_[i]); }

private:
    int n_ = 0;
    double roundness_ = 1.0;
    ScheduleTarget target_ = ScheduleTarget::uniform_volume;
    std::vector<double> variances_;
};

}  // namespace coolvol
