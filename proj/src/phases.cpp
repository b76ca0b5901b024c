#include "coolvol/phases.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace coolvol {

GaussianPhase::GaussianPhase(int dimension, double variance) : dimension_(dimension), variance_(variance) {
    if (dimension < 1) throw std::invalid_argument("GaussianPhase: dimension must be positive");
    if (!(variance > 0.0)) throw std::invalid_argument("GaussianPhase: variance must be positive");
    if (is_uniform()) {
        inv_two_variance_ = 0.0;
        restriction_radius_ = kInfiniteVariance;
        restriction_radius_sq_ = kInfiniteVariance;
    } else {
        inv_two_variance_ = 0.5 / variance;
        restriction_radius_ = 4.0 * std::sqrt(variance * dimension);
        restriction_radius_sq_ = restriction_radius_ * restriction_radius_;
    }
}

double GaussianPhase::log_density_at(const ConvexBody& body, std::span<const double> x) const {
    const double norm_sq = squared_norm(x);
    if (norm_sq > restriction_radius_sq_ || !body.contains(x))
        return -kInfiniteVariance;
    return log_weight(norm_sq);
}

double cooling_rate(double sigma_sq, int n, double roundness) {
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("cooling_rate: sigma^2 must be positive");
    if (sigma_sq <= 1.0) return 1.0 + 1.0 / n;
    return 1.0 + sigma_sq / (roundness * roundness * n);
}

double log_density_ratio_from_norm_sq(const GaussianPhase& next, const GaussianPhase& cur,
                                      double norm_sq) {
    if (norm_sq > cur.restriction_radius_sq())
        throw std::invalid_argument("log_density_ratio: point outside current phase support");
    // log_weight is -norm_sq/(2 sigma^2) with the uniform stage contributing 0.
    return next.log_weight(norm_sq) - cur.log_weight(norm_sq);
}

double log_density_ratio(const GaussianPhase& next, const GaussianPhase& cur,
                         std::span<const double> x) {
    return log_density_ratio_from_norm_sq(next, cur, squared_norm(x));
}

CoolingSchedule CoolingSchedule::build(int n, double roundness, ScheduleTarget target,
                                       double final_variance) {
    if (n < 1) throw std::invalid_argument("CoolingSchedule: dimension must be positive");
    if (target == ScheduleTarget::uniform_volume || target == ScheduleTarget::sample_only) {
        if (!(roundness >= 1.0) || !std::isfinite(roundness))
            throw std::invalid_argument("CoolingSchedule: roundness must be finite and >= 1");
    }
    CoolingSchedule schedule;
    schedule.n_ = n;
    schedule.roundness_ = roundness;
    schedule.target_ = target;

    const double sigma0_sq = 1.0 / (4.0 * n);
    std::vector<double>& vars = schedule.variances_;
    vars.push_back(sigma0_sq);

    switch (target) {
        case ScheduleTarget::uniform_volume: {
            const double cap = roundness * roundness * n;
            while (vars.back() <= cap) {
                double next = vars.back() * cooling_rate(vars.back(), n, roundness);
                if (next > cap) next = kInfiniteVariance;
                vars.push_back(next);
            }
            break;
        }
        case ScheduleTarget::gaussian_volume: {
            while (vars.back() < 1.0) {
                double next = vars.back() * cooling_rate(vars.back(), n, roundness);
                vars.push_back(std::min(next, 1.0));
            }
            break;
        }
        case ScheduleTarget::sample_only: {
            if (!(final_variance >= sigma0_sq) || !std::isfinite(final_variance))
                throw std::invalid_argument(
                    "CoolingSchedule: sample_only final variance must be finite and >= 1/(4n)");
            while (vars.back() < final_variance) {
                double next = vars.back() * cooling_rate(vars.back(), n, roundness);
                vars.push_back(std::min(next, final_variance));
            }
            break;
        }
    }
    return schedule;
}

}  // namespace coolvol
