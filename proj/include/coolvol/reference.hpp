#pragma once

#include <functional>
#include <stdexcept>

#include "coolvol/geometry.hpp"

namespace coolvol::reference {

/// Independent numeric routes used only by tests and diagnostics. Nothing in
/// this namespace touches the sampler or the estimator implementation.

class quadrature_error : public std::runtime_error {
public:
    explicit quadrature_error(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive Simpson integration of f over [a,b] to the given relative
/// tolerance. Throws quadrature_error if the refinement does not converge.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);

/// A 1-D exponential-needle configuration: the weight e^{gamma t} times a
/// Gaussian factor of variance sigma_sq on the interval [lo, hi], with
/// flattening parameter alpha in [0, 1/2].
struct NeedleConfig {
    double lo = -1.0;
    double hi = 1.0;
    double gamma = 0.0;
    double sigma_sq = 1.0;
    double alpha = 0.25;
};

/// The needle second-moment ratio
///   I(1+alpha) * I(1-alpha) / I(1)^2,
/// where I(x) = integral over [lo,hi] of e^{gamma t} e^{-t^2 x/(2 sigma_sq)} dt.
/// Degenerate intervals (width < 1e-12) return 1 by convention.
double needle_moment_ratio(const NeedleConfig& cfg);

/// Checks the ratio against exp(2 R1^2 alpha^2 / sigma_sq) with
/// R1 = max{|lo|,|hi|} and 1e-8 relative slack.
bool needle_inequality_holds(const NeedleConfig& cfg);

/// Unnormalized Gaussian weight integral of the body,
///   F(s) = integral over K of e^{-||x||^2/(2 s)} dx,
/// with s = +infinity meaning the plain volume. Boxes use per-axis adaptive
/// quadrature in any dimension; other kinds use a tensor midpoint grid and
/// require dimension <= 3 (throws quadrature_error otherwise).
double gaussian_weight_integral(const ConvexBody& body, double sigma_sq,
                                int grid_points_per_axis = 401);

/// Gaussian probability measure of the body under N(0, sigma_sq I):
/// the weight integral divided by (2 pi sigma_sq)^{n/2}. If error_estimate
/// is non-null it receives a grid-halving error bound (0 for the separable
/// box route, which is tolerance-controlled).
double gaussian_volume_quadrature(const ConvexBody& body, double sigma_sq,
                                  double* error_estimate = nullptr);

/// The ratio estimator's second-moment ratio at the fixed cooling rate
/// 1 + 1/n, evaluated by quadrature:
///   F(s/(1+a)) F(s/(1-a)) / F(s)^2   with a = 1/n, s = sigma_sq.
double fixed_rate_variance_ratio(const ConvexBody& body, double sigma_sq);

/// Warm-start ratio between consecutive phases,
///   A = F(sigma_sq_next) / F(sigma_sq_cur),
/// which dominates the warmness of one phase's distribution with respect to
/// the next (the density-ratio supremum is attained at the origin and is 1).
double warmness_ratio(const ConvexBody& body, double sigma_sq_cur, double sigma_sq_next);

}  // namespace coolvol::reference
