#include "coolvol/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace coolvol::reference {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double simpson(double h, double fa, double fm, double fb) {
    return (fa + 4.0 * fm + fb) * (h / 6.0);
}

double adaptive_step(const std::function<double(double)>& f, double a, double m, double b,
                     double fa, double fm, double fb, double whole, double abs_tol, int depth) {
    if (depth > 60) throw quadrature_error("integrate: refinement did not converge");
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(m - a, fa, flm, fm);
    const double right = simpson(b - m, fm, frm, fb);
    const double err = (left + right - whole) / 15.0;
    if (std::abs(err) <= abs_tol) return left + right + err;
    return adaptive_step(f, a, lm, m, fa, flm, fm, left, 0.5 * abs_tol, depth + 1) +
           adaptive_step(f, m, rm, b, fm, frm, fb, right, 0.5 * abs_tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (!(b >= a)) throw std::invalid_argument("integrate: requires b >= a");
    if (b == a) return 0.0;
    // Seed the absolute tolerance from a coarse composite pass so that flat
    // regions of peaked integrands still subdivide.
    const int coarse = 32;
    double coarse_sum = 0.0;
    const double h = (b - a) / coarse;
    for (int i = 0; i < coarse; ++i)
        coarse_sum += std::abs(f(a + (i + 0.5) * h)) * h;
    const double scale = std::max(coarse_sum, std::numeric_limits<double>::min());
    const double abs_tol = rel_tol * scale;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return adaptive_step(f, a, m, b, fa, fm, fb, simpson(b - a, fa, fm, fb), abs_tol, 0);
}

namespace {

// integral over [lo,hi] of exp(gamma t - t^2 x / (2 sigma_sq)) dt, computed
// with the exponent maximum factored out for stability; returns the pair
// (log scale, scaled integral) combined as log value.
double log_needle_integral(const NeedleConfig& cfg, double x) {
    const double inv_two_s = x / (2.0 * cfg.sigma_sq);
    const auto exponent = [&](double t) { return cfg.gamma * t - t * t * inv_two_s; };
    double peak = std::clamp(cfg.gamma * cfg.sigma_sq / x, cfg.lo, cfg.hi);
    const double g_max = exponent(peak);
    const double scaled = integrate(
        [&](double t) { return std::exp(exponent(t) - g_max); }, cfg.lo, cfg.hi, 1e-12);
    if (!(scaled > 0.0)) throw quadrature_error("needle integral vanished");
    return g_max + std::log(scaled);
}

void check_needle_config(const NeedleConfig& cfg) {
    if (!(cfg.sigma_sq > 0.0)) throw std::invalid_argument("needle: sigma_sq must be positive");
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 0.5))
        throw std::invalid_argument("needle: alpha must lie in [0, 1/2]");
    if (!(cfg.gamma >= 0.0)) throw std::invalid_argument("needle: gamma must be nonnegative");
    if (!(cfg.hi >= cfg.lo)) throw std::invalid_argument("needle: empty interval");
}

}  // namespace

double needle_moment_ratio(const NeedleConfig& cfg) {
    check_needle_config(cfg);
    if (cfg.hi - cfg.lo < 1e-12) return 1.0;
    if (cfg.alpha == 0.0) return 1.0;
    const double log_plus = log_needle_integral(cfg, 1.0 + cfg.alpha);
    const double log_minus = log_needle_integral(cfg, 1.0 - cfg.alpha);
    const double log_mid = log_needle_integral(cfg, 1.0);
    return std::exp(log_plus + log_minus - 2.0 * log_mid);
}

bool needle_inequality_holds(const NeedleConfig& cfg) {
    const double r1 = std::max(std::abs(cfg.lo), std::abs(cfg.hi));
    const double bound = std::exp(2.0 * r1 * r1 * cfg.alpha * cfg.alpha / cfg.sigma_sq);
    return needle_moment_ratio(cfg) <= bound * (1.0 + 1e-8);
}

namespace {

// Per-axis [-w, w] weight integral of exp(-t^2/(2 s)).
double axis_weight_integral(double half_width, double sigma_sq) {
    if (sigma_sq == kInf) return 2.0 * half_width;
    return integrate([inv_two_s = 0.5 / sigma_sq](double t) { return std::exp(-t * t * inv_two_s); },
                     -half_width, half_width, 1e-12);
}

struct GridSpec {
    std::vector<double> half_width;  // per-axis bound
    int points = 401;
};

double grid_weight_sum(const ConvexBody& body, double sigma_sq, const GridSpec& spec) {
    const int n = body.dimension();
    const int p = spec.points;
    // Precompute per-axis midpoints and Gaussian weights (including the cell
    // width) so the inner loop is one membership test and one multiply.
    std::vector<std::vector<double>> coords(n), weights(n);
    for (int d = 0; d < n; ++d) {
        const double w = spec.half_width[d];
        const double step = 2.0 * w / p;
        coords[d].resize(p);
        weights[d].resize(p);
        for (int i = 0; i < p; ++i) {
            const double t = -w + (i + 0.5) * step;
            coords[d][i] = t;
            weights[d][i] = (sigma_sq == kInf ? 1.0 : std::exp(-t * t * 0.5 / sigma_sq)) * step;
        }
    }
    Point x(n);
    std::vector<int> idx(n, 0);
    double total = 0.0;
    for (;;) {
        double cell = 1.0;
        for (int d = 0; d < n; ++d) {
            x[d] = coords[d][idx[d]];
            cell *= weights[d][idx[d]];
        }
        if (body.contains(x)) total += cell;
        int d = 0;
        while (d < n && ++idx[d] == p) {
            idx[d] = 0;
            ++d;
        }
        if (d == n) break;
    }
    return total;
}

GridSpec make_grid_spec(const ConvexBody& body, double sigma_sq, int points) {
    const int n = body.dimension();
    if (n > 3)
        throw quadrature_error("gaussian_weight_integral: grid route supports dimension <= 3 only");
    const double sigma_bound = sigma_sq == kInf ? kInf : 9.0 * std::sqrt(sigma_sq);
    const double bound = std::min(body.outer_radius(), sigma_bound);
    if (!std::isfinite(bound))
        throw quadrature_error("gaussian_weight_integral: unbounded body with infinite variance");
    GridSpec spec;
    spec.half_width.assign(n, bound);
    spec.points = std::max(points, 400);
    return spec;
}

}  // namespace

double gaussian_weight_integral(const ConvexBody& body, double sigma_sq, int grid_points_per_axis) {
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("gaussian_weight_integral: sigma_sq must be positive");
    if (body.box_half_widths()) {
        double result = 1.0;
        for (double w : *body.box_half_widths()) result *= axis_weight_integral(w, sigma_sq);
        return result;
    }
    if (sigma_sq == kInf && body.analytic_volume()) return *body.analytic_volume();
    return grid_weight_sum(body, sigma_sq, make_grid_spec(body, sigma_sq, grid_points_per_axis));
}

double gaussian_volume_quadrature(const ConvexBody& body, double sigma_sq, double* error_estimate) {
    if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq))
        throw std::invalid_argument("gaussian_volume_quadrature: sigma_sq must be positive and finite");
    const int n = body.dimension();
    const double log_norm = 0.5 * n * std::log(2.0 * M_PI * sigma_sq);
    if (body.kind() == BodyKind::box) {
        if (error_estimate) *error_estimate = 0.0;
        return gaussian_weight_integral(body, sigma_sq) * std::exp(-log_norm);
    }
    // Non-nested resolutions: membership boundaries align differently on the
    // two grids, so the difference sees the discretization bias instead of
    // cancelling it.
    const GridSpec fine = make_grid_spec(body, sigma_sq, n <= 2 ? 1201 : 541);
    GridSpec coarse = fine;
    coarse.points = n <= 2 ? 967 : 431;
    const double v_fine = grid_weight_sum(body, sigma_sq, fine) * std::exp(-log_norm);
    const double v_coarse = grid_weight_sum(body, sigma_sq, coarse) * std::exp(-log_norm);
    if (error_estimate) *error_estimate = std::abs(v_fine - v_coarse);
    return v_fine;
}

double fixed_rate_variance_ratio(const ConvexBody& body, double sigma_sq) {
    const double alpha = 1.0 / body.dimension();
    const double f_plus = gaussian_weight_integral(body, sigma_sq / (1.0 + alpha));
    const double f_minus = gaussian_weight_integral(body, sigma_sq / (1.0 - alpha));
    const double f_mid = gaussian_weight_integral(body, sigma_sq);
    return f_plus * f_minus / (f_mid * f_mid);
}

double warmness_ratio(const ConvexBody& body, double sigma_sq_cur, double sigma_sq_next) {
    return gaussian_weight_integral(body, sigma_sq_next) /
           gaussian_weight_integral(body, sigma_sq_cur);
}

}  // namespace coolvol::reference
