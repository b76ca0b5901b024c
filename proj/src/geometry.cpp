#include "coolvol/geometry.hpp"

#include "coolvol/rng.hpp"

#include <atomic>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace coolvol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cache-line-padded counter slots; threads hash onto distinct slots so the
// relaxed increments in the walk inner loop stay uncontended.
struct alignas(64) TallySlot {
    std::atomic<std::uint64_t> n{0};
};

constexpr std::size_t kTallySlots = 64;

std::size_t tally_slot_index() {
    static std::atomic<std::size_t> next{0};
    thread_local const std::size_t slot = next.fetch_add(1, std::memory_order_relaxed) % kTallySlots;
    return slot;
}

double ball_log_volume(int n, double radius) {
    // log vol(r B_n) = (n/2) log(pi) - lgamma(n/2 + 1) + n log r
    return 0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n + 1.0) + n * std::log(radius);
}

}  // namespace

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

struct ConvexBody::Impl {
    int dimension = 0;
    double outer_radius = kInf;
    BodyKind kind = BodyKind::ball;
    std::string description;
    std::optional<double> closed_form_volume;
    std::optional<std::vector<double>> box_half_widths;
    std::function<bool(std::span<const double>)> inside;
    mutable std::array<TallySlot, kTallySlots> tally;
};

ConvexBody::ConvexBody(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

int ConvexBody::dimension() const { return impl_->dimension; }
double ConvexBody::outer_radius() const { return impl_->outer_radius; }
BodyKind ConvexBody::kind() const { return impl_->kind; }
const std::string& ConvexBody::description() const { return impl_->description; }

bool ConvexBody::contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != impl_->dimension)
        throw std::invalid_argument("ConvexBody::contains: point dimension " +
                                    std::to_string(x.size()) + " does not match body dimension " +
                                    std::to_string(impl_->dimension));
    impl_->tally[tally_slot_index()].n.fetch_add(1, std::memory_order_relaxed);
    return impl_->inside(x);
}

std::optional<double> ConvexBody::analytic_volume() const { return impl_->closed_form_volume; }

const std::optional<std::vector<double>>& ConvexBody::box_half_widths() const {
    return impl_->box_half_widths;
}

std::uint64_t ConvexBody::oracle_calls() const {
    std::uint64_t total = 0;
    for (const auto& slot : impl_->tally) total += slot.n.load(std::memory_order_relaxed);
    return total;
}

void validate_containment(const ConvexBody& body, int probes) {
    const int n = body.dimension();
    Rng rng(0x5eedc0deULL);  // fixed seed: validation is deterministic
    std::normal_distribution<double> gauss(0.0, 1.0);
    Point x(n);
    const double r_out = body.outer_radius();
    for (int p = 0; p < probes; ++p) {
        double norm_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] = gauss(rng);
            norm_sq += x[i] * x[i];
        }
        if (norm_sq == 0.0) continue;
        const double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (int i = 0; i < n; ++i) x[i] *= inv_norm * (1.0 - 1e-9);
        if (!body.contains(x))
            throw body_validation_error(body.description() +
                                        ": unit ball not contained in body (boundary probe failed)");
        if (std::isfinite(r_out)) {
            const double blow_up = r_out * (1.0 + 1e-9) / (1.0 - 1e-9);
            for (int i = 0; i < n; ++i) x[i] *= blow_up;
            if (body.contains(x))
                throw body_validation_error(body.description() +
                                            ": declared outer_radius violated (exterior probe inside)");
        }
    }
}

ConvexBody ConvexBody::ball(int dimension, double radius) {
    if (dimension < 1) throw body_validation_error("ball: dimension must be positive");
    if (!(radius > 0.0)) throw body_validation_error("ball: radius must be positive");
    auto impl = std::make_shared<Impl>();
    impl->dimension = dimension;
    impl->outer_radius = radius;
    impl->kind = BodyKind::ball;
    impl->description = "ball(r=" + std::to_string(radius) + ", n=" + std::to_string(dimension) + ")";
    impl->closed_form_volume = std::exp(ball_log_volume(dimension, radius));
    const double r_sq = radius * radius;
    impl->inside = [r_sq](std::span<const double> x) { return squared_norm(x) <= r_sq; };
    ConvexBody body(std::move(impl));
    validate_containment(body);
    return body;
}

ConvexBody ConvexBody::box(std::vector<double> half_widths) {
    const int n = static_cast<int>(half_widths.size());
    if (n < 1) throw body_validation_error("box: half_widths must be nonempty");
    double volume = 1.0;
    double radius_sq = 0.0;
    for (double w : half_widths) {
        if (!(w > 0.0)) throw body_validation_error("box: half_widths must be positive");
        volume *= 2.0 * w;
        radius_sq += w * w;
    }
    auto impl = std::make_shared<Impl>();
    impl->dimension = n;
    impl->outer_radius = std::sqrt(radius_sq);
    impl->kind = BodyKind::box;
    impl->description = "box(n=" + std::to_string(n) + ")";
    impl->closed_form_volume = volume;
    impl->box_half_widths = half_widths;
    impl->inside = [w = std::move(half_widths)](std::span<const double> x) {
        for (std::size_t i = 0; i < w.size(); ++i)
            if (x[i] > w[i] || x[i] < -w[i]) return false;
        return true;
    };
    ConvexBody body(std::move(impl));
    validate_containment(body);
    return body;
}

ConvexBody ConvexBody::box(int dimension, double half_width) {
    return box(std::vector<double>(static_cast<std::size_t>(dimension), half_width));
}

ConvexBody ConvexBody::simplex(int dimension, double scale) {
    if (dimension < 1) throw body_validation_error("simplex: dimension must be positive");
    if (!(scale > 0.0)) throw body_validation_error("simplex: scale must be positive");
    const int n = dimension;
    const double s = scale;
    const double root_n = std::sqrt(static_cast<double>(n));
    auto impl = std::make_shared<Impl>();
    impl->dimension = n;
    // Farthest vertex: one coordinate at s*(sqrt(n)+n-1), the rest at -s.
    const double peak = s * (root_n + n - 1);
    impl->outer_radius = std::sqrt(peak * peak + (n - 1) * s * s);
    impl->kind = BodyKind::simplex;
    impl->description = "simplex(s=" + std::to_string(scale) + ", n=" + std::to_string(n) + ")";
    // Shift by +s in every coordinate: standard simplex scaled by s*(sqrt(n)+n).
    double log_vol = n * std::log(s * (root_n + n));
    for (int i = 2; i <= n; ++i) log_vol -= std::log(static_cast<double>(i));
    impl->closed_form_volume = std::exp(log_vol);
    const double sum_cap = s * root_n;
    impl->inside = [n, s, sum_cap](std::span<const double> x) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (x[i] < -s) return false;
            sum += x[i];
        }
        return sum <= sum_cap;
    };
    ConvexBody body(std::move(impl));
    validate_containment(body);
    return body;
}

ConvexBody ConvexBody::polytope(int dimension, std::vector<std::vector<double>> a_rows,
                                std::vector<double> b, double outer_radius) {
    if (dimension < 1) throw body_validation_error("polytope: dimension must be positive");
    if (a_rows.size() != b.size())
        throw body_validation_error("polytope: A row count does not match b length");
    for (const auto& row : a_rows)
        if (static_cast<int>(row.size()) != dimension)
            throw body_validation_error("polytope: A row width does not match dimension");
    if (!(outer_radius > 0.0)) throw body_validation_error("polytope: outer_radius must be positive");
    // Flatten rows for a cache-friendly inner loop.
    std::vector<double> a_flat;
    a_flat.reserve(a_rows.size() * dimension);
    for (const auto& row : a_rows) a_flat.insert(a_flat.end(), row.begin(), row.end());
    auto impl = std::make_shared<Impl>();
    impl->dimension = dimension;
    impl->outer_radius = outer_radius;
    impl->kind = BodyKind::polytope;
    impl->description = "polytope(m=" + std::to_string(b.size()) + ", n=" + std::to_string(dimension) + ")";
    impl->inside = [n = dimension, a = std::move(a_flat), b = std::move(b)](std::span<const double> x) {
        const double* row = a.data();
        for (std::size_t r = 0; r < b.size(); ++r, row += n) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += row[i] * x[i];
            if (dot > b[r]) return false;
        }
        return true;
    };
    ConvexBody body(std::move(impl));
    validate_containment(body);
    return body;
}

ConvexBody ConvexBody::intersection(std::vector<ConvexBody> members) {
    if (members.empty()) throw body_validation_error("intersection: needs at least one member");
    const int n = members.front().dimension();
    double r_out = kInf;
    for (const auto& m : members) {
        if (m.dimension() != n)
            throw body_validation_error("intersection: members disagree on dimension");
        r_out = std::min(r_out, m.outer_radius());
    }
    auto impl = std::make_shared<Impl>();
    impl->dimension = n;
    impl->outer_radius = r_out;
    impl->kind = BodyKind::intersection;
    impl->description = "intersection(" + std::to_string(members.size()) + " members, n=" +
                        std::to_string(n) + ")";
    impl->inside = [members = std::move(members)](std::span<const double> x) {
        for (const auto& m : members)
            if (!m.contains(x)) return false;
        return true;
    };
    ConvexBody body(std::move(impl));
    validate_containment(body);
    return body;
}

}  // namespace coolvol
