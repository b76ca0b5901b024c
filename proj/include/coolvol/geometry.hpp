#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coolvol {

using Point = std::vector<double>;

double squared_norm(std::span<const double> x);

/// Thrown when a body fails the unit-ball containment probe at construction
/// or when a body specification is structurally invalid.
class body_validation_error : public std::runtime_error {
public:
    explicit body_validation_error(const std::string& what) : std::runtime_error(what) {}
};

enum class BodyKind { ball, box, simplex, polytope, intersection };

/// A convex body given by a membership oracle, together with the containment
/// metadata the algorithm needs: the unit ball is inside, and the body lies
/// inside the ball of radius outer_radius() (which may be infinite for
/// unbounded bodies such as halfspaces; those are usable only in modes that
/// do not require an outer containment).
///
/// Immutable after construction and safe to share across threads. Copies are
/// shallow: they share the membership predicate and the oracle-call tally.
/// The tally is striped across cache-line-padded per-thread slots so that
/// concurrent walks do not serialize on a single counter.
class ConvexBody {
public:
    static ConvexBody ball(int dimension, double radius);
    static ConvexBody box(std::vector<double> half_widths);
    static ConvexBody box(int dimension, double half_width);
    /// Simplex {x : x_i >= -s for all i,  sum_i x_i <= s*sqrt(n)}; contains
    /// the unit ball exactly when s >= 1.
    static ConvexBody simplex(int dimension, double scale);
    /// Halfspace polytope {x : A x <= b}. outer_radius must be declared by
    /// the caller (may be +infinity for unbounded polytopes).
    static ConvexBody polytope(int dimension, std::vector<std::vector<double>> a_rows,
                               std::vector<double> b, double outer_radius);
    static ConvexBody intersection(std::vector<ConvexBody> members);

    int dimension() const;
    double outer_radius() const;
    BodyKind kind() const;
    const std::string& description() const;

    /// Membership oracle. Every call increments this body's oracle tally.
    /// Throws std::invalid_argument on dimension mismatch.
    bool contains(std::span<const double> x) const;

    /// Exact Lebesgue volume for kinds with a closed form (ball, box,
    /// simplex); nullopt otherwise.
    std::optional<double> analytic_volume() const;

    /// Per-axis half widths when the body is a box; nullopt otherwise.
    /// Lets separable quadrature avoid probing the oracle.
    const std::optional<std::vector<double>>& box_half_widths() const;

    /// Total number of contains() evaluations so far, merged over threads.
    std::uint64_t oracle_calls() const;

private:
    struct Impl;
    explicit ConvexBody(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

/// Probes the two declared containments with `probes` random directions:
/// points just inside the unit sphere must be members, points just outside
/// radius outer_radius must not. Throws body_validation_error on the first
/// failed probe. Called by every factory; exposed for colder re-validation.
void validate_containment(const ConvexBody& body, int probes = 1000);

}  // namespace coolvol
