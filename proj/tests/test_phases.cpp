#include <doctest.h>

#include <cmath>

#include "coolvol/phases.hpp"
#include "coolvol/rng.hpp"

using namespace coolvol;

TEST_CASE("cooling rate branches") {
    CHECK(cooling_rate(0.5, 100, 2.0) == doctest::Approx(1.01).epsilon(1e-15));
    CHECK(cooling_rate(4.0, 100, 1.0) == doctest::Approx(1.04).epsilon(1e-15));
    // sigma^2 = 1 sits on the slow branch.
    CHECK(cooling_rate(1.0, 10, 5.0) == doctest::Approx(1.1).epsilon(1e-15));
    CHECK_THROWS_AS(cooling_rate(0.0, 10, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(cooling_rate(-1.0, 10, 1.0), std::invalid_argument);
}

TEST_CASE("uniform schedule for n=2, C=1 unrolled") {
    const CoolingSchedule s = CoolingSchedule::build(2, 1.0, ScheduleTarget::uniform_volume);
    // sigma_0^2 = 1/8, slow factor 1.5 while <= 1, fast 1 + sigma^2/2 after,
    // jump to infinity once past C^2 n = 2.
    const std::vector<double> expected = {0.125,      0.1875,     0.28125, 0.421875,
                                          0.6328125,  0.94921875, 1.423828125,
                                          kInfiniteVariance};
    REQUIRE(s.variances().size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(s.variances()[i] == expected[i]);

    int slow = 0;
    for (double v : s.variances())
        if (v <= 1.0) ++slow;
    CHECK(slow == 6);
}

TEST_CASE("schedule endpoints per target") {
    for (int n : {1, 2, 5, 16}) {
        const CoolingSchedule g = CoolingSchedule::build(n, 1.0, ScheduleTarget::gaussian_volume);
        CHECK(g.variances().front() == 1.0 / (4.0 * n));
        CHECK(g.variances().back() == 1.0);
        for (std::size_t i = 1; i < g.variances().size(); ++i)
            CHECK(g.variances()[i] > g.variances()[i - 1]);

        const CoolingSchedule u = CoolingSchedule::build(n, 1.5, ScheduleTarget::uniform_volume);
        CHECK(u.variances().back() == kInfiniteVariance);
        CHECK(u.variances()[u.variances().size() - 2] <= 1.5 * 1.5 * n);

        const double target = 0.7;
        const CoolingSchedule p =
            CoolingSchedule::build(n, 1.0, ScheduleTarget::sample_only, target);
        CHECK(p.variances().back() == target);
    }
}

TEST_CASE("slow phase count matches the closed form") {
    for (int n : {2, 3, 6, 12}) {
        const CoolingSchedule s = CoolingSchedule::build(n, 1.0, ScheduleTarget::uniform_volume);
        int slow = 0;
        for (double v : s.variances())
            if (v <= 1.0) ++slow;
        const int expected = static_cast<int>(std::ceil(std::log(4.0 * n) / std::log(1.0 + 1.0 / n)));
        CHECK(slow == expected);
    }
}

TEST_CASE("consecutive variances follow the cooling rate exactly") {
    for (int n : {2, 5, 9}) {
        for (double c : {1.0, 1.7}) {
            const CoolingSchedule s = CoolingSchedule::build(n, c, ScheduleTarget::uniform_volume);
            const auto& v = s.variances();
            for (std::size_t i = 0; i + 1 < v.size(); ++i) {
                if (v[i + 1] == kInfiniteVariance) {
                    CHECK(v[i] * cooling_rate(v[i], n, c) > c * c * n);
                } else {
                    CHECK(v[i + 1] == v[i] * cooling_rate(v[i], n, c));
                }
            }
        }
        // The gaussian ladder may clamp only its final step.
        const CoolingSchedule g = CoolingSchedule::build(n, 1.0, ScheduleTarget::gaussian_volume);
        const auto& v = g.variances();
        for (std::size_t i = 0; i + 2 < v.size(); ++i)
            CHECK(v[i + 1] == v[i] * cooling_rate(v[i], n, 1.0));
        CHECK(v.back() == 1.0);
    }
}

TEST_CASE("schedules are deterministic") {
    const CoolingSchedule a = CoolingSchedule::build(7, 1.3, ScheduleTarget::uniform_volume);
    const CoolingSchedule b = CoolingSchedule::build(7, 1.3, ScheduleTarget::uniform_volume);
    CHECK(a.variances() == b.variances());
}

TEST_CASE("fast phases per doubling stay within the chunk bound") {
    const int n = 6;
    const double c_sq_n = 6.0;
    const CoolingSchedule s = CoolingSchedule::build(n, 1.0, ScheduleTarget::uniform_volume);
    for (double v : s.variances()) {
        if (v <= 1.0 || v == kInfiniteVariance) continue;
        int in_chunk = 0;
        for (double w : s.variances())
            if (w >= v && w < 2.0 * v) ++in_chunk;
        CHECK(in_chunk <= static_cast<int>(std::ceil(2.0 * c_sq_n / v)) + 1);
    }
}

TEST_CASE("log density ratio") {
    const GaussianPhase cur(2, 1.0);
    const GaussianPhase flat(2, kInfiniteVariance);

    CHECK(log_density_ratio(cur, cur, Point{0.3, -0.4}) == 0.0);
    CHECK(log_density_ratio(flat, cur, Point{0.0, 0.0}) == 0.0);
    // ||x||^2 = 2 against the uniform phase: exactly 1, ratio e.
    CHECK(log_density_ratio(flat, cur, Point{std::sqrt(2.0), 0.0}) ==
          doctest::Approx(1.0).epsilon(1e-15));

    // Outside the current restriction ball (radius 4 sqrt(2)).
    CHECK_THROWS_AS((void)log_density_ratio(flat, cur, Point{6.0, 0.0}), std::invalid_argument);
}

TEST_CASE("phase log density and restriction") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase tight(2, 0.01);
    const GaussianPhase flat(2, kInfiniteVariance);

    CHECK(tight.log_density_at(box, Point{0.0, 0.0}) == 0.0);
    CHECK(flat.log_density_at(box, Point{0.0, 0.0}) == 0.0);
    CHECK(tight.restriction_radius() == doctest::Approx(4.0 * 0.1 * std::sqrt(2.0)));
    // Inside the box but outside the restriction ball.
    CHECK(tight.log_density_at(box, Point{0.9, 0.9}) == -kInfiniteVariance);
    CHECK(flat.log_density_at(box, Point{0.9, 0.9}) == 0.0);
    CHECK(flat.log_density_at(box, Point{1.1, 0.0}) == -kInfiniteVariance);

    // Monotone in the variance at fixed x.
    const Point x{0.5, 0.5};
    double prev = -1e300;
    for (double v : {0.1, 0.5, 1.0, 4.0, kInfiniteVariance}) {
        const double cur = GaussianPhase(2, v).log_weight(squared_norm(x));
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("consecutive phases flatten: Y >= 1 everywhere") {
    Rng rng(5);
    const CoolingSchedule s = CoolingSchedule::build(3, 1.0, ScheduleTarget::uniform_volume);
    for (std::size_t i = 0; i + 1 < s.phase_count(); ++i) {
        const GaussianPhase cur = s.phase(i);
        const GaussianPhase next = s.phase(i + 1);
        for (int t = 0; t < 200; ++t) {
            // Random point of the current support.
            const double r = cur.restriction_radius() == kInfiniteVariance
                                 ? uniform01(rng) * 3.0
                                 : uniform01(rng) * cur.restriction_radius();
            CHECK(log_density_ratio_from_norm_sq(next, cur, r * r) >= 0.0);
        }
    }
}
