#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "coolvol/reference.hpp"
#include "coolvol/walk.hpp"

using namespace coolvol;

TEST_CASE("step size formula") {
    // n/eps = e makes the log factor exactly 1.
    const int n = 2;
    const double eps = n / M_E;
    CHECK(step_size(1.0, n, eps) == doctest::Approx(1.0 / (4096.0 * std::sqrt(2.0))).epsilon(1e-12));
    CHECK(step_size(2.0, 5, 0.25) == step_size(1.0, 5, 0.25));
    CHECK(step_size(0.5, 5, 0.25) == doctest::Approx(0.5 * step_size(1.0, 5, 0.25)).epsilon(1e-12));
    CHECK(step_size(1.0, 5, 0.25, 8.0) == doctest::Approx(512.0 * step_size(1.0, 5, 0.25)).epsilon(1e-12));
    CHECK_THROWS_AS(step_size(1.0, 5, 1.0), std::invalid_argument);
}

TEST_CASE("proper step budget formula") {
    const double nu = std::exp(-1.0);
    CHECK(proper_step_budget(1.0, 10, nu, 1.0) == 100);
    CHECK(proper_step_budget(4.0, 10, nu, 1.0) == 400);
    CHECK(proper_step_budget(0.25, 10, nu, 1.0) == 100);
    CHECK_THROWS_AS(proper_step_budget(1.0, 10, 1.5, 1.0), std::invalid_argument);
}

TEST_CASE("ball walk bookkeeping and support") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase phase(2, 1.0);
    StepPolicy policy{0.2, 1, /*lazy=*/false, 100.0};
    WalkState state(Point{0.0, 0.0}, 12345);

    double max_norm_sq = 0.0;
    int stale_moves = 0;
    int escapes = 0;
    for (int i = 0; i < 20000; ++i) {
        const Point before = state.position();
        const StepOutcome out = ball_walk_step(state, phase, policy, box);
        if ((out == StepOutcome::wasted || out == StepOutcome::filter_rejected) &&
            state.position() != before)
            ++stale_moves;
        if (!box.contains(state.position())) ++escapes;
        max_norm_sq = std::max(max_norm_sq, state.position_norm_sq());
    }
    const WalkCounters& c = state.counters();
    CHECK(stale_moves == 0);
    CHECK(escapes == 0);
    CHECK(c.proposals() == 20000);
    CHECK(c.lazy_stays == 0);
    CHECK(c.filter_rejections <= c.proper_steps);
    CHECK(max_norm_sq <= phase.restriction_radius_sq() + 1e-12);

    // Every non-lazy iteration consults the oracle exactly once here: the
    // restriction ball (radius 4 sqrt(2)) never clips a 0.2-step from the box.
    WalkState counted(Point{0.0, 0.0}, 999);
    const std::uint64_t oracle0 = box.oracle_calls();
    for (int i = 0; i < 5000; ++i) (void)ball_walk_step(counted, phase, policy, box);
    CHECK(box.oracle_calls() - oracle0 == counted.counters().proposals());
    CHECK(counted.counters().proposals() == 5000);
}

TEST_CASE("uniform phase never filter-rejects") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase flat(2, kInfiniteVariance);
    StepPolicy policy{0.3, 1, false, 100.0};
    WalkState state(Point{0.2, -0.1}, 9);
    for (int i = 0; i < 5000; ++i) (void)ball_walk_step(state, flat, policy, box);
    CHECK(state.counters().filter_rejections == 0);
    CHECK(state.counters().proper_steps + state.counters().wasted_steps == 5000);
}

TEST_CASE("metropolis acceptance stays above 1/e with the restriction active") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase phase(2, 0.25);
    StepPolicy policy{step_size(0.5, 2, 0.25, 8.0), 20000, true, 100.0};
    WalkState state(Point{0.0, 0.0}, 7);
    run_until_mixed(state, phase, policy, box);
    const WalkCounters& c = state.counters();
    const double accept = 1.0 - static_cast<double>(c.filter_rejections) / c.proper_steps;
    CHECK(accept >= 1.0 / M_E);
}

TEST_CASE("zero budget leaves the state untouched") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase phase(2, 1.0);
    StepPolicy policy{0.1, 0, true, 100.0};
    WalkState state(Point{0.5, 0.5}, 1);
    run_until_mixed(state, phase, policy, box);
    CHECK(state.position() == Point{0.5, 0.5});
    CHECK(state.counters().proposals() == 0);
}

TEST_CASE("huge ball wastes essentially nothing") {
    const ConvexBody ball = ConvexBody::ball(3, 1e6);
    const GaussianPhase phase(3, 1.0);
    StepPolicy policy{step_size(1.0, 3, 0.25, 8.0), 20000, true, 100.0};
    WalkState state(Point{0.0, 0.0, 0.0}, 11);
    run_until_mixed(state, phase, policy, ball);
    CHECK(static_cast<double>(state.counters().wasted_steps) /
              state.counters().proper_steps <
          1e-3);
}

TEST_CASE("trajectory-averaged local conductance at the formula step size") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase phase(2, 1.0);
    for (double divisor : {8.0, 4096.0}) {
        StepPolicy policy{step_size(1.0, 2, 0.25, divisor), 20000, true, 100.0};
        WalkState state(Point{0.0, 0.0}, 23);
        run_until_mixed(state, phase, policy, box);
        const WalkCounters& c = state.counters();
        const double in_body = static_cast<double>(c.proper_steps) / c.proposals();
        CHECK(in_body >= 0.5);
    }
}

TEST_CASE("identical seeds give identical trajectories") {
    const ConvexBody box = ConvexBody::box(3, 1.0);
    const GaussianPhase phase(3, 0.5);
    StepPolicy policy{0.05, 5000, true, 100.0};
    WalkState a(Point{0.1, 0.2, -0.3}, 777);
    WalkState b(Point{0.1, 0.2, -0.3}, 777);
    run_until_mixed(a, phase, policy, box);
    run_until_mixed(b, phase, policy, box);
    CHECK(a.position() == b.position());
    CHECK(a.counters().proposals() == b.counters().proposals());
    CHECK(a.counters().lazy_stays == b.counters().lazy_stays);
}

TEST_CASE("restriction ball is respected when it bites") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase phase(2, 0.04);  // radius 0.8 sqrt(2), inside the box
    StepPolicy policy{0.05, 20000, true, 100.0};
    WalkState state(Point{0.0, 0.0}, 3);
    run_until_mixed(state, phase, policy, box);
    CHECK(state.position_norm_sq() <= phase.restriction_radius_sq() + 1e-12);
}

TEST_CASE("proposal cap converts a stuck walk into an error") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase phase(2, 1.0);
    // Proposals of length ~100 never land inside the box.
    StepPolicy policy{100.0, 100, false, 100.0};
    WalkState state(Point{0.0, 0.0}, 5);
    CHECK_THROWS_AS(run_until_mixed(state, phase, policy, box), walk_stuck_error);
}

TEST_CASE("initial rejection sampler") {
    const ConvexBody ball = ConvexBody::ball(4, 1.0);
    Rng rng(42);
    const double sigma0_sq = 1.0 / 16.0;

    int escapes = 0;
    for (int i = 0; i < 500; ++i) {
        const Point x = sample_initial(ball, sigma0_sq, rng);
        if (!ball.contains(x)) ++escapes;
    }
    CHECK(escapes == 0);

    // Acceptance rate against the chi-square tail: ||X||^2/sigma0^2 is
    // chi^2_4, so P(||X|| > 1) = P(chi2_4 > 16) = e^{-8} (1 + 8). Every
    // in-ball trial costs exactly one oracle call.
    const std::uint64_t oracle0 = ball.oracle_calls();
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) (void)sample_initial(ball, sigma0_sq, rng);
    const double reject = std::exp(-8.0) * 9.0;
    const std::uint64_t trials = (ball.oracle_calls() - oracle0) - draws;  // rejected trials
    const double accept = static_cast<double>(draws) / (draws + trials);
    CHECK(accept >= 0.99);
    CHECK(accept == doctest::Approx(1.0 - reject).epsilon(3e-3));

    // Tiny variance collapses to the origin.
    const Point origin_ish = sample_initial(ball, 1e-12, rng);
    CHECK(squared_norm(origin_ish) < 1e-9);
}

TEST_CASE("target mapping acceptance factor") {
    // n=2, sigma=1, ||u|| = 1: c = 3/4, ||v||^2 = 16/9, factor e^{-(16/9-1)/2}.
    const GaussianPhase phase(2, 1.0);
    CHECK(speedy_map_log_acceptance(phase, 1.0) ==
          doctest::Approx(-(16.0 / 9.0 - 1.0) / 2.0).epsilon(1e-15));
    // Origin is a fixed point with acceptance 1.
    CHECK(speedy_map_log_acceptance(phase, 0.0) == 0.0);
    // Uniform phase: the factor is always 1.
    CHECK(speedy_map_log_acceptance(GaussianPhase(2, kInfiniteVariance), 3.0) == 0.0);
}

TEST_CASE("target mapping consumes the stream until a point fits") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase flat(2, kInfiniteVariance);
    Rng rng(1);

    const Point origin{0.0, 0.0};
    int calls = 0;
    const Point mapped = map_speedy_to_target(
        [&]() -> const Point& {
            ++calls;
            return origin;
        },
        flat, box, rng);
    CHECK(mapped == origin);
    CHECK(calls == 1);

    // First stream point maps outside the box (uniform phase accepts any
    // interior point, so rejection can only come from membership).
    const Point edge{0.9, 0.9};   // 0.9/0.75 = 1.2 leaves the box
    const Point inner{0.3, 0.0};  // 0.4 stays inside
    calls = 0;
    const Point second = map_speedy_to_target(
        [&]() -> const Point& {
            ++calls;
            return calls == 1 ? edge : inner;
        },
        flat, box, rng);
    CHECK(calls == 2);
    CHECK(second[0] == doctest::Approx(0.4));

    // A stream that never maps inside exhausts the attempt cap.
    CHECK_THROWS_AS(map_speedy_to_target([&]() -> const Point& { return edge; }, flat, box, rng),
                    walk_stuck_error);
}

TEST_CASE("local conductance estimates") {
    Rng rng(17);
    const ConvexBody box = ConvexBody::box(3, 1.0);
    CHECK(estimate_local_conductance(Point{0.0, 0.0, 0.0}, 0.05, box, 2000, rng) == 1.0);

    // On a facet of a halfspace the delta-ball is cut in half.
    const ConvexBody halfspace = ConvexBody::polytope(3, {{1, 0, 0}}, {1.0},
                                                      std::numeric_limits<double>::infinity());
    const double half = estimate_local_conductance(Point{1.0, 0.0, 0.0}, 0.05, halfspace, 40000, rng);
    CHECK(half == doctest::Approx(0.5).epsilon(0.03));

    CHECK_THROWS_AS(estimate_local_conductance(Point{0.0, 0.0, 0.0}, 0.05, box, 0, rng),
                    std::invalid_argument);
}

TEST_CASE("mixed marginal matches the truncated gaussian (smoke)") {
    const ConvexBody box = ConvexBody::box(2, 1.0);
    const GaussianPhase phase(2, 1.0);
    StepPolicy policy{step_size(1.0, 2, 0.25, 8.0), 2000, true, 100.0};
    WalkState state(Point{0.0, 0.0}, 2718);
    run_until_mixed(state, phase, policy, box);

    const int count = 20000;
    std::vector<double> xs;
    xs.reserve(count);
    StepPolicy thin = policy;
    thin.proper_step_budget = 150;
    for (int i = 0; i < count; ++i) {
        run_until_mixed(state, phase, thin, box);
        xs.push_back(state.position()[0]);
    }
    std::sort(xs.begin(), xs.end());

    const double total = reference::integrate(
        [](double t) { return std::exp(-0.5 * t * t); }, -1.0, 1.0, 1e-12);
    double ks = 0.0;
    for (int i = 0; i < count; ++i) {
        const double cdf = reference::integrate(
                               [](double t) { return std::exp(-0.5 * t * t); }, -1.0, xs[i], 1e-10) /
                           total;
        const double emp_hi = static_cast<double>(i + 1) / count;
        const double emp_lo = static_cast<double>(i) / count;
        ks = std::max({ks, std::abs(cdf - emp_hi), std::abs(cdf - emp_lo)});
    }
    CHECK(ks < 0.05);
}
