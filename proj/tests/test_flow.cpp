#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "saddlelab/analysis.hpp"
#include "saddlelab/catalog.hpp"
#include "saddlelab/errors.hpp"
#include "saddlelab/flow.hpp"
#include "saddlelab/trajectory.hpp"
#include "support.hpp"

using namespace saddlelab;
using testsupport::Gen;

namespace {

Point P(double a, double b) {
    Point x(2);
    x << a, b;
    return x;
}

const ObjectivePtr saddle2 = make_diagonal_quadratic({1.0, -1.0}).function;
const ObjectivePtr bowl2 = make_diagonal_quadratic({1.0, 1.0}).function;
const ObjectivePtr trig2 = make_trig_multiwell(2).function;
const ObjectivePtr cubic2 = make_cubic_perturbed({1.0, -1.0}, 0.5).function;

const auto GD = FlowKind::gradient_descent();
const auto NGD = FlowKind::normalized_gradient_descent();

}  // namespace

TEST_CASE("gd_field examples") {
    const Vector v = gd_field(*saddle2, P(1, 1));
    CHECK(v(0) == -1.0);
    CHECK(v(1) == 1.0);
    CHECK(gd_field(*saddle2, P(0, 0)).norm() == 0.0);
    const Vector w = gd_field(*trig2, P(std::numbers::pi / 2, 0));
    CHECK(w(0) == doctest::Approx(-1.0));
    CHECK(std::abs(w(1)) == 0.0);
}

TEST_CASE("ngd_field examples") {
    const Vector v = ngd_field(*saddle2, P(2, 0), 1e-10);
    CHECK(v(0) == -1.0);
    CHECK(v(1) == 0.0);
    const Vector w = ngd_field(*bowl2, P(3, 4), 1e-10);
    CHECK(w(0) == doctest::Approx(-0.6).epsilon(1e-15));
    CHECK(w(1) == doctest::Approx(-0.8).epsilon(1e-15));
    CHECK_THROWS_AS(ngd_field(*saddle2, P(0, 0), 1e-10), CriticalPointReached);
}

TEST_CASE("flow kinds validate their step sizes") {
    CHECK_THROWS_AS(FlowKind::discrete_gd({}), std::invalid_argument);
    CHECK_THROWS_AS(FlowKind::discrete_ngd({0.1, -0.1}), std::invalid_argument);
    CHECK(FlowKind::discrete_ngd({0.1}).is_normalized());
    CHECK_FALSE(GD.is_discrete());
}

TEST_CASE("integrator config validation") {
    IntegratorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.abs_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.event_time_tol = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("GD on the quadratic saddle follows the matrix exponential") {
    IntegratorConfig cfg;
    cfg.t_max = 3.0;
    const Point x0 = P(1, 0.001);
    const auto traj = integrate(saddle2, GD, x0, cfg);
    CHECK(traj.termination().cause == TerminationCause::HorizonReached);
    CHECK(traj.t_end() == doctest::Approx(3.0));
    double err = 0.0;
    for (int k = 0; k <= 3000; ++k) {
        const double t = 3.0 * k / 3000.0;
        const Point x = traj.state_at(t);
        err = std::max(err, std::abs(x(0) - std::exp(-t)));
        err = std::max(err, std::abs(x(1) - 0.001 * std::exp(t)));
    }
    CHECK(err <= 1e-6);
}

TEST_CASE("NGD reaches the critical point at unit speed") {
    IntegratorConfig cfg;
    {
        const auto traj = integrate(bowl2, NGD, P(3, 4), cfg);
        CHECK(traj.termination().cause == TerminationCause::CriticalPointReached);
        CHECK(std::abs(traj.termination().time - 5.0) <= 1e-4);
        const Point mid = traj.state_at(2.5);
        CHECK(std::abs(mid(0) - 1.5) <= 1e-8);
        CHECK(std::abs(mid(1) - 2.0) <= 1e-8);
    }
    {
        const auto traj = integrate(saddle2, NGD, P(1, 0), cfg);
        CHECK(traj.termination().cause == TerminationCause::CriticalPointReached);
        CHECK(std::abs(traj.termination().time - 1.0) <= 1e-4);
        CHECK(std::abs(traj.state_at(0.25)(0) - 0.75) <= 1e-8);
    }
    CHECK_THROWS_AS(integrate(bowl2, NGD, P(0, 0), cfg), CriticalPointReached);
}

TEST_CASE("GD from a critical point is a single node") {
    const auto traj = integrate(bowl2, GD, P(0, 0), IntegratorConfig{});
    CHECK(traj.times().size() == 1);
    CHECK(traj.termination().cause == TerminationCause::CriticalPointReached);
}

TEST_CASE("divergence and stop rules") {
    IntegratorConfig cfg;
    cfg.divergence_radius = 10.0;
    const auto traj = integrate(saddle2, NGD, P(0, 1), cfg);
    CHECK(traj.termination().cause == TerminationCause::Diverged);
    CHECK(traj.termination().state.norm() == doctest::Approx(10.0).epsilon(1e-9));

    StopRules exit;
    exit.exit_region = Ball{P(0, 0), 2.0};
    const auto t2 = integrate(saddle2, NGD, P(0, 1), IntegratorConfig{}, exit);
    CHECK(t2.termination().cause == TerminationCause::ExitedRegion);
    CHECK(std::abs(t2.termination().time - 1.0) <= 1e-9);

    StopRules target;
    target.target = Ball{P(0, 0), 0.5};
    const auto t3 = integrate(bowl2, NGD, P(3, 4), IntegratorConfig{}, target);
    CHECK(t3.termination().cause == TerminationCause::EnteredTarget);
    CHECK(std::abs(t3.termination().time - 4.5) <= 1e-9);

    StopRules arc;
    arc.max_arc_length = 0.5;
    const auto t4 = integrate(bowl2, GD, P(1, 0), IntegratorConfig{}, arc);
    CHECK(t4.termination().cause == TerminationCause::ArcLengthReached);
    CHECK(std::abs(t4.termination().time - std::log(2.0)) <= 1e-8);
}

TEST_CASE("dense output is bounded to the covered interval") {
    IntegratorConfig cfg;
    cfg.t_max = 1.0;
    const auto traj = integrate(saddle2, GD, P(1, 0.1), cfg);
    CHECK_THROWS_AS(traj.state_at(1.5), OutOfRange);
    CHECK_THROWS_AS(traj.state_at(-0.1), OutOfRange);
    CHECK_THROWS_AS(traj.arc_length_at(2.0), OutOfRange);
}

// ---------------------------------------------------------------------------

TEST_CASE("discrete step examples") {
    const Point a = step_discrete(*bowl2, FlowVariant::DiscreteGD, P(1, 0), 0.5);
    CHECK(a(0) == 0.5);
    CHECK(a(1) == 0.0);
    const Point b = step_discrete(*bowl2, FlowVariant::DiscreteNGD, P(3, 4), 1.0);
    CHECK(b(0) == doctest::Approx(2.4).epsilon(1e-15));
    CHECK(b(1) == doctest::Approx(3.2).epsilon(1e-15));
}

TEST_CASE("discrete NGD tracks the continuous flow") {
    const auto iterates = run_discrete(*saddle2, FlowKind::discrete_ngd(std::vector<double>(2000, 1e-3)), P(1, 0.5));
    REQUIRE(iterates.size() == 2001);
    const auto traj = integrate(saddle2, NGD, P(1, 0.5), IntegratorConfig{});
    CHECK((iterates.back() - traj.state_at(2.0)).norm() <= 5e-3);
}

TEST_CASE("discrete NGD stops at a critical point") {
    const auto it = run_discrete(*bowl2, FlowKind::discrete_ngd({1.0, 1.0, 1.0}), P(1, 0));
    CHECK(it.size() == 2);
    CHECK(it.back().norm() == 0.0);
}

// ---------------------------------------------------------------------------

TEST_CASE("arc length examples") {
    IntegratorConfig cfg;
    cfg.t_max = 4.0;
    const auto gd = integrate(bowl2, GD, P(1, 0), cfg);
    for (double t : {0.0, 0.3, 1.0, 2.5, 4.0}) CHECK(std::abs(arc_length_at(gd, t) - (1 - std::exp(-t))) <= 1e-6);

    const auto ngd = integrate(cubic2, NGD, P(0.7, 0.2), cfg);
    for (int k = 0; k <= 400; ++k) {
        const double t = ngd.t_end() * k / 400.0;
        CHECK(std::abs(arc_length_at(ngd, t) - t) <= 1e-6);
    }
}

TEST_CASE("GD arc length matches a fixed-step summation") {
    IntegratorConfig cfg;
    cfg.t_max = 6.0;
    const auto traj = integrate(saddle2, GD, P(1, 0.001), cfg);

    double L = 0.0;
    testsupport::rk4([](const Point& x) { return gd_field(*saddle2, x); }, P(1, 0.001), 1e-6, 6'000'000,
                     [&](std::size_t, const Point& a, const Point& b) { L += (b - a).norm(); });
    CHECK(std::abs(arc_length_at(traj, 6.0) - L) <= 1e-5);
    CHECK(std::abs(arc_length_at(traj, 6.0) - 1.349843628277469) <= 1e-8);
}

TEST_CASE("reparametrization by arc length") {
    IntegratorConfig cfg;
    cfg.t_max = 10.0;
    {
        const auto gd = integrate(bowl2, GD, P(1, 0), cfg);
        std::vector<double> s{0.0, 0.1, 0.5, 0.9};
        const auto xs = reparametrize_by_arc_length(gd, s);
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(std::abs(xs[i](0) - (1 - s[i])) <= 1e-6);
            CHECK(std::abs(xs[i](1)) <= 1e-12);
        }
        const std::vector<double> beyond{2.0};
        CHECK_THROWS_AS(reparametrize_by_arc_length(gd, beyond), OutOfRange);
    }
    {
        const auto ngd = integrate(saddle2, NGD, P(1, 0.3), cfg);
        std::vector<double> s;
        for (int k = 0; k <= 100; ++k) s.push_back(ngd.t_end() * k / 100.0);
        const auto xs = reparametrize_by_arc_length(ngd, s);
        for (std::size_t i = 0; i < s.size(); ++i) CHECK((xs[i] - ngd.state_at(s[i])).norm() <= 1e-8);
    }
    {
        const auto cmp = compare_orbits(saddle2, P(1, 0.3), 2.0, IntegratorConfig{});
        CHECK(cmp.sup_error <= 1e-5);
        CHECK(cmp.common_length == doctest::Approx(2.0));
    }
}

TEST_CASE("property: orbit equivalence on seeded initial conditions") {
    Gen gen(101);
    for (const auto& f : {saddle2, cubic2}) {
        for (int k = 0; k < 20; ++k) {
            const Point x0 = gen.point(2, -1.0, 1.0);
            const auto cmp = compare_orbits(f, x0, 2.0, IntegratorConfig{}, 501);
            CHECK(cmp.sup_error <= 1e-5);
            CHECK(cmp.ngd_arc_deviation <= 1e-6);
        }
    }
}

TEST_CASE("property: node invariants, unit speed and descent") {
    Gen gen(17);
    IntegratorConfig cfg;
    cfg.t_max = 8.0;
    for (const auto& f : {saddle2, cubic2, trig2}) {
        for (int k = 0; k < 10; ++k) {
            const Point x0 = gen.point(2, -2.0, 2.0);
            for (const auto& kind : {GD, NGD}) {
                const auto traj = integrate(f, kind, x0, cfg);
                const auto T = traj.times();
                const auto F = traj.f_values();
                const auto L = traj.arc_lengths();
                for (std::size_t i = 1; i < T.size(); ++i) {
                    CHECK(T[i] > T[i - 1]);
                    CHECK(L[i] >= L[i - 1]);
                    CHECK(F[i] <= F[i - 1] + 1e-9);
                }
                if (kind.is_normalized()) {
                    double speed_err = 0.0;
                    for (std::size_t i = 0; i + 1 < T.size(); ++i)
                        speed_err = std::max(speed_err, std::abs(ngd_field(*f, traj.states()[i], cfg.grad_stop).norm() - 1.0));
                    CHECK(speed_err <= 1e-8);
                    for (std::size_t i = 0; i < T.size(); ++i) CHECK(std::abs(L[i] - T[i]) <= 1e-6);
                }
            }
        }
    }
}

TEST_CASE("dissipation identity") {
    IntegratorConfig cfg;
    cfg.t_max = 0.9;
    const auto traj = integrate(bowl2, NGD, P(1, 0), cfg);
    // f(x(t)) = (1-t)^2 / 2, so the slope at t = 0.5 is -0.5.
    const double d = 1e-4;
    const double slope = (bowl2->value(traj.state_at(0.5 + d)) - bowl2->value(traj.state_at(0.5 - d))) / (2 * d);
    CHECK(std::abs(slope + 0.5) <= 1e-8);
    CHECK(std::abs(bowl2->gradient(traj.state_at(0.5)).norm() - 0.5) <= 1e-9);

    const auto t2 = integrate(saddle2, NGD, P(1, 0.3), IntegratorConfig{});
    const auto trace = dissipation_trace(t2, *saddle2);
    CHECK(trace.samples.size() > 10);
    CHECK(trace.max_discrepancy <= 1e-5);
    for (const auto& s : trace.samples) CHECK(s.slope <= 0.0);
}

TEST_CASE("property: dissipation on seeded NGD trajectories") {
    Gen gen(4);
    IntegratorConfig cfg;
    cfg.t_max = 5.0;
    for (int k = 0; k < 10; ++k) {
        const auto& f = k % 2 ? trig2 : cubic2;
        const auto traj = integrate(f, NGD, gen.point(2, -1.5, 1.5), cfg);
        CHECK(dissipation_trace(traj, *f).max_discrepancy <= 1e-5);
    }
}

TEST_CASE("slice restarts arc length") {
    IntegratorConfig cfg;
    cfg.t_max = 3.0;
    const auto traj = integrate(saddle2, GD, P(1, 0.2), cfg);
    const auto part = traj.slice(1.0, 2.0);
    CHECK(part.t_begin() == 1.0);
    CHECK(part.t_end() == 2.0);
    CHECK(part.arc_length_at(1.0) == 0.0);
    CHECK(std::abs(part.arc_length_at(2.0) - (traj.arc_length_at(2.0) - traj.arc_length_at(1.0))) <= 1e-12);
    CHECK((part.state_at(1.5) - traj.state_at(1.5)).norm() <= 1e-15);
}

TEST_CASE("trajectory CSV") {
    IntegratorConfig cfg;
    cfg.t_max = 0.5;
    const auto traj = integrate(saddle2, NGD, P(1, 0.2), cfg);
    std::ostringstream os;
    traj.write_csv(os);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x_0,x_1,f,arclen");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == traj.times().size());
}

TEST_CASE("NGD terminates at a minimum whose grad_stop band is below the error tolerance") {
    // Near (0, 4) the relative tolerance allows ~4e-10 of state error, wider
    // than the 1e-10 gradient band around the minimum.
    IntegratorConfig cfg;
    cfg.t_max = 8.0;
    const auto traj = integrate(cubic2, NGD, P(0.0769867, 0.119883), cfg);
    CHECK(traj.termination().cause == TerminationCause::CriticalPointReached);
    CHECK((traj.termination().state - P(0, 4)).norm() <= 1e-8);
}
