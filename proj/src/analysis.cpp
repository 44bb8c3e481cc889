#include "saddlelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "saddlelab/errors.hpp"
#include "saddlelab/parallel.hpp"

namespace saddlelab {
namespace {

class DirectionSampler {
public:
    DirectionSampler(Eigen::Index d, std::uint64_t seed) : d_(d), rng_(seed) {}

    Vector direction() {
        Vector v(d_);
        double n = 0.0;
        do {
            for (Eigen::Index i = 0; i < d_; ++i) v(i) = normal_(rng_);
            n = v.norm();
        } while (n == 0.0);
        return v / n;
    }

    double uniform() { return uniform_(rng_); }

private:
    Eigen::Index d_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::string describe(const Point& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x(i);
    os << ')';
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Point> sample_sphere(const Point& center, double r, std::size_t n, std::uint64_t seed) {
    DirectionSampler s(center.size(), seed);
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(center + r * s.direction());
    return out;
}

std::vector<Point> sample_ball(const Point& center, double r, std::size_t n, std::uint64_t seed) {
    return sample_annulus(center, 0.0, r, n, seed);
}

std::vector<Point> sample_annulus(const Point& center, double inner, double outer, std::size_t n,
                                  std::uint64_t seed) {
    if (!(inner >= 0.0 && outer > inner)) throw std::invalid_argument("invalid annulus radii");
    const auto d = static_cast<double>(center.size());
    DirectionSampler s(center.size(), seed);
    const double lo = std::pow(inner, d), hi = std::pow(outer, d);
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector u = s.direction();
        const double rad = std::pow(lo + s.uniform() * (hi - lo), 1.0 / d);
        out.push_back(center + rad * u);
    }
    return out;
}

// ---------------------------------------------------------------------------

double escape_time_bound(double kappa, double r, double C) {
    if (!(C > 4.0)) throw InvalidC(C);
    if (!(kappa >= 1.0)) throw std::invalid_argument("kappa must be >= 1");
    if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
    return C * std::sqrt(kappa) * r;
}

RadiusEstimate max_permissible_radius(double C, double C_hat, double lambda_max, double kappa) {
    if (!(C > 4.0)) throw InvalidC(C);
    if (!(C_hat > 0.0)) throw std::invalid_argument("C_hat must be positive");
    if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_max must be positive");
    if (!(kappa >= 1.0)) throw std::invalid_argument("kappa must be >= 1");
    RadiusEstimate est{C, C_hat, lambda_max, kappa, 0.0};
    // C(3k+2)/(6Ck+16) - 1/2 rewritten as 2(C-4)/(6Ck+16) to avoid cancellation near C = 4.
    est.r_bar = 6.0 / std::sqrt(kappa) / C_hat * lambda_max * 2.0 * (C - 4.0) / (6.0 * C * kappa + 16.0);
    return est;
}

double saddle_capture_radius(const CriticalPointInfo& saddle, double grad_stop) {
    return 10.0 * std::sqrt(grad_stop / saddle.abs_min);
}

EscapeTimeReport run_escape_sweep(const ObjectivePtr& f, const CriticalPointInfo& saddle, double r,
                                  std::size_t n_ic, std::uint64_t seed, double C,
                                  const IntegratorConfig& cfg) {
    if (saddle.classification == CriticalKind::Degenerate || !saddle.kappa)
        throw std::invalid_argument("escape sweep needs a non-degenerate critical point");

    EscapeTimeReport rep;
    rep.saddle = saddle;
    rep.r = r;
    rep.C = C;
    rep.seed = seed;
    rep.bound = escape_time_bound(*saddle.kappa, r, C);

    if (const auto c_hat = f->third_derivative_bound(); c_hat && *c_hat > 0.0) {
        const double r_bar = max_permissible_radius(C, *c_hat, saddle.abs_max, *saddle.kappa).r_bar;
        if (r > r_bar) {
            std::ostringstream os;
            os.precision(17);
            os << "radius " << r << " exceeds the permissible radius " << r_bar;
            throw std::invalid_argument(os.str());
        }
    }

    const Point& c = saddle.location;
    const auto ics = sample_sphere(c, r, n_ic, seed);
    const double capture = saddle_capture_radius(saddle, cfg.grad_stop);
    const auto ngd = FlowKind::normalized_gradient_descent();
    StopRules stop;
    stop.exit_region = Ball{c, 2.0 * r};

    rep.per_ic.resize(n_ic);
    parallel_for(n_ic, [&](std::size_t i) {
        const auto traj = integrate(f, ngd, ics[i], cfg, stop);
        const auto occ = ball_occupancy(traj, c, r);
        auto& rec = rep.per_ic[i];
        rec.initial = ics[i];
        rec.occupancy = occ.total_time;
        rec.termination = traj.termination().cause;
        rec.terminal_state = traj.termination().state;
        rec.converged_to_saddle = rec.termination == TerminationCause::CriticalPointReached &&
                                  (rec.terminal_state - c).norm() <= capture;
    });

    for (std::size_t i = 0; i < n_ic; ++i) {
        const auto& rec = rep.per_ic[i];
        if (rec.converged_to_saddle) continue;
        if (!rep.argmax || rec.occupancy > rep.max_occupancy) {
            rep.max_occupancy = rec.occupancy;
            rep.argmax = i;
        }
    }
    rep.slack = rep.bound - rep.max_occupancy;
    rep.pass = rep.max_occupancy <= rep.bound;
    return rep;
}

EscapeTimeReport escape_sweep(const ObjectivePtr& f, const CriticalPointInfo& saddle, double r,
                              std::size_t n_ic, std::uint64_t seed, double C,
                              const IntegratorConfig& cfg) {
    auto rep = run_escape_sweep(f, saddle, r, n_ic, seed, C, cfg);
    if (!rep.pass) {
        const auto& worst = rep.per_ic[*rep.argmax];
        throw BoundViolated(worst.initial, worst.occupancy, rep.bound);
    }
    return rep;
}

// ---------------------------------------------------------------------------

double gd_stall_time(const ObjectivePtr& f, const Point& saddle, double r, double eps,
                     const Point& ic, const IntegratorConfig& cfg) {
    if (!(eps > 0.0 && eps < r)) throw std::invalid_argument("need 0 < eps < r");
    const double d0 = (ic - saddle).norm();
    if (std::abs(d0 - r) > 1e-9 * r) throw std::invalid_argument("initial condition must lie on the sphere of radius r");

    StopRules stop;
    stop.exit_region = Ball{saddle, 2.0 * r};
    stop.target = Ball{saddle, eps};
    const auto traj = integrate(f, FlowKind::gradient_descent(), ic, cfg, stop);
    if (traj.termination().cause != TerminationCause::EnteredTarget)
        throw NeverEntered("trajectory ended (" + std::string(to_string(traj.termination().cause)) +
                           ") without entering the eps-ball");

    const auto occ = ball_occupancy(traj, saddle, r);
    if (occ.intervals.size() != 1 || occ.intervals.back().t_out != traj.t_end())
        throw NeverEntered("trajectory left the r-ball before entering the eps-ball");
    return occ.total_time;
}

StallLowerBounds stall_lower_bounds(double r, double eps) {
    return {-r * std::log(eps), std::log(r / eps)};
}

// ---------------------------------------------------------------------------

DissipationTrace dissipation_trace(const Trajectory& traj, const ObjectiveFunction& f) {
    DissipationTrace out;
    const auto T = traj.times();
    const double t0 = traj.t_begin(), t1 = traj.t_end();
    for (std::size_t i = 1; i + 1 < T.size(); ++i) {
        const double t = T[i];
        const double g = f.gradient(traj.state_at(t)).norm();
        // Step balances dense-output noise against the third derivative of
        // f(x(t)), which grows like 1/||grad f|| where the orbit turns.
        const double delta = 1e-4 * std::min(1.0, std::cbrt(g));
        if (t - delta < t0 || t + delta > t1) continue;
        const double slope =
            (f.value(traj.state_at(t + delta)) - f.value(traj.state_at(t - delta))) / (2.0 * delta);
        out.samples.push_back({t, slope, -g});
        out.max_discrepancy = std::max(out.max_discrepancy, std::abs(slope + g));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(TaylorInequality which) {
    switch (which) {
        case TaylorInequality::ValueGrowth: return "value_growth";
        case TaylorInequality::GradientLower: return "gradient_lower";
        case TaylorInequality::GradientMetric: return "gradient_metric";
    }
    return "unknown";
}

TaylorCheckReport taylor_estimate_check(const ObjectiveFunction& f, const Point& x_star, double C1,
                                        double C2, double r_hat, std::size_t n_samples,
                                        std::uint64_t seed) {
    if (!(C1 > 0.5)) throw std::invalid_argument("C1 must exceed 1/2");
    if (!(C2 > 0.0 && C2 < 1.0)) throw std::invalid_argument("C2 must lie in (0, 1)");
    if (!(r_hat > 0.0)) throw std::invalid_argument("r_hat must be positive");
    const auto info = classify_critical_point(f, x_star, 1e-8);
    if (info.classification == CriticalKind::Degenerate)
        throw std::invalid_argument("critical point is degenerate");

    TaylorCheckReport rep;
    rep.C1 = C1;
    rep.C2 = C2;
    rep.implied_C = 8.0 * C1 / C2;
    rep.r_hat = r_hat;
    rep.n_samples = n_samples;
    rep.seed = seed;

    const Matrix H = f.hessian(x_star);
    const ModifiedMetric metric(H);
    const double sqrt_min = std::sqrt(metric.abs_min());
    const double f0 = f.value(x_star);

    auto record = [&](const Point& x, TaylorInequality which, double lhs, double rhs) {
        ++rep.violation_count;
        if (rep.violations.size() < TaylorCheckReport::kMaxStoredViolations)
            rep.violations.push_back({x, which, lhs, rhs});
    };

    for (const auto& x : sample_ball(x_star, r_hat, n_samples, seed)) {
        const Vector dx = x - x_star;
        const double dt = metric.distance(dx);
        const double growth = std::abs(f.value(x) - f0);
        if (growth > C1 * dt * dt) record(x, TaylorInequality::ValueGrowth, growth, C1 * dt * dt);

        const double gn = f.gradient(x).norm();
        const double lin = C2 * (H * dx).norm();
        if (gn < lin) record(x, TaylorInequality::GradientLower, gn, lin);
        const double met = C2 * sqrt_min * dt;
        if (gn < met) record(x, TaylorInequality::GradientMetric, gn, met);
    }
    return rep;
}

std::vector<std::pair<double, double>> modified_distance_trace(const Trajectory& traj,
                                                               const Point& x_star,
                                                               const Matrix& H) {
    const ModifiedMetric metric(H);
    std::vector<std::pair<double, double>> out;
    const auto T = traj.times();
    const auto X = traj.states();
    out.reserve(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) out.emplace_back(T[i], metric.distance(X[i] - x_star));
    return out;
}

// ---------------------------------------------------------------------------

StableManifoldRecord ngd_reaches_saddle(const ObjectivePtr& f, const CriticalPointInfo& saddle,
                                        const Point& x0, double exit_radius,
                                        const IntegratorConfig& cfg) {
    StopRules stop;
    stop.exit_region = Ball{saddle.location, exit_radius};
    StableManifoldRecord rec;
    rec.initial = x0;
    const auto traj = integrate(f, FlowKind::normalized_gradient_descent(), x0, cfg, stop);
    rec.termination = traj.termination().cause;
    rec.terminal_state = traj.termination().state;
    rec.reached_saddle = rec.termination == TerminationCause::CriticalPointReached &&
                         (rec.terminal_state - saddle.location).norm() <=
                             saddle_capture_radius(saddle, cfg.grad_stop);
    return rec;
}

StableManifoldReport run_stable_manifold_sample(const ObjectivePtr& f, const Point& saddle, double r,
                                                std::size_t n_ic, std::uint64_t seed,
                                                const IntegratorConfig& cfg) {
    const auto info = classify_critical_point(*f, saddle, 1e-8);
    if (!(info.eigenvalues.array() < 0.0).any() || info.abs_min == 0.0)
        throw std::invalid_argument("stable-manifold sampling needs a strict saddle");

    StableManifoldReport rep;
    rep.saddle = saddle;
    rep.r = r;
    rep.seed = seed;
    rep.capture_radius = saddle_capture_radius(info, cfg.grad_stop);

    const auto ics = sample_annulus(saddle, r, 2.0 * r, n_ic, seed);
    rep.per_ic.resize(n_ic);
    parallel_for(n_ic, [&](std::size_t i) {
        rep.per_ic[i] = ngd_reaches_saddle(f, info, ics[i], 4.0 * r, cfg);
    });
    for (const auto& rec : rep.per_ic) rep.reached += rec.reached_saddle;
    rep.fraction = n_ic ? static_cast<double>(rep.reached) / static_cast<double>(n_ic) : 0.0;
    return rep;
}

double stable_manifold_sample(const ObjectivePtr& f, const Point& saddle, double r,
                              std::size_t n_ic, std::uint64_t seed, const IntegratorConfig& cfg) {
    return run_stable_manifold_sample(f, saddle, r, n_ic, seed, cfg).fraction;
}

// ---------------------------------------------------------------------------

OrbitComparison compare_orbits(const ObjectivePtr& f, const Point& x0, double s_max,
                               const IntegratorConfig& cfg, std::size_t n_grid) {
    if (!(s_max > 0.0)) throw std::invalid_argument("s_max must be positive");
    if (n_grid < 2) throw std::invalid_argument("need at least two grid points");

    IntegratorConfig ngd_cfg = cfg;
    ngd_cfg.t_max = s_max;
    const auto ngd = integrate(f, FlowKind::normalized_gradient_descent(), x0, ngd_cfg);

    StopRules stop;
    stop.max_arc_length = s_max;
    const auto gd = integrate(f, FlowKind::gradient_descent(), x0, cfg, stop);

    OrbitComparison cmp;
    cmp.initial = x0;
    cmp.s_max = s_max;
    cmp.gd_termination = gd.termination().cause;
    cmp.ngd_termination = ngd.termination().cause;
    for (std::size_t i = 0; i < ngd.times().size(); ++i)
        cmp.ngd_arc_deviation =
            std::max(cmp.ngd_arc_deviation, std::abs(ngd.arc_lengths()[i] - ngd.times()[i]));

    cmp.common_length = std::min({gd.total_arc_length(), ngd.total_arc_length(), ngd.t_end()});
    cmp.s_grid.resize(n_grid);
    cmp.errors.resize(n_grid);
    for (std::size_t j = 0; j < n_grid; ++j) {
        const double s = cmp.common_length * static_cast<double>(j) / static_cast<double>(n_grid - 1);
        const Point a = gd.state_at(time_at_arc_length(gd, s));
        const Point b = ngd.state_at(std::min(s, ngd.t_end()));
        cmp.s_grid[j] = s;
        cmp.errors[j] = (a - b).norm();
        cmp.sup_error = std::max(cmp.sup_error, cmp.errors[j]);
    }
    return cmp;
}

// ---------------------------------------------------------------------------

double global_time_bound(double M, double nu, double C, double kappa, double R, double r, int d) {
    if (!(C > 4.0)) throw InvalidC(C);
    return 2.0 * M / nu + C * std::sqrt(kappa) * std::pow(R + r, d) / std::pow(r, d - 1);
}

GlobalBoundReport global_convergence_experiment(const CatalogEntry& entry, double R,
                                                std::optional<double> nu, double r, double C,
                                                std::size_t n_ic, std::uint64_t seed,
                                                const IntegratorConfig& cfg) {
    if (!(C > 4.0)) throw InvalidC(C);
    if (!(R > 0.0 && r > 0.0)) throw std::invalid_argument("R and r must be positive");
    const ObjectivePtr& f = entry.function;
    const int d = f->dimension();

    GlobalBoundReport rep;
    rep.R = R;
    rep.r = r;
    rep.d = d;
    rep.C = C;
    rep.seed = seed;

    const auto c_hat = f->third_derivative_bound();
    if (!c_hat) throw AssumptionViolated(2, "no uniform third-derivative bound is known");

    // Every critical point whose r-ball meets B_R.
    const auto crit = entry.critical_points_within(R + r);
    if (crit.empty()) throw AssumptionViolated(3, "no critical points near B_R(0)");
    rep.critical_points = crit.size();
    rep.lambda_min = std::numeric_limits<double>::infinity();
    for (const auto& c : crit) {
        const auto info = classify_spectrum(c.location, f->hessian(c.location));
        if (info.classification == CriticalKind::Degenerate)
            throw AssumptionViolated(3, "degenerate critical point at " + describe(c.location));
        rep.lambda_min = std::min(rep.lambda_min, info.abs_min);
        rep.lambda_max = std::max(rep.lambda_max, info.abs_max);
    }
    rep.kappa = rep.lambda_max / rep.lambda_min;
    if (*c_hat > 0.0 && r > rep.lambda_min / *c_hat)
        throw AssumptionViolated(4, "r exceeds |lambda|min / C_hat");

    rep.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < crit.size(); ++i)
        for (std::size_t j = i + 1; j < crit.size(); ++j)
            rep.min_separation =
                std::min(rep.min_separation, (crit[i].location - crit[j].location).norm());
    if (rep.min_separation < 2.0 * r)
        throw AssumptionViolated(4, "critical points closer than 2r");

    // Grid (pitch r/10) over B_R(0), or seeded random points when the grid is
    // too large.
    const double pitch = r / 10.0;
    const auto per_axis = static_cast<double>(2 * static_cast<long>(std::ceil(R / pitch)) + 1);
    double grad_min = std::numeric_limits<double>::infinity();
    Point grad_argmin;
    double f_max = 0.0;
    auto visit = [&](const Point& x) {
        if (x.norm() > R) return;
        ++rep.grid_points;
        f_max = std::max(f_max, std::abs(f->value(x)));
        for (const auto& c : crit)
            if ((x - c.location).norm() < r) return;
        const double g = f->gradient(x).norm();
        if (g < grad_min) {
            grad_min = g;
            grad_argmin = x;
        }
    };
    if (std::pow(per_axis, d) <= 4e6) {
        const auto m = static_cast<long>(per_axis);
        const long half = (m - 1) / 2;
        std::vector<long> idx(static_cast<std::size_t>(d), -half);
        Point x(d);
        while (true) {
            for (int i = 0; i < d; ++i) x(i) = static_cast<double>(idx[static_cast<std::size_t>(i)]) * pitch;
            visit(x);
            int i = 0;
            for (; i < d; ++i) {
                auto& k = idx[static_cast<std::size_t>(i)];
                if (k < half) {
                    ++k;
                    break;
                }
                k = -half;
            }
            if (i == d) break;
        }
    } else {
        for (const auto& x : sample_ball(Point::Zero(d), R, 1'000'000, seed ^ 0x9e3779b97f4a7c15ULL))
            visit(x);
    }
    rep.M = 1.01 * f_max;
    if (!std::isfinite(grad_min)) throw AssumptionViolated(4, "no sample points outside the r-balls");
    if (nu) {
        if (!(grad_min > *nu))
            throw AssumptionViolated(4, "||grad f|| <= nu at " + describe(grad_argmin));
        rep.nu = *nu;
    } else {
        rep.nu = 0.99 * grad_min;
        rep.nu_estimated = true;
    }

    rep.bound = global_time_bound(rep.M, rep.nu, C, rep.kappa, R, r, d);
    rep.trajectory_length_form = rep.M / rep.nu + (rep.bound - 2.0 * rep.M / rep.nu);

    // Initial conditions: uniform in B_R(0), restricted to the entry's
    // forward-invariant region when it has one.
    std::vector<Point> ics;
    {
        DirectionSampler s(d, seed);
        const std::size_t max_draws = 1000 * std::max<std::size_t>(n_ic, 1);
        for (std::size_t draws = 0; ics.size() < n_ic && draws < max_draws; ++draws) {
            const Vector u = s.direction();
            const Point x = R * std::pow(s.uniform(), 1.0 / d) * u;
            if (!entry.invariant_region || entry.invariant_region(x)) ics.push_back(x);
        }
        if (ics.size() < n_ic) throw AssumptionViolated(5, "invariant region barely meets B_R(0)");
    }

    IntegratorConfig run_cfg = cfg;
    run_cfg.t_max = std::max(cfg.t_max, 1.5 * rep.bound + 1.0);
    StopRules stop;
    stop.exit_region = Ball{Point::Zero(d), R};

    rep.measured.resize(n_ic);
    parallel_for(n_ic, [&](std::size_t i) {
        const auto traj = integrate(f, FlowKind::normalized_gradient_descent(), ics[i], run_cfg, stop);
        auto& rec = rep.measured[i];
        rec.initial = ics[i];
        rec.termination = traj.termination().cause;
        rec.terminal_state = traj.termination().state;
        rec.time = traj.termination().time;
        if (rec.termination == TerminationCause::CriticalPointReached) {
            rec.terminal_kind =
                classify_spectrum(rec.terminal_state, f->hessian(rec.terminal_state)).classification;
            rec.converged_to_minimum = rec.terminal_kind == CriticalKind::Minimum;
        }
    });

    for (const auto& rec : rep.measured) {
        if (rec.termination == TerminationCause::ExitedRegion)
            throw AssumptionViolated(5, "trajectory from " + describe(rec.initial) + " left B_R(0)");
        rep.max_time = std::max(rep.max_time, rec.time);
        if (!rec.converged_to_minimum || rec.time > rep.bound) rep.pass = false;
        if (rec.time > rep.trajectory_length_form) rep.exceeds_length_form = true;
    }
    return rep;
}

}  // namespace saddlelab
