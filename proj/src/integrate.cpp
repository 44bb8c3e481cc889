// Adaptive Dormand-Prince 5(4) integration of the GD and NGD flows with the
// standard quartic continuous extension and event location on dense output.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "saddlelab/errors.hpp"
#include "saddlelab/trajectory.hpp"

namespace saddlelab {
namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kPiBeta = 0.04;
constexpr double kNearCriticalGrad = 1e-4;
constexpr double kNearCriticalStep = 1e-3;
constexpr double kReversalCosine = -0.5;
constexpr std::size_t kMaxSteps = 20'000'000;

/// Augmented right-hand side (x, L)' = (v(x), ||v(x)||).
struct AugmentedField {
    const ObjectiveFunction& f;
    bool normalized;
    double grad_stop;
    Eigen::Index d;

    // Returns ||grad f(x)||. Inside the critical tolerance the normalized field
    // is taken as zero so a stage landing there stays finite.
    double operator()(const Vector& y, Vector& dy) const {
        const Vector g = f.gradient(y.head(d));
        const double gn = g.norm();
        if (normalized) {
            if (gn > grad_stop)
                dy.head(d) = -g / gn;
            else
                dy.head(d).setZero();
        } else {
            dy.head(d) = -g;
        }
        dy(d) = dy.head(d).norm();
        return gn;
    }
};

double scaled_norm(const Vector& e, const Vector& y0, const Vector& y1, double atol, double rtol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double r = e(i) / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(e.size()));
}

double initial_step(const AugmentedField& rhs, const Vector& y0, const Vector& f0,
                    double hmax, double atol, double rtol) {
    const auto n = y0.size();
    Vector sk(n);
    for (Eigen::Index i = 0; i < n; ++i) sk(i) = atol + rtol * std::abs(y0(i));
    const double dnf = (f0.array() / sk.array()).square().sum();
    const double dny = (y0.array() / sk.array()).square().sum();
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, hmax);

    Vector y1 = y0 + h * f0;
    Vector f1(n);
    rhs(y1, f1);
    const double der2 = std::sqrt(((f1 - f0).array() / sk.array()).square().sum()) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, hmax});
}

/// Event function: fires where g(t, y) >= 0.
using EventFn = std::function<double(const Vector&)>;

struct PendingEvent {
    TerminationCause cause;
    EventFn g;
};

/// Earliest time in (ta, tb] at which g >= 0, refined by bisection to tol.
/// Samples five points and, when the sampled maximum is interior, maximizes
/// g by golden section so that brief excursions within the step are caught.
std::optional<double> locate(const std::function<Vector(double)>& dense, const EventFn& g,
                             double ta, double tb, double tol) {
    constexpr int kSamples = 4;
    double ts[kSamples + 1];
    double gs[kSamples + 1];
    for (int k = 0; k <= kSamples; ++k) {
        ts[k] = k == kSamples ? tb : ta + (tb - ta) * k / kSamples;
        gs[k] = g(dense(ts[k]));
        if (std::isnan(gs[k])) gs[k] = std::numeric_limits<double>::infinity();
    }

    auto bisect = [&](double lo, double hi) {
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            double gm = g(dense(mid));
            if (std::isnan(gm)) gm = std::numeric_limits<double>::infinity();
            (gm >= 0.0 ? hi : lo) = mid;
        }
        return hi;
    };

    for (int k = 1; k <= kSamples; ++k)
        if (gs[k] >= 0.0) return bisect(ts[k - 1], ts[k]);

    int kmax = 1;
    for (int k = 2; k < kSamples; ++k)
        if (gs[k] > gs[kmax]) kmax = k;
    if (!(gs[kmax] >= gs[kmax - 1] && gs[kmax] >= gs[kmax + 1])) return std::nullopt;

    // Golden-section maximization of g on [ts[kmax-1], ts[kmax+1]].
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = ts[kmax - 1], b = ts[kmax + 1];
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double g1 = g(dense(x1)), g2 = g(dense(x2));
    while (b - a > tol) {
        if (g1 >= 0.0) return bisect(a, x1);
        if (g2 >= 0.0) return bisect(a, x2);
        if (g1 > g2) {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - invphi * (b - a);
            g1 = g(dense(x1));
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + invphi * (b - a);
            g2 = g(dense(x2));
        }
    }
    return std::nullopt;
}

/// Time in [ta, tb] minimizing ||grad f|| along the dense output: eight
/// samples, then golden section around the best one.
double argmin_gradient(const std::function<Vector(double)>& dense, const ObjectiveFunction& f,
                       Eigen::Index d, double ta, double tb, double tol) {
    auto gn = [&](double t) { return f.gradient(dense(t).head(d)).norm(); };
    constexpr int kSamples = 8;
    int best = 0;
    double gbest = gn(ta);
    for (int k = 1; k <= kSamples; ++k) {
        const double v = gn(ta + (tb - ta) * k / kSamples);
        if (v < gbest) {
            gbest = v;
            best = k;
        }
    }
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = ta + (tb - ta) * std::max(0, best - 1) / kSamples;
    double b = ta + (tb - ta) * std::min(kSamples, best + 1) / kSamples;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double g1 = gn(x1), g2 = gn(x2);
    while (b - a > tol) {
        if (g1 < g2) {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - invphi * (b - a);
            g1 = gn(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + invphi * (b - a);
            g2 = gn(x2);
        }
    }
    const double tm = 0.5 * (a + b);
    return gn(tm) <= gbest ? tm : ta + (tb - ta) * best / kSamples;
}

}  // namespace

Trajectory integrate(const ObjectivePtr& fp, const FlowKind& kind, const Point& x0,
                     const IntegratorConfig& cfg, const StopRules& stop) {
    if (!fp) throw std::invalid_argument("objective must not be null");
    if (kind.is_discrete()) throw std::invalid_argument("integrate needs GD or NGD");
    cfg.validate();
    const ObjectiveFunction& f = *fp;
    const Eigen::Index d = f.dimension();
    if (x0.size() != d) throw std::invalid_argument("initial condition has wrong dimension");
    const Eigen::Index n = d + 1;
    const bool normalized = kind.variant() == FlowVariant::NGD;
    const AugmentedField rhs{f, normalized, cfg.grad_stop, d};

    Trajectory traj(fp, kind.variant(), cfg);

    Vector y(n);
    y.head(d) = x0;
    y(d) = 0.0;
    Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), ystage(n);
    double grad_norm = rhs(y, k1);
    if (!std::isfinite(grad_norm)) throw IntegrationFailure("non-finite gradient at x0");

    traj.push_node(0.0, x0, 0.0);
    if (!(grad_norm > cfg.grad_stop)) {
        if (normalized) throw CriticalPointReached(x0);
        traj.set_termination({TerminationCause::CriticalPointReached, 0.0, x0});
        return traj;
    }

    std::vector<PendingEvent> events;
    events.push_back({TerminationCause::CriticalPointReached, [&f, &cfg, d](const Vector& ya) {
                          return cfg.grad_stop - f.gradient(ya.head(d)).norm();
                      }});
    events.push_back({TerminationCause::Diverged, [&cfg, d](const Vector& ya) {
                          const double nx = ya.head(d).norm();
                          return std::isfinite(nx) ? nx - cfg.divergence_radius
                                                   : std::numeric_limits<double>::infinity();
                      }});
    if (stop.exit_region) {
        const Ball b = *stop.exit_region;
        events.push_back({TerminationCause::ExitedRegion, [b, d](const Vector& ya) {
                              return (ya.head(d) - b.center).norm() - b.radius;
                          }});
    }
    if (stop.target) {
        const Ball b = *stop.target;
        events.push_back({TerminationCause::EnteredTarget, [b, d](const Vector& ya) {
                              return b.radius - (ya.head(d) - b.center).norm();
                          }});
    }
    if (stop.max_arc_length) {
        const double lmax = *stop.max_arc_length;
        events.push_back({TerminationCause::ArcLengthReached,
                          [lmax, d](const Vector& ya) { return ya(d) - lmax; }});
    }

    // Stop rules already satisfied at t = 0 (the critical-point rule was handled above).
    for (std::size_t e = 1; e < events.size(); ++e) {
        if (events[e].g(y) >= 0.0) {
            traj.set_termination({events[e].cause, 0.0, x0});
            return traj;
        }
    }

    double t = 0.0;
    double h = initial_step(rhs, y, k1, cfg.max_step, cfg.abs_tol, cfg.rel_tol);
    double err_old = 1e-4;
    bool last_rejected = false;
    std::size_t steps = 0;

    while (true) {
        if (++steps > kMaxSteps) throw IntegrationFailure("step budget exhausted");

        double hmax = cfg.max_step;
        if (normalized && grad_norm < kNearCriticalGrad) hmax = std::min(hmax, kNearCriticalStep);
        h = std::min(h, hmax);
        bool final_step = false;
        if (t + h >= cfg.t_max) {
            h = cfg.t_max - t;
            final_step = true;
        }
        const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < hmin) {
            std::ostringstream os;
            os.precision(17);
            os << "step size underflow at t=" << t << " (h=" << h << ", |grad f|=" << grad_norm
               << ", x=" << y.head(d).transpose() << ")";
            throw IntegrationFailure(os.str());
        }

        ystage = y + h * a21 * k1;
        rhs(ystage, k2);
        ystage = y + h * (a31 * k1 + a32 * k2);
        rhs(ystage, k3);
        ystage = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(ystage, k4);
        ystage = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(ystage, k5);
        ystage = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(ystage, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const double grad_new = rhs(ynew, k7);

        const Vector errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = scaled_norm(errv, y, ynew, cfg.abs_tol, cfg.rel_tol);
        if (!std::isfinite(err) || !std::isfinite(grad_new)) err = std::numeric_limits<double>::infinity();

        if (err > 1.0) {
            const double fac =
                std::isfinite(err) ? std::max(kMinFactor, kSafety * std::pow(err, -0.2)) : 0.1;
            h *= fac;
            last_rejected = true;
            continue;
        }

        Trajectory::Segment seg;
        seg.t0 = t;
        seg.h = h;
        const double t_new = final_step ? cfg.t_max : t + h;
        seg.t_stop = t_new;
        seg.coeffs.resize(n, 5);
        seg.coeffs.col(0) = y;
        seg.coeffs.col(1) = ynew - y;
        seg.coeffs.col(2) = h * k1 - seg.coeffs.col(1);
        seg.coeffs.col(3) = seg.coeffs.col(1) - h * k7 - seg.coeffs.col(2);
        seg.coeffs.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

        const auto dense = [&seg](double tq) -> Vector {
            const double th = (tq - seg.t0) / seg.h;
            const double th1 = 1.0 - th;
            const auto& c = seg.coeffs;
            return c.col(0) + th * (c.col(1) + th1 * (c.col(2) + th * (c.col(3) + th1 * c.col(4))));
        };

        std::optional<std::pair<double, TerminationCause>> hit;
        for (const auto& ev : events) {
            if (auto te = locate(dense, ev.g, t, t_new, cfg.event_time_tol)) {
                if (!hit || *te < hit->first) hit = std::make_pair(*te, ev.cause);
            }
        }

        if (hit) {
            const double te = hit->first;
            seg.t_stop = te;
            const Vector ye = te == t_new ? ynew : dense(te);
            traj.push_segment(std::move(seg));
            traj.push_node(te, ye.head(d), ye(d));
            traj.set_termination({hit->second, te, ye.head(d)});
            return traj;
        }

        // The unit field reversing within one step near a critical point means
        // the orbit ran into it between samples: the band ||grad f|| <= grad_stop
        // can be narrower than the error tolerance, so the event above may miss it.
        if (normalized && grad_norm < kNearCriticalGrad &&
            k1.head(d).dot(k7.head(d)) < kReversalCosine) {
            const double tc = argmin_gradient(dense, f, d, t, t_new, cfg.event_time_tol);
            seg.t_stop = tc;
            const Vector yc = dense(tc);
            traj.push_segment(std::move(seg));
            traj.push_node(tc, yc.head(d), yc(d));
            traj.set_termination({TerminationCause::CriticalPointReached, tc, yc.head(d)});
            return traj;
        }

        traj.push_segment(std::move(seg));
        traj.push_node(t_new, ynew.head(d), ynew(d));
        t = t_new;
        y = ynew;
        k1 = k7;
        grad_norm = grad_new;

        if (final_step) {
            traj.set_termination({TerminationCause::HorizonReached, t, y.head(d)});
            return traj;
        }

        const double e = std::max(err, 1e-10);
        double fac = kSafety * std::pow(e, -0.2 + 0.75 * kPiBeta) * std::pow(err_old, kPiBeta);
        fac = std::clamp(fac, kMinFactor, kMaxFactor);
        if (last_rejected) fac = std::min(fac, 1.0);
        h *= fac;
        err_old = std::max(err, 1e-4);
        last_rejected = false;
    }
}

}  // namespace saddlelab
