#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "saddlelab/catalog.hpp"
#include "saddlelab/occupancy.hpp"
#include "saddlelab/spectral.hpp"
#include "saddlelab/trajectory.hpp"

namespace saddlelab {

inline constexpr double kDefaultC = 5.0;
inline constexpr double kDefaultC1 = 0.6;
inline constexpr double kDefaultC2 = 0.9;

// ---------------------------------------------------------------------------
// Seeded initial-condition samplers. Directions are normalized Gaussian
// vectors drawn from a std::mt19937_64 seeded with `seed`.

std::vector<Point> sample_sphere(const Point& center, double r, std::size_t n, std::uint64_t seed);
std::vector<Point> sample_ball(const Point& center, double r, std::size_t n, std::uint64_t seed);
/// Uniform in B_outer(center) \ B_inner(center).
std::vector<Point> sample_annulus(const Point& center, double inner, double outer, std::size_t n,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Escape-time bound

/// C sqrt(kappa) r. Throws InvalidC unless C > 4.
double escape_time_bound(double kappa, double r, double C);

struct RadiusEstimate {
    double C = 0.0;
    double C_hat = 0.0;
    double lambda_max = 0.0;
    double kappa = 1.0;
    double r_bar = 0.0;
};

/// Radius below which the escape-time bound holds given |D^3 f| <= C_hat:
///   r_bar = 6 kappa^{-1/2} C_hat^{-1} lambda_max (C(3 kappa + 2)/(6 C kappa + 16) - 1/2).
/// Throws InvalidC unless C > 4.
RadiusEstimate max_permissible_radius(double C, double C_hat, double lambda_max, double kappa);

/// Radius within which a terminal state counts as having reached the saddle:
/// 10 sqrt(grad_stop / |lambda|min).
double saddle_capture_radius(const CriticalPointInfo& saddle, double grad_stop);

struct EscapeRecord {
    Point initial;
    double occupancy = 0.0;
    TerminationCause termination = TerminationCause::HorizonReached;
    Point terminal_state;
    bool converged_to_saddle = false;
};

struct EscapeTimeReport {
    CriticalPointInfo saddle;
    double r = 0.0;
    double C = kDefaultC;
    double bound = 0.0;  // C sqrt(kappa) r
    std::uint64_t seed = 0;
    std::vector<EscapeRecord> per_ic;
    double max_occupancy = 0.0;  // over ICs that do not reach the saddle
    std::optional<std::size_t> argmax;
    double slack = 0.0;  // bound - max_occupancy
    bool pass = true;
};

/// Samples n_ic initial conditions on the sphere of radius r about the saddle,
/// integrates NGD until it leaves B_2r or terminates, and measures the time
/// spent in B_r. Trajectories ending at the saddle are flagged and excluded
/// from the maximum. Never throws BoundViolated; see `escape_sweep`.
EscapeTimeReport run_escape_sweep(const ObjectivePtr& f, const CriticalPointInfo& saddle, double r,
                                  std::size_t n_ic, std::uint64_t seed, double C,
                                  const IntegratorConfig& cfg);

/// `run_escape_sweep`, throwing BoundViolated when the maximum occupancy
/// exceeds C sqrt(kappa) r.
EscapeTimeReport escape_sweep(const ObjectivePtr& f, const CriticalPointInfo& saddle, double r,
                              std::size_t n_ic, std::uint64_t seed, double C,
                              const IntegratorConfig& cfg);

// ---------------------------------------------------------------------------
// GD stall

/// Time GD started at `ic` (on the sphere of radius r about `saddle`) spends
/// inside B_r before first entering B_eps. Throws NeverEntered if it leaves
/// B_r first.
double gd_stall_time(const ObjectivePtr& f, const Point& saddle, double r, double eps,
                     const Point& ic, const IntegratorConfig& cfg);

/// The two closed-form lower bounds for the diag(1,-1) stall:
/// `scaled` = -r log(eps) and `direct` = log(r / eps). They agree at r = 1.
struct StallLowerBounds {
    double scaled = 0.0;
    double direct = 0.0;
};
StallLowerBounds stall_lower_bounds(double r, double eps);

// ---------------------------------------------------------------------------
// Dissipation

struct DissipationSample {
    double t = 0.0;
    double slope = 0.0;           // centered difference of f(x(t))
    double neg_grad_norm = 0.0;   // -||grad f(x(t))||
};

struct DissipationTrace {
    std::vector<DissipationSample> samples;
    double max_discrepancy = 0.0;
};

/// Compares d/dt f(x(t)) (centered differences on the dense output) with
/// -||grad f(x(t))|| at interior nodes of an NGD trajectory.
DissipationTrace dissipation_trace(const Trajectory& traj, const ObjectiveFunction& f);

// ---------------------------------------------------------------------------
// Local Taylor estimates

enum class TaylorInequality {
    ValueGrowth,     // |f(x) - f(x*)| <= C1 d~(x)^2
    GradientLower,   // ||grad f(x)|| >= C2 ||H (x - x*)||
    GradientMetric,  // ||grad f(x)|| >= C2 sqrt(|lambda|min) d~(x)
};

std::string_view to_string(TaylorInequality which);

struct TaylorViolation {
    Point x;
    TaylorInequality which = TaylorInequality::ValueGrowth;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct TaylorCheckReport {
    double C1 = kDefaultC1;
    double C2 = kDefaultC2;
    double implied_C = 0.0;  // 8 C1 / C2
    double r_hat = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::size_t violation_count = 0;
    std::vector<TaylorViolation> violations;  // first kMaxStoredViolations only
    std::vector<std::pair<double, double>> tilde_trace;  // (t, d~(x(t) - x*))

    static constexpr std::size_t kMaxStoredViolations = 10000;
};

/// Samples n_samples points uniformly in B_r_hat(x_star) and checks the local
/// value-growth and gradient lower bounds with H = D^2 f(x_star).
TaylorCheckReport taylor_estimate_check(const ObjectiveFunction& f, const Point& x_star, double C1,
                                        double C2, double r_hat, std::size_t n_samples,
                                        std::uint64_t seed);

/// (t, d~(x(t) - x_star)) at every trajectory node.
std::vector<std::pair<double, double>> modified_distance_trace(const Trajectory& traj,
                                                               const Point& x_star,
                                                               const Matrix& H);

// ---------------------------------------------------------------------------
// Non-convergence to saddles

struct StableManifoldRecord {
    Point initial;
    TerminationCause termination = TerminationCause::HorizonReached;
    Point terminal_state;
    bool reached_saddle = false;
};

struct StableManifoldReport {
    Point saddle;
    double r = 0.0;
    std::uint64_t seed = 0;
    double capture_radius = 0.0;
    std::vector<StableManifoldRecord> per_ic;
    std::size_t reached = 0;
    double fraction = 0.0;
};

/// Whether NGD from x0 terminates at the saddle (CriticalPointReached within
/// the capture radius). Integration stops on leaving B_exit_radius(saddle).
StableManifoldRecord ngd_reaches_saddle(const ObjectivePtr& f, const CriticalPointInfo& saddle,
                                        const Point& x0, double exit_radius,
                                        const IntegratorConfig& cfg);

/// NGD from n_ic uniform ICs in B_2r(saddle) \ B_r(saddle); reports the
/// fraction that terminate at the saddle.
StableManifoldReport run_stable_manifold_sample(const ObjectivePtr& f, const Point& saddle, double r,
                                                std::size_t n_ic, std::uint64_t seed,
                                                const IntegratorConfig& cfg);

double stable_manifold_sample(const ObjectivePtr& f, const Point& saddle, double r,
                              std::size_t n_ic, std::uint64_t seed, const IntegratorConfig& cfg);

// ---------------------------------------------------------------------------
// Orbit equivalence

struct OrbitComparison {
    Point initial;
    double s_max = 0.0;
    double common_length = 0.0;
    double sup_error = 0.0;          // sup_s ||x~_GD(s) - x_NGD(s)||
    double ngd_arc_deviation = 0.0;  // max |L(t) - t| over NGD nodes
    TerminationCause gd_termination = TerminationCause::HorizonReached;
    TerminationCause ngd_termination = TerminationCause::HorizonReached;
    std::vector<double> s_grid;
    std::vector<double> errors;
};

/// Integrates GD and NGD from x0 up to arc length s_max and compares the arc
/// length reparametrization of the GD solution with the NGD solution on a
/// uniform grid of n_grid points over the common arc-length range.
OrbitComparison compare_orbits(const ObjectivePtr& f, const Point& x0, double s_max,
                               const IntegratorConfig& cfg, std::size_t n_grid = 2001);

// ---------------------------------------------------------------------------
// Global convergence-time bound

struct GlobalRecord {
    Point initial;
    double time = 0.0;
    TerminationCause termination = TerminationCause::HorizonReached;
    Point terminal_state;
    CriticalKind terminal_kind = CriticalKind::Degenerate;
    bool converged_to_minimum = false;
};

struct GlobalBoundReport {
    double M = 0.0;
    double nu = 0.0;
    bool nu_estimated = false;
    double R = 0.0;
    double r = 0.0;
    int d = 0;
    double C = kDefaultC;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 1.0;
    double bound = 0.0;               // 2M/nu + C sqrt(kappa) (R+r)^d / r^(d-1)
    double trajectory_length_form = 0.0;  // M/nu + C sqrt(kappa) (R+r)^d / r^(d-1)
    std::size_t critical_points = 0;
    double min_separation = 0.0;
    std::size_t grid_points = 0;
    std::uint64_t seed = 0;
    std::vector<GlobalRecord> measured;
    double max_time = 0.0;
    bool exceeds_length_form = false;
    bool pass = true;
};

/// Global convergence-time bound arithmetic, exposed for unit tests.
double global_time_bound(double M, double nu, double C, double kappa, double R, double r, int d);

/// Estimates M (grid max of |f| over B_R plus 1%), nu (grid min of ||grad f||
/// outside the r-balls about critical points, less 1%, unless supplied),
/// checks critical-point separation, then runs NGD from n_ic seeded ICs in
/// B_R(0) (restricted to the entry's invariant region when it has one) and
/// checks every convergence time against the bound. Throws
/// AssumptionViolated when an assumption fails.
GlobalBoundReport global_convergence_experiment(const CatalogEntry& entry, double R,
                                                std::optional<double> nu, double r, double C,
                                                std::size_t n_ic, std::uint64_t seed,
                                                const IntegratorConfig& cfg);

}  // namespace saddlelab
