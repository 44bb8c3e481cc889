#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "saddlelab/flow.hpp"
#include "saddlelab/objective.hpp"
#include "saddlelab/types.hpp"

namespace saddlelab {

enum class TerminationCause {
    HorizonReached,
    CriticalPointReached,
    Diverged,
    ExitedRegion,
    EnteredTarget,
    ArcLengthReached,
};

std::string_view to_string(TerminationCause c);

struct Termination {
    TerminationCause cause = TerminationCause::HorizonReached;
    double time = 0.0;
    Point state;
};

struct Ball {
    Point center;
    double radius = 0.0;
};

/// Optional extra stopping rules for `integrate`; each fires at a crossing
/// refined to event_time_tol.
struct StopRules {
    std::optional<Ball> exit_region;  // stop once ||x - c|| >= radius
    std::optional<Ball> target;       // stop once ||x - c|| <= radius
    std::optional<double> max_arc_length;
};

/// One solution of a continuous flow on [t_begin, t_end]: the accepted
/// integrator nodes plus a piecewise-quartic dense output of the state and of
/// the cumulative arc length L(t).
class Trajectory {
public:
    /// One accepted step. `coeffs` holds the Dormand-Prince continuous
    /// extension for the augmented state (x, L), evaluated in
    /// theta = (t - t0) / h; `t_stop` <= t0 + h truncates it at an event.
    struct Segment {
        double t0 = 0.0;
        double h = 0.0;
        double t_stop = 0.0;
        Matrix coeffs;  // (d + 1) x 5
    };

    Trajectory(ObjectivePtr f, FlowVariant flow, IntegratorConfig cfg);

    int dimension() const { return f_->dimension(); }
    FlowVariant flow() const { return flow_; }
    const IntegratorConfig& config() const { return cfg_; }
    const ObjectiveFunction& objective() const { return *f_; }
    const ObjectivePtr& objective_ptr() const { return f_; }

    std::span<const double> times() const { return times_; }
    std::span<const Point> states() const { return states_; }
    std::span<const double> f_values() const { return f_values_; }
    std::span<const double> arc_lengths() const { return arc_lengths_; }
    std::span<const Segment> segments() const { return segments_; }
    const Termination& termination() const { return termination_; }

    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    double total_arc_length() const { return arc_lengths_.back(); }

    /// Dense-output state; throws OutOfRange outside [t_begin, t_end].
    Point state_at(double t) const;

    /// Cumulative arc length since t_begin; throws OutOfRange outside the
    /// covered interval.
    double arc_length_at(double t) const;

    /// The sub-trajectory on [t0, t1] sharing this one's dense output.
    /// Arc length restarts at zero at t0.
    Trajectory slice(double t0, double t1) const;

    /// CSV with header `t,x_0,..,x_{d-1},f,arclen`, one row per node,
    /// 17 significant digits.
    void write_csv(std::ostream& out) const;

    // Builders used by the integrator.
    void push_node(double t, const Point& x, double arc_length);
    void push_segment(Segment seg);
    void set_termination(Termination term) { termination_ = std::move(term); }

private:
    const Segment& segment_for(double t) const;
    Vector dense_augmented(double t) const;

    ObjectivePtr f_;
    FlowVariant flow_;
    IntegratorConfig cfg_;
    std::vector<double> times_;
    std::vector<Point> states_;
    std::vector<double> f_values_;
    std::vector<double> arc_lengths_;
    std::vector<Segment> segments_;
    double arc_offset_ = 0.0;
    Termination termination_;
};

/// Adaptive Dormand-Prince 5(4) integration of the GD or NGD flow from x0.
///
/// Terminates at cfg.t_max (HorizonReached), when ||grad f|| <= grad_stop
/// (CriticalPointReached, time refined by bisection), when ||x|| exceeds
/// cfg.divergence_radius (Diverged), or on any of `stop`'s rules. For NGD a
/// critical x0 throws CriticalPointReached. Step-size underflow throws
/// IntegrationFailure.
Trajectory integrate(const ObjectivePtr& f, const FlowKind& kind, const Point& x0,
                     const IntegratorConfig& cfg, const StopRules& stop = {});

double arc_length_at(const Trajectory& traj, double t);

/// x~(s): the state at which the trajectory's arc length equals s. Throws
/// OutOfRange for s outside [0, total arc length].
std::vector<Point> reparametrize_by_arc_length(const Trajectory& traj,
                                               std::span<const double> s_grid);

/// Time at which the cumulative arc length reaches s.
double time_at_arc_length(const Trajectory& traj, double s);

}  // namespace saddlelab
