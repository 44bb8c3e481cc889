#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "saddlelab/objective.hpp"
#include "saddlelab/types.hpp"

namespace saddlelab {

enum class FlowVariant { GD, NGD, DiscreteGD, DiscreteNGD };

std::string_view to_string(FlowVariant v);

/// Which descent dynamics to run. Discrete variants carry their step-size
/// sequence; continuous variants carry none.
class FlowKind {
public:
    static FlowKind gradient_descent();
    static FlowKind normalized_gradient_descent();
    static FlowKind discrete_gd(std::vector<double> step_sizes);
    static FlowKind discrete_ngd(std::vector<double> step_sizes);

    FlowVariant variant() const { return variant_; }
    bool is_discrete() const {
        return variant_ == FlowVariant::DiscreteGD || variant_ == FlowVariant::DiscreteNGD;
    }
    bool is_normalized() const {
        return variant_ == FlowVariant::NGD || variant_ == FlowVariant::DiscreteNGD;
    }
    std::span<const double> step_sizes() const { return step_sizes_; }

private:
    FlowKind(FlowVariant v, std::vector<double> steps);

    FlowVariant variant_;
    std::vector<double> step_sizes_;
};

struct IntegratorConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    double max_step = 0.05;
    double t_max = 100.0;
    double grad_stop = 1e-10;  // ||grad f|| at or below this ends the flow
    double event_time_tol = 1e-13;
    double divergence_radius = 1e6;

    /// Throws std::invalid_argument unless every field is strictly positive
    /// and event_time_tol <= max_step.
    void validate() const;
};

/// -grad f(x).
Vector gd_field(const ObjectiveFunction& f, const Point& x);

/// -grad f(x) / ||grad f(x)||. Throws CriticalPointReached when
/// ||grad f(x)|| <= grad_stop.
Vector ngd_field(const ObjectiveFunction& f, const Point& x, double grad_stop);

/// One step of x_{n+1} = x_n - alpha grad f(x_n) (DiscreteGD) or of its
/// normalized counterpart (DiscreteNGD).
Point step_discrete(const ObjectiveFunction& f, FlowVariant kind, const Point& x, double alpha,
                    double grad_stop = 1e-10);

/// Iterates `step_discrete` over the kind's full step-size sequence. Returns
/// every iterate including x0. A DiscreteNGD run stops early (without
/// throwing) once the gradient falls to grad_stop.
std::vector<Point> run_discrete(const ObjectiveFunction& f, const FlowKind& kind, const Point& x0,
                                double grad_stop = 1e-10);

}  // namespace saddlelab
