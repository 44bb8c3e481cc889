#include "saddlelab/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "saddlelab/errors.hpp"

namespace saddlelab {

std::string_view to_string(FlowVariant v) {
    switch (v) {
        case FlowVariant::GD: return "gd";
        case FlowVariant::NGD: return "ngd";
        case FlowVariant::DiscreteGD: return "discrete-gd";
        case FlowVariant::DiscreteNGD: return "discrete-ngd";
    }
    return "unknown";
}

FlowKind::FlowKind(FlowVariant v, std::vector<double> steps)
    : variant_(v), step_sizes_(std::move(steps)) {
    if (is_discrete()) {
        if (step_sizes_.empty()) throw std::invalid_argument("discrete flows need step sizes");
        for (double a : step_sizes_)
            if (!(a > 0.0)) throw std::invalid_argument("step sizes must be positive");
    } else if (!step_sizes_.empty()) {
        throw std::invalid_argument("continuous flows take no step sizes");
    }
}

FlowKind FlowKind::gradient_descent() { return FlowKind(FlowVariant::GD, {}); }
FlowKind FlowKind::normalized_gradient_descent() { return FlowKind(FlowVariant::NGD, {}); }
FlowKind FlowKind::discrete_gd(std::vector<double> s) {
    return FlowKind(FlowVariant::DiscreteGD, std::move(s));
}
FlowKind FlowKind::discrete_ngd(std::vector<double> s) {
    return FlowKind(FlowVariant::DiscreteNGD, std::move(s));
}

void IntegratorConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(name) + " must be strictly positive");
    };
    positive(abs_tol, "abs_tol");
    positive(rel_tol, "rel_tol");
    positive(max_step, "max_step");
    positive(t_max, "t_max");
    positive(grad_stop, "grad_stop");
    positive(event_time_tol, "event_time_tol");
    positive(divergence_radius, "divergence_radius");
    if (event_time_tol > max_step)
        throw std::invalid_argument("event_time_tol must not exceed max_step");
}

Vector gd_field(const ObjectiveFunction& f, const Point& x) { return -f.gradient(x); }

Vector ngd_field(const ObjectiveFunction& f, const Point& x, double grad_stop) {
    const Vector g = f.gradient(x);
    const double n = g.norm();
    if (!(n > grad_stop)) throw CriticalPointReached(x);
    return -g / n;
}

Point step_discrete(const ObjectiveFunction& f, FlowVariant kind, const Point& x, double alpha,
                    double grad_stop) {
    if (!(alpha > 0.0)) throw std::invalid_argument("step size must be positive");
    switch (kind) {
        case FlowVariant::DiscreteGD: return x - alpha * f.gradient(x);
        case FlowVariant::DiscreteNGD: return x + alpha * ngd_field(f, x, grad_stop);
        default: throw std::invalid_argument("step_discrete needs a discrete flow kind");
    }
}

std::vector<Point> run_discrete(const ObjectiveFunction& f, const FlowKind& kind, const Point& x0,
                                double grad_stop) {
    if (!kind.is_discrete()) throw std::invalid_argument("run_discrete needs a discrete flow kind");
    std::vector<Point> path{x0};
    path.reserve(kind.step_sizes().size() + 1);
    for (double alpha : kind.step_sizes()) {
        if (kind.variant() == FlowVariant::DiscreteNGD &&
            !(f.gradient(path.back()).norm() > grad_stop))
            break;
        path.push_back(step_discrete(f, kind.variant(), path.back(), alpha, grad_stop));
    }
    return path;
}

}  // namespace saddlelab
