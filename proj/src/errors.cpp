#include "saddlelab/errors.hpp"

#include <sstream>

namespace saddlelab {
namespace {

std::string point_str(const Point& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) os << ',';
        os << x(i);
    }
    os << ')';
    return os.str();
}

}  // namespace

NotCritical::NotCritical(double grad_norm)
    : Error("gradient norm " + std::to_string(grad_norm) + " exceeds the critical-point tolerance"),
      grad_norm_(grad_norm) {}

CriticalPointReached::CriticalPointReached(Point at)
    : Error("critical point reached at " + point_str(at)), point_(std::move(at)) {}

InvalidC::InvalidC(double C)
    : Error("constant C must be strictly greater than 4, got " + std::to_string(C)) {}

BoundViolated::BoundViolated(Point ic, double occupancy, double bound)
    : Error("occupancy " + std::to_string(occupancy) + " exceeds bound " + std::to_string(bound) +
            " for initial condition " + point_str(ic)),
      ic_(std::move(ic)),
      occupancy_(occupancy),
      bound_(bound) {}

AssumptionViolated::AssumptionViolated(int assumption, const std::string& detail)
    : Error("assumption " + std::to_string(assumption) + " violated: " + detail),
      assumption_(assumption) {}

ConfigError::ConfigError(const std::string& msg, std::size_t position)
    : Error(position == npos ? msg : msg + " (at offset " + std::to_string(position) + ")"),
      position_(position) {}

}  // namespace saddlelab
