#pragma once

#include <string>
#include <vector>

#include "saddlelab/trajectory.hpp"

namespace saddlelab {

struct OccupancyInterval {
    double t_in = 0.0;
    double t_out = 0.0;
};

/// Times a trajectory spends strictly inside B_r(center).
struct BallOccupancy {
    Point center;
    double radius = 0.0;
    std::vector<OccupancyInterval> intervals;  // disjoint, increasing
    double total_time = 0.0;
    bool tangency_warning = false;  // a grazing contact was resolved by sub-sampling
    std::vector<std::string> warnings;
};

/// Scans the dense output for crossings of ||x(t) - center|| = r and refines
/// each by bisection to the trajectory's event_time_tol. Distance extrema
/// between samples are located by golden-section search so short excursions
/// are not missed.
BallOccupancy ball_occupancy(const Trajectory& traj, const Point& center, double r);

}  // namespace saddlelab
