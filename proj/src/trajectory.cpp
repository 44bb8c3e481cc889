#include "saddlelab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "saddlelab/errors.hpp"

namespace saddlelab {

std::string_view to_string(TerminationCause c) {
    switch (c) {
        case TerminationCause::HorizonReached: return "HorizonReached";
        case TerminationCause::CriticalPointReached: return "CriticalPointReached";
        case TerminationCause::Diverged: return "Diverged";
        case TerminationCause::ExitedRegion: return "ExitedRegion";
        case TerminationCause::EnteredTarget: return "EnteredTarget";
        case TerminationCause::ArcLengthReached: return "ArcLengthReached";
    }
    return "unknown";
}

Trajectory::Trajectory(ObjectivePtr f, FlowVariant flow, IntegratorConfig cfg)
    : f_(std::move(f)), flow_(flow), cfg_(cfg) {}

void Trajectory::push_node(double t, const Point& x, double arc_length) {
    times_.push_back(t);
    states_.push_back(x);
    f_values_.push_back(f_->value(x));
    arc_lengths_.push_back(arc_length - arc_offset_);
}

void Trajectory::push_segment(Segment seg) { segments_.push_back(std::move(seg)); }

const Trajectory::Segment& Trajectory::segment_for(double t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& s) { return v < s.t0; });
    if (it != segments_.begin()) --it;
    return *it;
}

Vector Trajectory::dense_augmented(double t) const {
    if (!(t >= t_begin() && t <= t_end())) {
        std::ostringstream os;
        os.precision(17);
        os << "time " << t << " outside trajectory interval [" << t_begin() << ", " << t_end()
           << "]";
        throw OutOfRange(os.str());
    }
    if (segments_.empty()) {
        Vector y(dimension() + 1);
        y.head(dimension()) = states_.front();
        y(dimension()) = arc_offset_ + arc_lengths_.front();
        return y;
    }
    const Segment& s = segment_for(t);
    const double th = (t - s.t0) / s.h;
    const double th1 = 1.0 - th;
    const auto& c = s.coeffs;
    return c.col(0) + th * (c.col(1) + th1 * (c.col(2) + th * (c.col(3) + th1 * c.col(4))));
}

Point Trajectory::state_at(double t) const {
    if (t == t_end()) return states_.back();
    if (t == t_begin()) return states_.front();
    return dense_augmented(t).head(dimension());
}

double Trajectory::arc_length_at(double t) const {
    if (t == t_end()) return arc_lengths_.back();
    if (t == t_begin()) return arc_lengths_.front();
    const double L = dense_augmented(t)(dimension()) - arc_offset_;
    return std::max(0.0, L);
}

Trajectory Trajectory::slice(double t0, double t1) const {
    if (!(t0 >= t_begin() && t1 <= t_end() && t0 < t1))
        throw OutOfRange("slice bounds outside trajectory interval");

    Trajectory out(f_, flow_, cfg_);
    out.arc_offset_ = arc_offset_ + arc_length_at(t0);
    for (const auto& s : segments_) {
        if (s.t_stop <= t0 || s.t0 >= t1) continue;
        Segment copy = s;
        copy.t_stop = std::min(s.t_stop, t1);
        out.segments_.push_back(std::move(copy));
    }
    out.push_node(t0, state_at(t0), out.arc_offset_);
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (times_[i] > t0 && times_[i] < t1)
            out.push_node(times_[i], states_[i], arc_offset_ + arc_lengths_[i]);
    out.push_node(t1, state_at(t1), arc_offset_ + arc_length_at(t1));

    if (t1 == t_end()) {
        out.termination_ = termination_;
    } else {
        out.termination_ = {TerminationCause::HorizonReached, t1, out.states_.back()};
    }
    return out;
}

void Trajectory::write_csv(std::ostream& out) const {
    const int d = dimension();
    out << "t";
    for (int i = 0; i < d; ++i) out << ",x_" << i;
    out << ",f,arclen\n";
    const auto old_prec = out.precision(17);
    for (std::size_t k = 0; k < times_.size(); ++k) {
        out << times_[k];
        for (int i = 0; i < d; ++i) out << ',' << states_[k](i);
        out << ',' << f_values_[k] << ',' << arc_lengths_[k] << '\n';
    }
    out.precision(old_prec);
}

double arc_length_at(const Trajectory& traj, double t) { return traj.arc_length_at(t); }

double time_at_arc_length(const Trajectory& traj, double s) {
    const auto L = traj.arc_lengths();
    const auto T = traj.times();
    const double total = L.back();
    if (!(s >= 0.0) || s > total * (1.0 + 1e-14) + 1e-14) {
        std::ostringstream os;
        os.precision(17);
        os << "arc length " << s << " outside [0, " << total << "]";
        throw OutOfRange(os.str());
    }
    if (s >= total) return T.back();
    if (s <= 0.0) return T.front();

    // First node with L >= s; the crossing lies in the preceding step.
    const auto it = std::lower_bound(L.begin(), L.end(), s);
    const auto hi_idx = static_cast<std::size_t>(it - L.begin());
    double lo = T[hi_idx == 0 ? 0 : hi_idx - 1];
    double hi = T[hi_idx];
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (traj.arc_length_at(mid) < s)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<Point> reparametrize_by_arc_length(const Trajectory& traj,
                                               std::span<const double> s_grid) {
    std::vector<Point> out;
    out.reserve(s_grid.size());
    for (double s : s_grid) out.push_back(traj.state_at(time_at_arc_length(traj, s)));
    return out;
}

}  // namespace saddlelab
