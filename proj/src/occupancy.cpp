#include "saddlelab/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace saddlelab {
namespace {

constexpr double kGrazeTol = 1e-9;
constexpr double kBoundaryTol = 1e-12;
constexpr std::size_t kMaxPiecesPerSegment = 10000;

struct Scanner {
    const Trajectory& traj;
    const Point& center;
    double r;
    double tol;

    double dist(double t) const { return (traj.state_at(t) - center).norm() - r; }

    /// Crossing of the boundary between lo and hi, where lo is known to be on
    /// the `inside_lo` side. Refined until hi - lo <= tol.
    double bisect(double lo, double hi, bool inside_lo) const {
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            ((dist(mid) < 0.0) == inside_lo ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    /// Golden-section search for the extremum of the signed distance on
    /// [a, b]: minimum when `minimize`, otherwise maximum.
    std::pair<double, double> extremum(double a, double b, bool minimize) const {
        const double s = minimize ? 1.0 : -1.0;
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
        double f1 = s * dist(x1), f2 = s * dist(x2);
        while (b - a > tol) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - invphi * (b - a);
                f1 = s * dist(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + invphi * (b - a);
                f2 = s * dist(x2);
            }
        }
        const double tm = 0.5 * (a + b);
        return {tm, dist(tm)};
    }

    /// Sign changes on a fine uniform grid over [a, b].
    void subsample(double a, double b, double spacing, std::vector<double>& crossings) const {
        const auto pieces = static_cast<std::size_t>(
            std::clamp(std::ceil((b - a) / spacing), 1.0, 1e6));
        double t_prev = a;
        bool in_prev = dist(a) < 0.0;
        for (std::size_t i = 1; i <= pieces; ++i) {
            const double t = i == pieces ? b : a + (b - a) * static_cast<double>(i) / pieces;
            const bool in = dist(t) < 0.0;
            if (in != in_prev) crossings.push_back(bisect(t_prev, t, in_prev));
            t_prev = t;
            in_prev = in;
        }
    }
};

}  // namespace

BallOccupancy ball_occupancy(const Trajectory& traj, const Point& center, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
    if (center.size() != traj.dimension()) throw std::invalid_argument("center has wrong dimension");

    BallOccupancy occ;
    occ.center = center;
    occ.radius = r;

    const auto& cfg = traj.config();
    const Scanner sc{traj, center, r, cfg.event_time_tol};
    const double t_begin = traj.t_begin();
    const double t_end = traj.t_end();

    // Sample times: every node, with each step subdivided so consecutive
    // samples are at most max_step apart in time and r/4 apart in arc length.
    std::vector<double> ts{t_begin};
    for (const auto& seg : traj.segments()) {
        const double a = std::max(seg.t0, t_begin);
        const double b = std::min(seg.t_stop, t_end);
        if (!(b > a)) continue;
        const double len = traj.arc_length_at(b) - traj.arc_length_at(a);
        const double pieces = std::clamp(
            std::max(std::ceil((b - a) / cfg.max_step), std::ceil(4.0 * len / r)), 1.0,
            static_cast<double>(kMaxPiecesPerSegment));
        const auto m = static_cast<std::size_t>(pieces);
        for (std::size_t i = 1; i <= m; ++i) {
            const double t = i == m ? b : a + (b - a) * static_cast<double>(i) / pieces;
            if (t > ts.back()) ts.push_back(t);
        }
    }

    std::vector<double> D(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) D[k] = sc.dist(ts[k]);
    // A start on the sphere counts as outside; an inward start is then caught
    // as a crossing within event_time_tol of t_begin.
    if (std::abs(D[0]) <= kBoundaryTol * r) D[0] = 0.0;

    std::vector<double> crossings;
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const bool in_prev = D[k - 1] < 0.0;
        if ((D[k] < 0.0) != in_prev) crossings.push_back(sc.bisect(ts[k - 1], ts[k], in_prev));
    }

    const double fine = cfg.max_step / 100.0;
    auto note_tangency = [&](double t) {
        occ.tangency_warning = true;
        std::ostringstream os;
        os.precision(17);
        os << "TangencyWarning: grazing contact with the sphere near t=" << t
           << "; resolved by sub-sampling";
        occ.warnings.push_back(os.str());
    };

    // Distance extremum on [a, b] without a sampled sign change: a dip into
    // the ball when `outside`, otherwise a bump out of it.
    auto probe = [&](double a, double b, bool outside) {
        const auto [tm, dm] = sc.extremum(a, b, outside);
        if (std::abs(dm) <= kGrazeTol) {
            note_tangency(tm);
            sc.subsample(a, b, fine, crossings);
        } else if (outside ? dm < 0.0 : dm >= 0.0) {
            crossings.push_back(sc.bisect(a, tm, !outside));
            crossings.push_back(sc.bisect(tm, b, outside));
        }
    };

    for (std::size_t k = 1; k + 1 < ts.size(); ++k) {
        const bool outside = D[k - 1] >= 0.0 && D[k] >= 0.0 && D[k + 1] >= 0.0;
        const bool inside = D[k - 1] < 0.0 && D[k] < 0.0 && D[k + 1] < 0.0;
        if (outside && D[k] < D[k - 1] && D[k] <= D[k + 1]) probe(ts[k - 1], ts[k + 1], true);
        else if (inside && D[k] > D[k - 1] && D[k] >= D[k + 1]) probe(ts[k - 1], ts[k + 1], false);
    }

    // An extremum between the first two or the last two samples is invisible
    // to the triple test; the one-sided slope at the end point reveals it.
    if (ts.size() >= 2) {
        const std::size_t n = ts.size() - 1;
        const double h0 = (ts[1] - ts[0]) * 1e-6;
        const double s0 = sc.dist(ts[0] + h0) - sc.dist(ts[0]);
        if (D[0] >= 0.0 && D[1] >= 0.0 && D[1] >= D[0] && s0 < 0.0) probe(ts[0], ts[1], true);
        if (D[0] < 0.0 && D[1] < 0.0 && D[1] <= D[0] && s0 > 0.0) probe(ts[0], ts[1], false);
        if (n >= 2) {
            const double h1 = (ts[n] - ts[n - 1]) * 1e-6;
            const double s1 = sc.dist(ts[n]) - sc.dist(ts[n] - h1);
            if (D[n - 1] >= 0.0 && D[n] >= 0.0 && D[n - 1] >= D[n] && s1 > 0.0) probe(ts[n - 1], ts[n], true);
            if (D[n - 1] < 0.0 && D[n] < 0.0 && D[n - 1] <= D[n] && s1 < 0.0) probe(ts[n - 1], ts[n], false);
        }
    }
    std::sort(crossings.begin(), crossings.end());

    bool in = D[0] < 0.0;
    double t_in = t_begin;
    for (double c : crossings) {
        if (!in) {
            t_in = c;
        } else if (c > t_in) {
            occ.intervals.push_back({t_in, c});
        }
        in = !in;
    }
    if (in && t_end > t_in) occ.intervals.push_back({t_in, t_end});

    for (const auto& iv : occ.intervals) occ.total_time += iv.t_out - iv.t_in;
    return occ;
}

}  // namespace saddlelab
