#pragma once

#include <functional>
#include <string>
#include <vector>

#include "saddlelab/objective.hpp"
#include "saddlelab/spectral.hpp"

namespace saddlelab {

struct KnownCriticalPoint {
    Point location;
    CriticalKind kind;
};

/// A named test function together with what is known about its critical set.
struct CatalogEntry {
    std::string name;
    ObjectivePtr function;

    /// Critical points within the entry's default radius of the origin.
    std::vector<KnownCriticalPoint> known_critical_points;

    /// All critical points with ||x|| <= radius.
    std::function<std::vector<KnownCriticalPoint>(double radius)> critical_points_within;

    /// Membership test for a forward-invariant region of the NGD flow around
    /// the origin, when one is known (empty otherwise).
    std::function<bool(const Point&)> invariant_region;
};

/// f = 1/2 x^T A x for symmetric nonsingular A.
CatalogEntry make_quadratic(const Matrix& A, std::string name = {});
CatalogEntry make_diagonal_quadratic(const std::vector<double>& eigenvalues);

/// f = 1/2 x^T diag(lambda) x + (beta/6) sum x_i^3 with beta > 0. Its 2^d
/// critical points have coordinates x_i in {0, -2 lambda_i / beta}.
CatalogEntry make_cubic_perturbed(const std::vector<double>& eigenvalues, double beta);

/// f = -sum cos(x_i) in dimension d.
CatalogEntry make_trig_multiwell(int dimension);

}  // namespace saddlelab
