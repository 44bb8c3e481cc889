#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "saddlelab/objective.hpp"
#include "saddlelab/types.hpp"

namespace saddlelab {

inline constexpr double kDefaultDegeneracyTol = 1e-8;

enum class CriticalKind { Minimum, Maximum, Saddle, Degenerate };

std::string_view to_string(CriticalKind kind);

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order (ties
/// keep the solver's original order). Column i of `vectors` pairs with
/// `values(i)`.
struct SymmetricSpectrum {
    Vector values;
    Matrix vectors;
};

SymmetricSpectrum symmetric_eigen(const Matrix& H);

struct CriticalPointInfo {
    Point location;
    Vector eigenvalues;  // descending
    CriticalKind classification = CriticalKind::Degenerate;
    std::optional<double> kappa;  // unset when degenerate
    double abs_min = 0.0;         // min |lambda|
    double abs_max = 0.0;         // max |lambda|
};

/// Hessian-based classification of a critical point. Throws NotCritical when
/// ||grad f(x_star)|| > tol. A spectrum is degenerate when
/// min|lambda| <= degeneracy_tol * max|lambda|.
CriticalPointInfo classify_critical_point(const ObjectiveFunction& f, const Point& x_star,
                                          double tol,
                                          double degeneracy_tol = kDefaultDegeneracyTol);

/// Classification from a Hessian alone.
CriticalPointInfo classify_spectrum(const Point& location, const Matrix& H,
                                    double degeneracy_tol = kDefaultDegeneracyTol);

/// |H| = V |Lambda| V^T for symmetric H.
Matrix matrix_abs(const Matrix& H);

/// sqrt(x^T |H| x).
double modified_distance(const Matrix& H, const Point& x);

/// Precomputed |H| and its extreme eigenvalue magnitudes, for repeated
/// modified-distance evaluations against one Hessian.
class ModifiedMetric {
public:
    explicit ModifiedMetric(const Matrix& H);

    double distance(const Point& x) const;
    const Matrix& abs_matrix() const { return abs_; }
    double abs_min() const { return abs_min_; }
    double abs_max() const { return abs_max_; }

private:
    Matrix abs_;
    double abs_min_;
    double abs_max_;
};

struct InclusionReport {
    bool pass = true;
    std::size_t checks = 0;
    std::size_t violations = 0;
    /// Largest relative excess of a conclusion over its bound among the
    /// checked implications (negative when every conclusion holds strictly).
    double worst_margin = -1.0;
};

/// Checks, for every sample x and level a in {d~(x), ||x|| sqrt(|lambda|max)},
///   ||x|| <= a / sqrt(|lambda|max)  =>  d~(x) <= a
///   d~(x) <= a                      =>  ||x|| <= a / sqrt(|lambda|min).
InclusionReport inclusion_check(const Matrix& H, std::span<const Point> samples);

}  // namespace saddlelab
