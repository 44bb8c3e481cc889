#include "saddlelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "saddlelab/errors.hpp"

namespace saddlelab {

std::string_view to_string(CriticalKind kind) {
    switch (kind) {
        case CriticalKind::Minimum: return "minimum";
        case CriticalKind::Maximum: return "maximum";
        case CriticalKind::Saddle: return "saddle";
        case CriticalKind::Degenerate: return "degenerate";
    }
    return "unknown";
}

SymmetricSpectrum symmetric_eigen(const Matrix& H) {
    if (H.rows() != H.cols()) throw std::invalid_argument("matrix must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (H + H.transpose()));
    if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");

    const Vector& vals = solver.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(vals.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return vals(a) > vals(b); });

    SymmetricSpectrum out;
    out.values.resize(vals.size());
    out.vectors.resize(H.rows(), H.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out.values(k) = vals(order[i]);
        out.vectors.col(k) = solver.eigenvectors().col(order[i]);
    }
    return out;
}

CriticalPointInfo classify_spectrum(const Point& location, const Matrix& H, double degeneracy_tol) {
    const auto spec = symmetric_eigen(H);
    CriticalPointInfo info;
    info.location = location;
    info.eigenvalues = spec.values;
    info.abs_min = spec.values.cwiseAbs().minCoeff();
    info.abs_max = spec.values.cwiseAbs().maxCoeff();

    if (info.abs_max == 0.0 || info.abs_min <= degeneracy_tol * info.abs_max) {
        info.classification = CriticalKind::Degenerate;
        return info;
    }
    const bool has_pos = (spec.values.array() > 0.0).any();
    const bool has_neg = (spec.values.array() < 0.0).any();
    info.classification = has_pos && has_neg ? CriticalKind::Saddle
                          : has_pos          ? CriticalKind::Minimum
                                             : CriticalKind::Maximum;
    info.kappa = info.abs_max / info.abs_min;
    return info;
}

CriticalPointInfo classify_critical_point(const ObjectiveFunction& f, const Point& x_star,
                                          double tol, double degeneracy_tol) {
    const double g = f.gradient(x_star).norm();
    if (!(g <= tol)) throw NotCritical(g);
    return classify_spectrum(x_star, f.hessian(x_star), degeneracy_tol);
}

Matrix matrix_abs(const Matrix& H) {
    const auto spec = symmetric_eigen(H);
    Matrix out = spec.vectors * spec.values.cwiseAbs().asDiagonal() * spec.vectors.transpose();
    return 0.5 * (out + out.transpose());
}

double modified_distance(const Matrix& H, const Point& x) {
    return std::sqrt(std::max(0.0, x.dot(matrix_abs(H) * x)));
}

ModifiedMetric::ModifiedMetric(const Matrix& H) : abs_(matrix_abs(H)) {
    const auto spec = symmetric_eigen(H);
    abs_min_ = spec.values.cwiseAbs().minCoeff();
    abs_max_ = spec.values.cwiseAbs().maxCoeff();
}

double ModifiedMetric::distance(const Point& x) const {
    return std::sqrt(std::max(0.0, x.dot(abs_ * x)));
}

InclusionReport inclusion_check(const Matrix& H, std::span<const Point> samples) {
    const ModifiedMetric metric(H);
    const double smax = std::sqrt(metric.abs_max());
    const double smin = std::sqrt(metric.abs_min());
    constexpr double kSlack = 1e-10;

    InclusionReport rep;
    auto conclude = [&](double lhs, double rhs) {
        ++rep.checks;
        const double margin = (lhs - rhs) / std::max(std::abs(rhs), 1e-300);
        rep.worst_margin = std::max(rep.worst_margin, margin);
        if (lhs > rhs * (1.0 + kSlack) + 1e-300) {
            ++rep.violations;
            rep.pass = false;
        }
    };

    for (const auto& x : samples) {
        const double nx = x.norm();
        const double dt = metric.distance(x);
        for (const double a : {dt, nx * smax}) {
            if (nx <= a / smax) conclude(dt, a);
            if (dt <= a) conclude(nx, a / smin);
        }
    }
    return rep;
}

}  // namespace saddlelab
