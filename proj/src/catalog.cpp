#include "saddlelab/catalog.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace saddlelab {
namespace {

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << v[i];
    }
    return os.str();
}

Matrix diagonal(const std::vector<double>& eig) {
    Vector v(static_cast<Eigen::Index>(eig.size()));
    for (std::size_t i = 0; i < eig.size(); ++i) v(static_cast<Eigen::Index>(i)) = eig[i];
    return v.asDiagonal();
}

void require_symmetric(const Matrix& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw std::invalid_argument("matrix must be square");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("matrix must be symmetric");
}

}  // namespace

// --- QuadraticForm ---------------------------------------------------------

QuadraticForm::QuadraticForm(Matrix A) : A_(std::move(A)) {
    require_symmetric(A_);
    A_ = 0.5 * (A_ + A_.transpose());
}

double QuadraticForm::value(const Point& x) const { return 0.5 * x.dot(A_ * x); }
Vector QuadraticForm::gradient(const Point& x) const { return A_ * x; }
Matrix QuadraticForm::hessian(const Point&) const { return A_; }

std::string QuadraticForm::description() const {
    std::ostringstream os;
    os << "1/2 x^T A x, d=" << A_.rows();
    return os.str();
}

// --- CubicPerturbedQuadratic -----------------------------------------------

CubicPerturbedQuadratic::CubicPerturbedQuadratic(Matrix A, double beta)
    : A_(std::move(A)), beta_(beta) {
    require_symmetric(A_);
    if (!(beta_ >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    A_ = 0.5 * (A_ + A_.transpose());
}

double CubicPerturbedQuadratic::value(const Point& x) const {
    return 0.5 * x.dot(A_ * x) + beta_ / 6.0 * x.array().cube().sum();
}

Vector CubicPerturbedQuadratic::gradient(const Point& x) const {
    return A_ * x + (0.5 * beta_) * x.cwiseAbs2();
}

Matrix CubicPerturbedQuadratic::hessian(const Point& x) const {
    Matrix H = A_;
    H.diagonal() += beta_ * x;
    return H;
}

std::string CubicPerturbedQuadratic::description() const {
    std::ostringstream os;
    os << "1/2 x^T A x + (" << beta_ << "/6) sum x_i^3, d=" << A_.rows();
    return os.str();
}

// --- TrigMultiWell -----------------------------------------------------------

TrigMultiWell::TrigMultiWell(int dimension) : d_(dimension) {
    if (d_ <= 0) throw std::invalid_argument("dimension must be positive");
}

double TrigMultiWell::value(const Point& x) const { return -x.array().cos().sum(); }
Vector TrigMultiWell::gradient(const Point& x) const { return x.array().sin().matrix(); }
Matrix TrigMultiWell::hessian(const Point& x) const {
    return x.array().cos().matrix().asDiagonal();
}

std::string TrigMultiWell::description() const {
    return "-sum cos(x_i), d=" + std::to_string(d_);
}

// --- Catalog entries ---------------------------------------------------------

CatalogEntry make_quadratic(const Matrix& A, std::string name) {
    auto f = std::make_shared<QuadraticForm>(A);
    const auto info = classify_spectrum(Point::Zero(A.rows()), f->matrix());
    if (info.classification == CriticalKind::Degenerate)
        throw std::invalid_argument("quadratic form must be nonsingular");

    CatalogEntry e;
    e.name = name.empty() ? "quadratic" : std::move(name);
    e.function = f;
    KnownCriticalPoint origin{Point::Zero(A.rows()), info.classification};
    e.known_critical_points = {origin};
    e.critical_points_within = [origin](double radius) {
        return radius >= 0.0 ? std::vector<KnownCriticalPoint>{origin}
                             : std::vector<KnownCriticalPoint>{};
    };
    return e;
}

CatalogEntry make_diagonal_quadratic(const std::vector<double>& eigenvalues) {
    return make_quadratic(diagonal(eigenvalues), "quadratic:diag:" + join(eigenvalues));
}

CatalogEntry make_cubic_perturbed(const std::vector<double>& eigenvalues, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    const std::size_t d = eigenvalues.size();
    if (d == 0 || d > 20) throw std::invalid_argument("cubic-perturbed dimension must be in [1, 20]");
    for (double l : eigenvalues)
        if (l == 0.0) throw std::invalid_argument("eigenvalues must be nonzero");

    auto f = std::make_shared<CubicPerturbedQuadratic>(diagonal(eigenvalues), beta);

    // grad_i = lambda_i x_i + beta/2 x_i^2 vanishes at x_i = 0 or -2 lambda_i / beta,
    // where the Hessian entry is lambda_i or -lambda_i respectively.
    std::vector<KnownCriticalPoint> all;
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Point x = Point::Zero(static_cast<Eigen::Index>(d));
        Vector h(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const bool shifted = (mask >> i) & 1U;
            x(k) = shifted ? -2.0 * eigenvalues[i] / beta : 0.0;
            h(k) = shifted ? -eigenvalues[i] : eigenvalues[i];
        }
        all.push_back({x, classify_spectrum(x, Matrix(h.asDiagonal())).classification});
    }

    CatalogEntry e;
    e.name = "cubic-perturbed:" + join(eigenvalues) + ":" + join({beta});
    e.function = f;
    e.critical_points_within = [all](double radius) {
        std::vector<KnownCriticalPoint> out;
        for (const auto& c : all)
            if (c.location.norm() <= radius) out.push_back(c);
        return out;
    };
    e.known_critical_points = all;
    return e;
}

CatalogEntry make_trig_multiwell(int dimension) {
    auto f = std::make_shared<TrigMultiWell>(dimension);
    const int d = dimension;

    auto within = [d](double radius) {
        std::vector<KnownCriticalPoint> out;
        if (radius < 0.0) return out;
        const int K = static_cast<int>(std::floor(radius / std::numbers::pi));
        if (std::pow(2.0 * K + 1.0, d) > 5e6)
            throw std::invalid_argument("too many lattice critical points to enumerate");
        std::vector<int> k(static_cast<std::size_t>(d), -K);
        while (true) {
            Point x(d);
            int odd = 0;
            for (int i = 0; i < d; ++i) {
                x(i) = k[static_cast<std::size_t>(i)] * std::numbers::pi;
                odd += (k[static_cast<std::size_t>(i)] % 2 != 0);
            }
            if (x.norm() <= radius) {
                const CriticalKind kind = odd == 0   ? CriticalKind::Minimum
                                          : odd == d ? CriticalKind::Maximum
                                                     : CriticalKind::Saddle;
                out.push_back({x, kind});
            }
            int i = 0;
            for (; i < d; ++i) {
                auto& ki = k[static_cast<std::size_t>(i)];
                if (ki < K) {
                    ++ki;
                    break;
                }
                ki = -K;
            }
            if (i == d) break;
        }
        return out;
    };

    CatalogEntry e;
    e.name = "trig-multiwell:" + std::to_string(d);
    e.function = f;
    e.critical_points_within = within;
    e.known_critical_points = within(1.01 * std::numbers::pi);
    // The hyperplanes x_i = +-pi are invariant (sin vanishes there), so the
    // open cell (-pi, pi)^d is forward-invariant; inside it each |x_i| decreases.
    e.invariant_region = [](const Point& x) {
        return (x.array().abs() < std::numbers::pi).all();
    };
    return e;
}

}  // namespace saddlelab
