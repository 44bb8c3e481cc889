#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "saddlelab/catalog.hpp"
#include "saddlelab/errors.hpp"
#include "saddlelab/objective.hpp"
#include "saddlelab/spectral.hpp"
#include "support.hpp"

using namespace saddlelab;
using testsupport::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<CatalogEntry> catalog_samples() {
    Matrix dense(3, 3);
    dense << 2.0, 0.5, -0.3, 0.5, -1.0, 0.2, -0.3, 0.2, 0.7;
    return {make_diagonal_quadratic({1.0, -1.0}),
            make_diagonal_quadratic({2.0, -0.5, 3.0}),
            make_quadratic(dense, "dense3"),
            make_cubic_perturbed({1.0, -1.0}, 0.5),
            make_cubic_perturbed({4.0, -1.0, 2.0}, 1.3),
            make_trig_multiwell(2),
            make_trig_multiwell(4)};
}

double fd_gradient_error(const ObjectiveFunction& f, const Point& x, double h) {
    const Vector g = f.gradient(x);
    double err = 0.0;
    for (int i = 0; i < f.dimension(); ++i) {
        Point xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        err = std::max(err, std::abs((f.value(xp) - f.value(xm)) / (2 * h) - g(i)));
    }
    return err;
}

double fd_hessian_error(const ObjectiveFunction& f, const Point& x, double h) {
    const Matrix H = f.hessian(x);
    double err = 0.0;
    for (int j = 0; j < f.dimension(); ++j) {
        Point xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const Vector col = (f.gradient(xp) - f.gradient(xm)) / (2 * h);
        err = std::max(err, (col - H.col(j)).cwiseAbs().maxCoeff());
    }
    return err;
}

}  // namespace

TEST_CASE("quadratic values and derivatives") {
    const auto e = make_diagonal_quadratic({1.0, -1.0});
    Point x(2);
    x << 3.0, 2.0;
    CHECK(e.function->value(x) == doctest::Approx(0.5 * (9.0 - 4.0)));
    CHECK(e.function->gradient(x)(0) == 3.0);
    CHECK(e.function->gradient(x)(1) == -2.0);
    CHECK(e.function->third_derivative_bound().value() == 0.0);
    CHECK(e.name == "quadratic:diag:1,-1");
}

TEST_CASE("quadratic rejects asymmetric and singular matrices") {
    Matrix A(2, 2);
    A << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_AS(QuadraticForm{A}, std::invalid_argument);
    CHECK_THROWS_AS(make_diagonal_quadratic({1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("cubic-perturbed values") {
    const auto e = make_cubic_perturbed({1.0, -1.0}, 0.5);
    Point x(2);
    x << 1.0, 2.0;
    // 1/2 (1 - 4) + 0.5/6 (1 + 8)
    CHECK(e.function->value(x) == doctest::Approx(-1.5 + 0.75).epsilon(1e-15));
    CHECK(e.function->third_derivative_bound().value() == 0.5);
}

TEST_CASE("trig multiwell values") {
    const auto e = make_trig_multiwell(2);
    Point x(2);
    x << kPi / 2, 0.0;
    CHECK(e.function->value(x) == doctest::Approx(-1.0));
    CHECK(e.function->gradient(x)(0) == doctest::Approx(1.0));
    CHECK(e.function->third_derivative_bound().value() == 1.0);
}

TEST_CASE("property: derivatives agree with central differences") {
    Gen gen(11);
    for (const auto& e : catalog_samples()) {
        const auto& f = *e.function;
        for (int k = 0; k < 100; ++k) {
            const Point x = gen.point(f.dimension(), -2.0, 2.0);
            CHECK(fd_gradient_error(f, x, 1e-5) <= 1e-5);
            CHECK(fd_hessian_error(f, x, 1e-5) <= 1e-5);
            const Matrix H = f.hessian(x);
            CHECK((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("known critical points have vanishing gradient") {
    for (const auto& e : catalog_samples()) {
        REQUIRE_FALSE(e.known_critical_points.empty());
        for (const auto& c : e.known_critical_points) {
            CHECK(e.function->gradient(c.location).norm() <= 1e-10);
            CHECK(classify_spectrum(c.location, e.function->hessian(c.location)).classification == c.kind);
        }
    }
}

TEST_CASE("cubic-perturbed critical set") {
    const auto e = make_cubic_perturbed({1.0, -1.0}, 0.5);
    const auto pts = e.critical_points_within(10.0);
    REQUIRE(pts.size() == 4);
    int saddles = 0, minima = 0, maxima = 0;
    for (const auto& p : pts) {
        saddles += p.kind == CriticalKind::Saddle;
        minima += p.kind == CriticalKind::Minimum;
        maxima += p.kind == CriticalKind::Maximum;
        if (p.kind == CriticalKind::Minimum) {
            CHECK(p.location(0) == 0.0);
            CHECK(p.location(1) == doctest::Approx(4.0));
        }
        if (p.kind == CriticalKind::Maximum) {
            CHECK(p.location(0) == doctest::Approx(-4.0));
            CHECK(p.location(1) == 0.0);
        }
    }
    CHECK(saddles == 2);
    CHECK(minima == 1);
    CHECK(maxima == 1);
    CHECK(e.critical_points_within(3.0).size() == 1);
    CHECK_THROWS_AS(make_cubic_perturbed({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("trig multiwell critical lattice") {
    const auto e = make_trig_multiwell(2);
    const auto pts = e.critical_points_within(kPi * 1.01);
    CHECK(pts.size() == 5);
    CHECK(e.critical_points_within(kPi * std::sqrt(2.0) * 1.01).size() == 9);
    for (const auto& p : e.critical_points_within(4.3))
        CHECK(e.function->gradient(p.location).norm() <= 1e-10);
    Point inside(2), outside(2);
    inside << 3.0, -3.0;
    outside << 3.2, 0.0;
    CHECK(e.invariant_region(inside));
    CHECK_FALSE(e.invariant_region(outside));
}

// ---------------------------------------------------------------------------

TEST_CASE("classification examples") {
    const Point o = Point::Zero(2);
    {
        const auto info = classify_critical_point(*make_diagonal_quadratic({1.0, -1.0}).function, o, 1e-12);
        CHECK(info.classification == CriticalKind::Saddle);
        CHECK(info.eigenvalues(0) == 1.0);
        CHECK(info.eigenvalues(1) == -1.0);
        CHECK(*info.kappa == 1.0);
    }
    {
        const auto info = classify_critical_point(*make_diagonal_quadratic({1.0, 1.0}).function, o, 1e-12);
        CHECK(info.classification == CriticalKind::Minimum);
        CHECK(*info.kappa == 1.0);
    }
    {
        Point p(2);
        p << kPi, 0.0;
        const auto info = classify_critical_point(*make_trig_multiwell(2).function, p, 1e-12);
        CHECK(info.classification == CriticalKind::Saddle);
        CHECK(info.eigenvalues(0) == doctest::Approx(1.0));
        CHECK(info.eigenvalues(1) == doctest::Approx(-1.0));
        CHECK(*info.kappa == doctest::Approx(1.0));
    }
    {
        const auto info = classify_critical_point(*make_diagonal_quadratic({-2.0, -0.5}).function, o, 1e-12);
        CHECK(info.classification == CriticalKind::Maximum);
        CHECK(*info.kappa == doctest::Approx(4.0));
    }
}

TEST_CASE("classification errors and degeneracy") {
    Point x(2);
    x << 0.1, 0.0;
    CHECK_THROWS_AS(classify_critical_point(*make_diagonal_quadratic({1.0, -1.0}).function, x, 1e-8),
                    NotCritical);

    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = 1.0;
    H(1, 1) = 1e-9;
    const auto info = classify_spectrum(Point::Zero(2), H);
    CHECK(info.classification == CriticalKind::Degenerate);
    CHECK_FALSE(info.kappa.has_value());
    H(1, 1) = -1e-7;
    CHECK(classify_spectrum(Point::Zero(2), H).classification == CriticalKind::Saddle);
}

TEST_CASE("property: classification is invariant under orthogonal change of coordinates") {
    Gen gen(23);
    for (int k = 0; k < 50; ++k) {
        const int d = 2 + k % 5;
        Vector spec(d);
        for (int i = 0; i < d; ++i) {
            const double mag = gen.uniform(0.1, 10.0);
            spec(i) = gen.uniform(0.0, 1.0) < 0.5 ? -mag : mag;
        }
        const Matrix D = spec.asDiagonal();
        const Matrix Q = gen.orthogonal(d);
        const auto a = classify_spectrum(Point::Zero(d), D);
        const auto b = classify_spectrum(Point::Zero(d), Q * D * Q.transpose());
        CHECK(a.classification == b.classification);
        CHECK(std::abs(*a.kappa - *b.kappa) <= 1e-10 * *a.kappa);
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("matrix_abs examples") {
    Matrix H(2, 2);
    H << 1.0, 0.0, 0.0, -1.0;
    CHECK((matrix_abs(H) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
    H << 0.0, 2.0, 2.0, 0.0;
    CHECK((matrix_abs(H) - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("property: matrix_abs matches the Jacobi oracle and is PSD") {
    Gen gen(5);
    for (int k = 0; k < 200; ++k) {
        const int d = 1 + k % 6;
        const Matrix H = gen.symmetric(d, -3.0, 3.0);
        const auto [vals, V] = testsupport::jacobi_eigen(H);
        const Matrix oracle = V * vals.cwiseAbs().asDiagonal() * V.transpose();
        const Matrix A = matrix_abs(H);
        CHECK((A - oracle).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(symmetric_eigen(A).values.minCoeff() >= -1e-12);
    }
}

TEST_CASE("modified_distance examples") {
    Matrix H(2, 2);
    Point x(2);
    H << 1, 0, 0, -1;
    x << 3, 4;
    CHECK(modified_distance(H, x) == doctest::Approx(5.0).epsilon(1e-15));
    H << 4, 0, 0, -1;
    x << 1, 0;
    CHECK(modified_distance(H, x) == doctest::Approx(2.0).epsilon(1e-15));
    H << 0, 1, 1, 0;
    x << 1, 1;
    CHECK(modified_distance(H, x) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("property: norm sandwich for the modified distance") {
    Gen gen(9);
    for (int k = 0; k < 100; ++k) {
        const int d = 2 + k % 4;
        const Matrix H = gen.symmetric(d, -5.0, 5.0);
        const ModifiedMetric m(H);
        for (int j = 0; j < 20; ++j) {
            const Point x = gen.point(d, -3.0, 3.0);
            const double dt = m.distance(x);
            CHECK(dt >= std::sqrt(m.abs_min()) * x.norm() * (1 - 1e-12) - 1e-14);
            CHECK(dt <= std::sqrt(m.abs_max()) * x.norm() * (1 + 1e-12) + 1e-14);
            CHECK(std::abs(dt - modified_distance(H, x)) <= 1e-12 * (1 + dt));
        }
    }
}

TEST_CASE("inclusion_check examples") {
    Matrix H(2, 2);
    H << 1, 0, 0, -1;
    Gen gen(1);
    std::vector<Point> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(gen.point(2, -4, 4));
    for (const auto& x : xs) CHECK(modified_distance(H, x) == doctest::Approx(x.norm()).epsilon(1e-14));
    CHECK(inclusion_check(H, xs).pass);

    H << 4, 0, 0, -1;
    Point y(2);
    y << 0, 1;
    CHECK(modified_distance(H, y) == doctest::Approx(1.0));
    const std::vector<Point> one{y};
    const auto rep = inclusion_check(H, one);
    CHECK(rep.pass);
    CHECK(rep.checks > 0);
}

TEST_CASE("property: inclusion_check on random spectra has no violations") {
    Gen gen(77);
    for (int k = 0; k < 10; ++k) {
        const int d = 2 + k % 4;
        Vector spec(d);
        for (int i = 0; i < d; ++i) {
            const double mag = std::exp(gen.uniform(std::log(0.1), std::log(10.0)));
            spec(i) = gen.uniform(0.0, 1.0) < 0.5 ? -mag : mag;
        }
        const Matrix H = gen.with_spectrum(spec);
        std::vector<Point> xs;
        for (int i = 0; i < 1000; ++i) xs.push_back(gen.point(d, -2, 2));
        const auto rep = inclusion_check(H, xs);
        CHECK(rep.pass);
        CHECK(rep.violations == 0);
        CHECK(rep.worst_margin <= 0.0);
    }
}
