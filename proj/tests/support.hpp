#pragma once

#include <cmath>
#include <random>
#include <utility>

#include "saddlelab/types.hpp"

namespace testsupport {

using saddlelab::Matrix;
using saddlelab::Point;
using saddlelab::Vector;

// Seeded generators for property tests.
struct Gen {
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

    Point point(int d, double lo, double hi) {
        Point x(d);
        for (int i = 0; i < d; ++i) x(i) = uniform(lo, hi);
        return x;
    }

    Matrix symmetric(int d, double lo, double hi) {
        Matrix A(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = uniform(lo, hi);
        return A;
    }

    // Q diag(values) Q^T with Q from Gram-Schmidt on a random matrix.
    Matrix with_spectrum(const Vector& values) {
        const auto d = static_cast<int>(values.size());
        Matrix Q = orthogonal(d);
        return Q * values.asDiagonal() * Q.transpose();
    }

    Matrix orthogonal(int d) {
        Matrix Q(d, d);
        for (int j = 0; j < d; ++j) {
            Vector v = point(d, -1.0, 1.0);
            for (int k = 0; k < j; ++k) v -= Q.col(k).dot(v) * Q.col(k);
            Q.col(j) = v / v.norm();
        }
        return Q;
    }

    std::mt19937_64 rng;
};

// Cyclic Jacobi eigenvalue iteration. Returns (eigenvalues, eigenvectors as
// columns) in no particular order.
inline std::pair<Vector, Matrix> jacobi_eigen(Matrix A) {
    const auto n = A.rows();
    Matrix V = Matrix::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (A(p, q) == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    return {A.diagonal(), V};
}

// Classical RK4 with a fixed step, for cross-checking the adaptive
// integrator. `field` maps x to dx/dt.
template <class Field, class Visit>
void rk4(Field&& field, Point x, double dt, std::size_t steps, Visit&& visit) {
    for (std::size_t n = 0; n < steps; ++n) {
        const Vector k1 = field(x);
        const Vector k2 = field(Point(x + 0.5 * dt * k1));
        const Vector k3 = field(Point(x + 0.5 * dt * k2));
        const Vector k4 = field(Point(x + dt * k3));
        const Point next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        visit(n, x, next);
        x = next;
    }
}

}  // namespace testsupport
