#pragma once

#include <memory>
#include <optional>
#include <string>

#include "saddlelab/types.hpp"

namespace saddlelab {

/// A C^2 scalar field on R^d with analytic gradient and Hessian.
///
/// Implementations are immutable after construction; every member is pure
/// and reentrant, so one instance may be shared across worker threads.
class ObjectiveFunction {
public:
    virtual ~ObjectiveFunction() = default;

    virtual int dimension() const = 0;
    virtual double value(const Point& x) const = 0;
    virtual Vector gradient(const Point& x) const = 0;
    virtual Matrix hessian(const Point& x) const = 0;

    /// Uniform bound on |d^3 f / dx_i dx_j dx_k|, when one is known.
    virtual std::optional<double> third_derivative_bound() const { return std::nullopt; }

    virtual std::string description() const = 0;
};

using ObjectivePtr = std::shared_ptr<const ObjectiveFunction>;

/// f(x) = 1/2 x^T A x.
class QuadraticForm final : public ObjectiveFunction {
public:
    explicit QuadraticForm(Matrix A);

    int dimension() const override { return static_cast<int>(A_.rows()); }
    double value(const Point& x) const override;
    Vector gradient(const Point& x) const override;
    Matrix hessian(const Point& x) const override;
    std::optional<double> third_derivative_bound() const override { return 0.0; }
    std::string description() const override;

    const Matrix& matrix() const { return A_; }

private:
    Matrix A_;
};

/// f(x) = 1/2 x^T A x + (beta/6) sum_i x_i^3. The only nonzero third
/// derivatives are d^3f/dx_i^3 = beta, so the uniform bound is beta.
class CubicPerturbedQuadratic final : public ObjectiveFunction {
public:
    CubicPerturbedQuadratic(Matrix A, double beta);

    int dimension() const override { return static_cast<int>(A_.rows()); }
    double value(const Point& x) const override;
    Vector gradient(const Point& x) const override;
    Matrix hessian(const Point& x) const override;
    std::optional<double> third_derivative_bound() const override { return beta_; }
    std::string description() const override;

    const Matrix& matrix() const { return A_; }
    double beta() const { return beta_; }

private:
    Matrix A_;
    double beta_;
};

/// f(x) = -sum_i cos(x_i). Critical points sit on the lattice pi*Z^d; a
/// lattice point with k odd coordinates has k negative Hessian eigenvalues.
class TrigMultiWell final : public ObjectiveFunction {
public:
    explicit TrigMultiWell(int dimension);

    int dimension() const override { return d_; }
    double value(const Point& x) const override;
    Vector gradient(const Point& x) const override;
    Matrix hessian(const Point& x) const override;
    std::optional<double> third_derivative_bound() const override { return 1.0; }
    std::string description() const override;

private:
    int d_;
};

}  // namespace saddlelab
