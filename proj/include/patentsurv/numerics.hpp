#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace patentsurv {

// Dense symmetric matrix, stored full for simplicity. Dimensions stay
// small (at most the covariate count of a regression), so no packing.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim, 0.0) {}

    std::size_t dim() const { return dim_; }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }

    // Writes both (i,j) and (j,i) so symmetry holds exactly.
    void set(std::size_t i, std::size_t j, double v) {
        entries_[i * dim_ + j] = v;
        entries_[j * dim_ + i] = v;
    }

    void add(std::size_t i, std::size_t j, double v) {
        entries_[i * dim_ + j] += v;
        if (i != j) entries_[j * dim_ + i] += v;
    }

    void scale(double c) {
        for (double& e : entries_) e *= c;
    }

    std::vector<double> diagonal() const;

    // a * x
    std::vector<double> multiply(const std::vector<double>& x) const;

private:
    std::size_t dim_ = 0;
    std::vector<double> entries_;
};

// Upper tail probability P(X >= x) of a chi-square variate with df
// degrees of freedom, i.e. the regularized upper incomplete gamma
// function Q(df/2, x/2). Series expansion below the a+1 crossover,
// Lentz continued fraction above. Absolute error <= 1e-10.
// Throws DomainError for x < 0 or df < 1.
double chi_square_sf(double x, int df);

// Standard normal quantile, used for confidence-band z values.
// Throws DomainError unless p is in (0,1).
double normal_quantile(double p);

// Cholesky factorization of a symmetric positive definite matrix.
// A non-positive pivot throws IdentifiabilityError; callers treat that
// as a non-identifiable model.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const SymmetricMatrix& a);

    std::size_t dim() const { return dim_; }

    // Solves a x = b for the factored a.
    std::vector<double> solve(const std::vector<double>& b) const;

    // Full inverse of a (symmetric).
    SymmetricMatrix inverse() const;

    // Diagonal of the inverse, for standard errors.
    std::vector<double> inverse_diagonal() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> lower_;  // row-major lower triangle, full storage
};

// One-shot solve of a x = b for symmetric positive definite a.
std::vector<double> solve_spd(const SymmetricMatrix& a, const std::vector<double>& b);

// Central-difference gradient (f(x+h e_i) - f(x-h e_i)) / 2h.
// A non-finite f evaluation throws EstimationError.
std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h);

}  // namespace patentsurv
