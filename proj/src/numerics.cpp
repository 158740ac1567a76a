#include "patentsurv/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "patentsurv/errors.hpp"

namespace patentsurv {

std::vector<double> SymmetricMatrix::diagonal() const {
    std::vector<double> d(dim_);
    for (std::size_t i = 0; i < dim_; ++i) d[i] = (*this)(i, i);
    return d;
}

std::vector<double> SymmetricMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

namespace {

constexpr int kMaxIter = 1000;
const double kEps = std::numeric_limits<double>::epsilon();
const double kFpMin = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();

// Regularized lower incomplete gamma P(a,x) by its power series; valid
// and fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw DomainError("incomplete gamma series failed to converge");
}

// Regularized upper incomplete gamma Q(a,x) by modified Lentz continued
// fraction; valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= kEps)
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
    throw DomainError("incomplete gamma continued fraction failed to converge");
}

}  // namespace

double chi_square_sf(double x, int df) {
    if (df < 1) throw DomainError("chi_square_sf: df must be >= 1, got " + std::to_string(df));
    if (!(x >= 0.0)) throw DomainError("chi_square_sf: x must be >= 0");
    if (x == 0.0) return 1.0;
    double a = 0.5 * df;
    double xs = 0.5 * x;
    if (xs < a + 1.0) return 1.0 - gamma_p_series(a, xs);
    return gamma_q_cf(a, xs);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must be in (0,1)");
    // Bisection on Phi(z) = 0.5 * erfc(-z/sqrt(2)); plenty accurate for
    // band construction and has no tuning constants.
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
        if (cdf < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

CholeskyFactor::CholeskyFactor(const SymmetricMatrix& a) : dim_(a.dim()), lower_(dim_ * dim_, 0.0) {
    // Unpivoted Cholesky: a = L L^T. Failure of a pivot is the caller's
    // signal that the matrix is not positive definite.
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= lower_[i * dim_ + k] * lower_[j * dim_ + k];
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s))
                    throw IdentifiabilityError("matrix not positive definite (pivot " +
                                               std::to_string(i) + ")");
                lower_[i * dim_ + i] = std::sqrt(s);
            } else {
                lower_[i * dim_ + j] = s / lower_[j * dim_ + j];
            }
        }
    }
}

std::vector<double> CholeskyFactor::solve(const std::vector<double>& b) const {
    std::vector<double> y(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= lower_[i * dim_ + k] * y[k];
        y[i] = s / lower_[i * dim_ + i];
    }
    for (std::size_t ii = dim_; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < dim_; ++k) s -= lower_[k * dim_ + ii] * y[k];
        y[ii] = s / lower_[ii * dim_ + ii];
    }
    return y;
}

SymmetricMatrix CholeskyFactor::inverse() const {
    SymmetricMatrix inv(dim_);
    std::vector<double> e(dim_, 0.0);
    for (std::size_t j = 0; j < dim_; ++j) {
        e[j] = 1.0;
        std::vector<double> col = solve(e);
        e[j] = 0.0;
        for (std::size_t i = 0; i <= j; ++i) inv.set(i, j, col[i]);
    }
    return inv;
}

std::vector<double> CholeskyFactor::inverse_diagonal() const {
    return inverse().diagonal();
}

std::vector<double> solve_spd(const SymmetricMatrix& a, const std::vector<double>& b) {
    return CholeskyFactor(a).solve(b);
}

std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
    if (!(h > 0.0)) throw DomainError("finite_diff_gradient: h must be > 0");
    std::vector<double> g(x.size());
    std::vector<double> xs = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xs[i] = x[i] + h;
        double fp = f(xs);
        xs[i] = x[i] - h;
        double fm = f(xs);
        xs[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw EstimationError("finite_diff_gradient: non-finite function value");
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace patentsurv
