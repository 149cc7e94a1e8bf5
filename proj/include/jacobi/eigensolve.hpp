#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "jacobi/errors.hpp"
#include "jacobi/operator.hpp"

namespace jacobi {

/// All eigenpairs of a finite Jacobi operator. Eigenvalues ascend; eigenvector
/// j is unit length, indexed by interval offset, with its first non-negligible
/// component positive.
class EigenDecomposition {
public:
    EigenDecomposition(IndexInterval interval, std::vector<double> values,
                       std::vector<double> vectors)
        : interval_(interval), values_(std::move(values)), vectors_(std::move(vectors)) {}

    const IndexInterval& interval() const { return interval_; }
    std::size_t size() const { return values_.size(); }

    const std::vector<double>& eigenvalues() const { return values_; }
    double eigenvalue(std::size_t j) const { return values_[j]; }

    std::span<const double> eigenvector(std::size_t j) const {
        return {vectors_.data() + j * size(), size()};
    }
    /// Component of eigenvector j at lattice site n.
    double component(std::size_t j, index_t n) const {
        if (!interval_.contains(n)) {
            throw RangeError("site " + std::to_string(n) + " outside interval " +
                             to_string(interval_));
        }
        return vectors_[j * size() + interval_.offset(n)];
    }

    double spectral_radius() const {
        if (values_.empty()) return 0.0;
        return std::max(std::abs(values_.front()), std::abs(values_.back()));
    }
    double spectral_diameter() const {
        if (values_.empty()) return 0.0;
        return values_.back() - values_.front();
    }

    /// E(Delta) phi for Delta given as a predicate on eigenvalues.
    template <typename Pred>
    std::vector<double> project(Pred&& in_delta, std::span<const double> phi) const {
        std::vector<double> out(size(), 0.0);
        for (std::size_t j = 0; j < size(); ++j) {
            if (!in_delta(values_[j])) continue;
            auto v = eigenvector(j);
            const double c = std::inner_product(v.begin(), v.end(), phi.begin(), 0.0);
            for (std::size_t k = 0; k < size(); ++k) out[k] += c * v[k];
        }
        return out;
    }

private:
    IndexInterval interval_;
    std::vector<double> values_;
    std::vector<double> vectors_; // row j = eigenvector j
};

namespace detail {

inline void fix_sign(std::span<double> v) {
    constexpr double negligible = 64.0 * std::numeric_limits<double>::epsilon();
    for (double x : v) {
        if (std::abs(x) > negligible) {
            if (x < 0.0) {
                for (double& y : v) y = -y;
            }
            return;
        }
    }
}

// Modified Gram-Schmidt over rows [first, last) of a row-major vector block.
inline void reorthogonalize(std::vector<double>& Z, std::size_t n, std::size_t first,
                            std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
        double* vi = Z.data() + i * n;
        for (std::size_t j = first; j < i; ++j) {
            const double* vj = Z.data() + j * n;
            const double c = std::inner_product(vi, vi + n, vj, 0.0);
            for (std::size_t k = 0; k < n; ++k) vi[k] -= c * vj[k];
        }
        const double nrm = std::sqrt(std::inner_product(vi, vi + n, vi, 0.0));
        for (std::size_t k = 0; k < n; ++k) vi[k] /= nrm;
    }
}

/// Eigenvector for an eigenvalue approximation lambda from the twisted
/// factorization of H - lambda: the stationary top-down and bottom-up LDL^T
/// pivots meet at the index r with the smallest twist gamma_r, and the vector
/// is solved outward from z(r) = 1. Components decaying away from r come out
/// with small relative error, which QL rotations do not give for tiny entries.
inline std::vector<double> twisted_vector(const std::vector<double>& w,
                                          const std::vector<double>& a, double lambda) {
    const std::size_t n = w.size();
    double amax = 1.0;
    for (double v : a) amax = std::max(amax, v * v);
    const double pivmin = std::numeric_limits<double>::min() * amax;
    auto guard = [&](double q) { return q == 0.0 ? pivmin : q; };

    std::vector<double> top(n), bottom(n);
    top[0] = guard(w[0] - lambda);
    for (std::size_t i = 1; i < n; ++i) {
        top[i] = guard((w[i] - lambda) - a[i - 1] * a[i - 1] / top[i - 1]);
    }
    bottom[n - 1] = guard(w[n - 1] - lambda);
    for (std::size_t i = n - 1; i-- > 0;) {
        bottom[i] = guard((w[i] - lambda) - a[i] * a[i] / bottom[i + 1]);
    }
    std::size_t r = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double gamma = top[i] + bottom[i] - (w[i] - lambda);
        if (std::abs(gamma) < best) {
            best = std::abs(gamma);
            r = i;
        }
    }
    std::vector<double> z(n, 0.0);
    z[r] = 1.0;
    for (std::size_t i = r; i-- > 0;) z[i] = -(a[i] / top[i]) * z[i + 1];
    for (std::size_t i = r + 1; i < n; ++i) z[i] = -(a[i - 1] / bottom[i]) * z[i - 1];
    const double nrm = std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
    for (double& x : z) x /= nrm;
    return z;
}

/// Replaces the QL vector of each well-separated eigenvalue by its twisted
/// factorization vector. Clustered eigenvalues keep the QL vectors, whose
/// mutual orthogonality does not depend on the gap.
inline void refine_isolated(const JacobiOperator& H, const std::vector<double>& values,
                            std::vector<double>& vectors) {
    const std::size_t n = values.size();
    const double norm = std::max(std::abs(values.front()), std::abs(values.back()));
    if (n < 2 || norm == 0.0) return;
    const double min_gap = 1e-3 * norm;
    for (std::size_t j = 0; j < n; ++j) {
        const double gap = std::min(j > 0 ? values[j] - values[j - 1] : INFINITY,
                                    j + 1 < n ? values[j + 1] - values[j] : INFINITY);
        if (gap < min_gap) continue;
        auto z = twisted_vector(H.omega().values(), H.a().values(), values[j]);
        double* v = vectors.data() + j * n;
        const double dot = std::inner_product(z.begin(), z.end(), v, 0.0);
        if (std::abs(dot) < 1.0 - 1e-8) continue;
        const double sign = dot < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) v[k] = sign * z[k];
    }
}

} // namespace detail

/// Implicit-shift QL iteration on the tridiagonal matrix, accumulating the
/// rotations into the eigenvector block.
inline EigenDecomposition eigendecompose(const JacobiOperator& H) {
    const std::size_t n = H.size();
    std::vector<double> d = H.omega().values();
    std::vector<double> e(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = H.a().values()[i];

    // Z[i*n + k] is component k of vector i; starts as the identity.
    std::vector<double> Z(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) Z[i * n + i] = 1.0;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr int max_sweeps = 60;
    double shift = 0.0;
    double tst1 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n && std::abs(e[m]) > eps * tst1) ++m;
        if (m == n) m = n - 1;

        if (m > l) {
            int sweeps = 0;
            do {
                if (++sweeps > max_sweeps) {
                    throw ConvergenceFailure("QL iteration did not converge for eigenvalue " +
                                             std::to_string(l));
                }
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                shift += h;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    h = c * p;
                    r = std::hypot(p, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = p / r;
                    p = c * d[ii] - s * g;
                    d[ii + 1] = h + s * (c * g + s * d[ii]);

                    double* zi = Z.data() + ii * n;
                    double* zi1 = Z.data() + (ii + 1) * n;
                    for (std::size_t k = 0; k < n; ++k) {
                        const double t = zi1[k];
                        zi1[k] = s * zi[k] + c * t;
                        zi[k] = c * zi[k] - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += shift;
        e[l] = 0.0;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
    std::vector<double> values(n);
    std::vector<double> vectors(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        values[j] = d[order[j]];
        std::copy_n(Z.data() + order[j] * n, n, vectors.data() + j * n);
    }

    detail::refine_isolated(H, values, vectors);

    // Clusters closer than the rounding floor get an explicit
    // re-orthogonalization pass.
    const double norm = std::max(std::abs(values.front()), std::abs(values.back()));
    const double cluster_gap = 1e-14 * norm;
    for (std::size_t first = 0; first < n;) {
        std::size_t last = first + 1;
        while (last < n && values[last] - values[last - 1] <= cluster_gap) ++last;
        if (last - first > 1) detail::reorthogonalize(vectors, n, first, last);
        first = last;
    }

    for (std::size_t j = 0; j < n; ++j) {
        detail::fix_sign(std::span<double>(vectors.data() + j * n, n));
    }
    return EigenDecomposition(H.interval(), std::move(values), std::move(vectors));
}

/// Number of eigenvalues of H strictly below x (Sturm count via the pivots of
/// the LDL^T factorization of H - x).
inline std::size_t sturm_count(const JacobiOperator& H, double x) {
    const auto& w = H.omega().values();
    const auto& a = H.a().values();
    double amax = 1.0;
    for (double v : a) amax = std::max(amax, v * v);
    const double pivmin = std::numeric_limits<double>::min() * amax;

    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        q = (w[k] - x) - (k > 0 ? a[k - 1] * a[k - 1] / q : 0.0);
        if (q < 0.0) ++count;
        // A zero pivot is taken as the limit from x - 0, where it is positive.
        if (q == 0.0 && k + 1 < w.size()) q = pivmin;
    }
    return count;
}

} // namespace jacobi
