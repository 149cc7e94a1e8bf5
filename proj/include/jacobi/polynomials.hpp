#pragma once

#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "jacobi/eigensolve.hpp"
#include "jacobi/errors.hpp"
#include "jacobi/operator.hpp"

namespace jacobi {

/// Fundamental solutions c_m(z, .) and s_m(z, .) of (tau u)(n) = z u(n):
///   c_m(z, m-1) = 1, c_m(z, m) = 0,   s_m(z, m-1) = 0, s_m(z, m) = 1.
/// For fixed n both are polynomials in z; they are only ever evaluated
/// through the recurrence, never stored as coefficients.
template <typename T>
struct SolutionPair {
    index_t base = 0;
    T z{};
    SiteSequence<T> c;
    SiteSequence<T> s;
};

enum class Family { C, S };

namespace detail {

inline double positive_coefficient(const SiteSequence<double>& a, index_t n) {
    const double v = a.at(n);
    if (!(v > 0.0)) {
        throw NonPositiveOffDiagonal("a(" + std::to_string(n) + ") = " + std::to_string(v) +
                                     " is not positive");
    }
    return v;
}

// coefficient(n) * u, without touching the coefficient when u is exactly zero.
// Lets the boundary recurrences run on sequences that stop at the operator edge.
template <typename T>
T scaled(const SiteSequence<double>& seq, index_t n, const T& u) {
    if (u == T{}) return T{};
    return seq.at(n) * u;
}

// Solution of the recurrence with u(base-1) = u0, u(base) = u1 on [first, last],
// where first <= base - 1 and last >= base.
template <typename T>
std::vector<T> run_recurrence(const SiteSequence<double>& a, const SiteSequence<double>& omega,
                              index_t base, const T& z, T u0, T u1, index_t first, index_t last) {
    std::vector<T> u(static_cast<std::size_t>(last - first + 1));
    auto at = [&](index_t n) -> T& { return u[static_cast<std::size_t>(n - first)]; };
    at(base - 1) = u0;
    at(base) = u1;
    for (index_t n = base; n < last; ++n) {
        const T next = (z * at(n) - scaled(omega, n, at(n)) - scaled(a, n - 1, at(n - 1)));
        at(n + 1) = next / positive_coefficient(a, n);
    }
    for (index_t n = base - 1; n > first; --n) {
        const T prev = (z * at(n) - scaled(omega, n, at(n)) - scaled(a, n, at(n + 1)));
        at(n - 1) = prev / positive_coefficient(a, n - 1);
    }
    return u;
}

} // namespace detail

/// c_m(z, .) and s_m(z, .) on `range`, which must meet {m-1, m}.
template <typename T>
SolutionPair<T> fundamental_solutions(const SiteSequence<double>& a,
                                      const SiteSequence<double>& omega, index_t m, T z,
                                      IndexInterval range) {
    if (range.lo > m || range.hi < m - 1) {
        throw RangeError("range " + to_string(range) + " does not reach the initial sites " +
                         std::to_string(m - 1) + ", " + std::to_string(m));
    }
    const index_t first = std::min(range.lo, m - 1);
    const index_t last = std::max(range.hi, m);
    auto c = detail::run_recurrence<T>(a, omega, m, z, T{1}, T{0}, first, last);
    auto s = detail::run_recurrence<T>(a, omega, m, z, T{0}, T{1}, first, last);

    const auto off = static_cast<std::ptrdiff_t>(range.lo - first);
    const auto len = static_cast<std::ptrdiff_t>(range.size());
    SolutionPair<T> out;
    out.base = m;
    out.z = z;
    out.c = SiteSequence<T>(range.lo, std::vector<T>(c.begin() + off, c.begin() + off + len));
    out.s = SiteSequence<T>(range.lo, std::vector<T>(s.begin() + off, s.begin() + off + len));
    return out;
}

/// Single value c_m(z, n) or s_m(z, n).
template <typename T>
T solution_value(const SiteSequence<double>& a, const SiteSequence<double>& omega, Family family,
                 index_t m, T z, index_t n) {
    const index_t first = std::min(n, m - 1);
    const index_t last = std::max(n, m);
    const T u0 = family == Family::C ? T{1} : T{0};
    const T u1 = family == Family::C ? T{0} : T{1};
    auto u = detail::run_recurrence<T>(a, omega, m, z, u0, u1, first, last);
    return u[static_cast<std::size_t>(n - first)];
}

template <typename T>
T solution_value(const JacobiOperator& H, Family family, index_t m, T z, index_t n) {
    return solution_value<T>(H.a(), H.omega(), family, m, z, n);
}

/// (tau xi)(n) = a(n-1) xi(n-1) + omega(n) xi(n) + a(n) xi(n+1).
template <typename T>
T tau(const SiteSequence<double>& a, const SiteSequence<double>& omega,
      const SiteSequence<T>& xi, index_t n) {
    return a.at(n - 1) * xi.at(n - 1) + omega.at(n) * xi.at(n) + a.at(n) * xi.at(n + 1);
}

/// W_n(xi, eta) = a(n) (xi(n) eta(n+1) - eta(n) xi(n+1)).
template <typename T>
T wronskian(const SiteSequence<double>& a, const SiteSequence<T>& xi, const SiteSequence<T>& eta,
            index_t n) {
    return a.at(n) * (xi.at(n) * eta.at(n + 1) - eta.at(n) * xi.at(n + 1));
}

/// f(H) phi = sum_j f(lambda_j) <v_j, phi> v_j.
template <typename F>
std::vector<double> apply_function(const EigenDecomposition& ed, F&& f,
                                   std::span<const double> phi) {
    const std::size_t N = ed.size();
    if (phi.size() != N) {
        throw LengthMismatch("vector has " + std::to_string(phi.size()) +
                             " entries, operator has size " + std::to_string(N));
    }
    std::vector<double> out(N, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
        auto v = ed.eigenvector(j);
        const double coef = f(ed.eigenvalue(j)) * std::inner_product(v.begin(), v.end(),
                                                                      phi.begin(), 0.0);
        for (std::size_t k = 0; k < N; ++k) out[k] += coef * v[k];
    }
    return out;
}

/// p(H) delta_source for p = c_m(., n) or s_m(., n), through the spectral
/// decomposition: sum_j p(lambda_j) v_j(source) v_j.
inline std::vector<double> evaluate_poly_at_operator(const JacobiOperator& H,
                                                     const EigenDecomposition& ed, Family family,
                                                     index_t m, index_t n, BasisIndex source) {
    const auto phi = basis_vector(H.interval(), source);
    return apply_function(
        ed, [&](double lambda) { return solution_value<double>(H, family, m, lambda, n); }, phi);
}

/// Same quantity as evaluate_poly_at_operator, computed without the
/// eigendecomposition: the recurrence is run with H itself in place of z,
/// acting on vectors.
inline std::vector<double> polynomial_action(const JacobiOperator& H, Family family, index_t m,
                                             index_t n, BasisIndex source) {
    const auto delta = basis_vector(H.interval(), source);
    const std::size_t N = H.size();
    const std::vector<double> zero(N, 0.0);
    std::vector<double> prev = family == Family::C ? delta : zero; // index m-1
    std::vector<double> cur = family == Family::C ? zero : delta;  // index m
    if (n == m - 1) return prev;
    if (n == m) return cur;

    auto is_zero = [](const std::vector<double>& v) {
        for (double x : v)
            if (x != 0.0) return false;
        return true;
    };
    const auto& a = H.a();
    const auto& w = H.omega();
    if (n > m) {
        for (index_t k = m; k < n; ++k) {
            auto next = jacobi::apply(H, cur);
            if (!is_zero(cur)) {
                for (std::size_t i = 0; i < N; ++i) next[i] -= w.at(k) * cur[i];
            }
            if (!is_zero(prev)) {
                for (std::size_t i = 0; i < N; ++i) next[i] -= a.at(k - 1) * prev[i];
            }
            const double ak = detail::positive_coefficient(a, k);
            for (double& x : next) x /= ak;
            prev = std::move(cur);
            cur = std::move(next);
        }
        return cur;
    }
    // Backward: walk from (m-1, m) down to n.
    std::vector<double> upper = std::move(cur); // index k+1
    std::vector<double> here = std::move(prev); // index k
    for (index_t k = m - 1; k > n; --k) {
        auto next = jacobi::apply(H, here);
        if (!is_zero(here)) {
            for (std::size_t i = 0; i < N; ++i) next[i] -= w.at(k) * here[i];
        }
        if (!is_zero(upper)) {
            for (std::size_t i = 0; i < N; ++i) next[i] -= a.at(k) * upper[i];
        }
        const double ak = detail::positive_coefficient(a, k - 1);
        for (double& x : next) x /= ak;
        upper = std::move(here);
        here = std::move(next);
    }
    return here;
}

/// Which representation of delta_n through polynomials in H to use.
enum class Expansion {
    FromLower, // s_lo(H, n) delta_lo
    FromUpper, // c_{hi+1}(H, n) delta_hi
    FromPair,  // s_{m+1}(H, n) delta_{m+1} + c_{m+1}(H, n) delta_m
};

/// Right-hand side of the polynomial expansion of delta_n. The result equals
/// delta_n up to rounding; `m` is only read for FromPair and needs m, m+1 in
/// the interval.
inline std::vector<double> expand_basis_vector(const JacobiOperator& H,
                                               const EigenDecomposition& ed, Expansion kind,
                                               index_t n, index_t m = 0) {
    if (!H.interval().contains(n)) {
        throw RangeError("site " + std::to_string(n) + " outside interval " +
                         to_string(H.interval()));
    }
    switch (kind) {
    case Expansion::FromLower:
        return evaluate_poly_at_operator(H, ed, Family::S, H.lo(), n, {H.lo()});
    case Expansion::FromUpper:
        return evaluate_poly_at_operator(H, ed, Family::C, H.hi() + 1, n, {H.hi()});
    case Expansion::FromPair: {
        if (!H.interval().contains(m) || !H.interval().contains(m + 1)) {
            throw RangeError("pair (" + std::to_string(m) + ", " + std::to_string(m + 1) +
                             ") not inside " + to_string(H.interval()));
        }
        auto out = evaluate_poly_at_operator(H, ed, Family::S, m + 1, n, {m + 1});
        const auto c_part = evaluate_poly_at_operator(H, ed, Family::C, m + 1, n, {m});
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c_part[i];
        return out;
    }
    }
    return {};
}

/// Zeros of z -> s_m(z, n), n >= m + 1: the eigenvalues of the Jacobi block on
/// sites m..n-1.
inline std::vector<double> s_polynomial_zeros(const SiteSequence<double>& a,
                                              const SiteSequence<double>& omega, index_t m,
                                              index_t n) {
    if (n < m + 1) {
        throw RangeError("s_" + std::to_string(m) + "(z, " + std::to_string(n) +
                         ") has no zeros: need n >= m + 1");
    }
    std::vector<double> block_a;
    std::vector<double> block_w;
    for (index_t k = m; k < n; ++k) {
        block_w.push_back(omega.at(k));
        if (k + 1 < n) block_a.push_back(detail::positive_coefficient(a, k));
    }
    JacobiOperator block(IndexInterval(m, n - 1), std::move(block_a), std::move(block_w));
    return eigendecompose(block).eigenvalues();
}

inline std::vector<double> s_polynomial_zeros(const JacobiOperator& H, index_t m, index_t n) {
    return s_polynomial_zeros(H.a(), H.omega(), m, n);
}

} // namespace jacobi
