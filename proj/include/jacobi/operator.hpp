#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jacobi/errors.hpp"

namespace jacobi {

using index_t = std::int64_t;

/// Closed integer interval [lo, hi] of lattice sites. For a finite operator on
/// n1 < n < n2 this stores lo = n1 + 1 and hi = n2 - 1.
struct IndexInterval {
    index_t lo = 1;
    index_t hi = 1;

    IndexInterval() = default;
    IndexInterval(index_t first, index_t last) : lo(first), hi(last) {
        if (lo > hi) {
            throw RangeError("empty interval [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
        }
    }

    std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
    bool contains(index_t n) const { return lo <= n && n <= hi; }
    bool contains(const IndexInterval& other) const {
        return lo <= other.lo && other.hi <= hi;
    }
    std::size_t offset(index_t n) const { return static_cast<std::size_t>(n - lo); }

    friend bool operator==(const IndexInterval&, const IndexInterval&) = default;
};

inline std::string to_string(const IndexInterval& I) {
    return "[" + std::to_string(I.lo) + ", " + std::to_string(I.hi) + "]";
}

/// Canonical basis vector delta_site.
struct BasisIndex {
    index_t site = 0;
};

/// Dense sequence keyed by integer site, starting at `first()`.
template <typename T>
class SiteSequence {
public:
    SiteSequence() = default;
    SiteSequence(index_t first, std::vector<T> values)
        : first_(first), values_(std::move(values)) {}

    index_t first() const { return first_; }
    index_t last() const { return first_ + static_cast<index_t>(values_.size()) - 1; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    bool covers(index_t n) const { return n >= first_ && n <= last(); }

    const T& at(index_t n) const {
        if (!covers(n)) {
            throw RangeError("site " + std::to_string(n) + " outside sequence range [" +
                             std::to_string(first_) + ", " + std::to_string(last()) + "]");
        }
        return values_[static_cast<std::size_t>(n - first_)];
    }
    const T& operator[](index_t n) const { return values_[static_cast<std::size_t>(n - first_)]; }
    T& operator[](index_t n) { return values_[static_cast<std::size_t>(n - first_)]; }

    const std::vector<T>& values() const { return values_; }

private:
    index_t first_ = 0;
    std::vector<T> values_;
};

/// Finite Jacobi operator
///   (H xi)(n) = a(n-1) xi(n-1) + omega(n) xi(n) + a(n) xi(n+1)
/// on the sites of `interval()`, with the terms reaching outside the interval
/// dropped in the first and last rows. Immutable once built.
class JacobiOperator {
public:
    JacobiOperator(IndexInterval interval, std::vector<double> a, std::vector<double> omega)
        : interval_(interval),
          a_(interval.lo, std::move(a)),
          omega_(interval.lo, std::move(omega)) {
        if (omega_.size() != interval_.size()) {
            throw LengthMismatch("omega has " + std::to_string(omega_.size()) +
                                 " entries, interval " + to_string(interval_) + " needs " +
                                 std::to_string(interval_.size()));
        }
        if (a_.size() + 1 != interval_.size()) {
            throw LengthMismatch("a has " + std::to_string(a_.size()) +
                                 " entries, interval " + to_string(interval_) + " needs " +
                                 std::to_string(interval_.size() - 1));
        }
        for (std::size_t k = 0; k < a_.size(); ++k) {
            const double v = a_.values()[k];
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw NonPositiveOffDiagonal("a(" + std::to_string(interval_.lo + index_t(k)) +
                                             ") = " + std::to_string(v) + " is not positive");
            }
        }
        for (double w : omega_.values()) {
            if (!std::isfinite(w)) throw InvalidSpec("omega contains a non-finite value");
        }
    }

    const IndexInterval& interval() const { return interval_; }
    std::size_t size() const { return interval_.size(); }
    index_t lo() const { return interval_.lo; }
    index_t hi() const { return interval_.hi; }

    /// Off-diagonal a(n), n in [lo, hi-1].
    const SiteSequence<double>& a() const { return a_; }
    /// Diagonal potential omega(n), n in [lo, hi].
    const SiteSequence<double>& omega() const { return omega_; }

    double a(index_t n) const { return a_.at(n); }
    double omega(index_t n) const { return omega_.at(n); }

    /// Infinity-norm bound on the spectral radius.
    double norm_bound() const {
        double best = 0.0;
        const auto& w = omega_.values();
        const auto& off = a_.values();
        for (std::size_t k = 0; k < w.size(); ++k) {
            double row = std::abs(w[k]);
            if (k > 0) row += off[k - 1];
            if (k + 1 < w.size()) row += off[k];
            best = std::max(best, row);
        }
        return best;
    }

private:
    IndexInterval interval_;
    SiteSequence<double> a_;
    SiteSequence<double> omega_;
};

inline JacobiOperator build_operator(IndexInterval interval, std::vector<double> a,
                                     std::vector<double> omega) {
    return JacobiOperator(interval, std::move(a), std::move(omega));
}

/// Free operator: a = 1 everywhere, zero diagonal.
inline JacobiOperator free_operator(IndexInterval interval) {
    return JacobiOperator(interval, std::vector<double>(interval.size() - 1, 1.0),
                          std::vector<double>(interval.size(), 0.0));
}

/// H xi. Works for any scalar that can be scaled by a double (real or complex).
template <typename T>
std::vector<T> apply(const JacobiOperator& H, std::span<const T> xi) {
    const std::size_t N = H.size();
    if (xi.size() != N) {
        throw LengthMismatch("vector has " + std::to_string(xi.size()) +
                             " entries, operator has size " + std::to_string(N));
    }
    const auto& a = H.a().values();
    const auto& w = H.omega().values();
    std::vector<T> out(N);
    for (std::size_t k = 0; k < N; ++k) {
        T v = w[k] * xi[k];
        if (k > 0) v += a[k - 1] * xi[k - 1];
        if (k + 1 < N) v += a[k] * xi[k + 1];
        out[k] = v;
    }
    return out;
}

template <typename T>
std::vector<T> apply(const JacobiOperator& H, const std::vector<T>& xi) {
    return jacobi::apply(H, std::span<const T>(xi));
}

/// Restriction of H to the sites of `sub`, as a standalone operator.
inline JacobiOperator submatrix(const JacobiOperator& H, IndexInterval sub) {
    if (!H.interval().contains(sub)) {
        throw NotContained("sub-interval " + to_string(sub) + " is not contained in " +
                           to_string(H.interval()));
    }
    const auto& a = H.a().values();
    const auto& w = H.omega().values();
    const auto first = H.interval().offset(sub.lo);
    const auto n = sub.size();
    std::vector<double> sub_a(a.begin() + static_cast<std::ptrdiff_t>(first),
                              a.begin() + static_cast<std::ptrdiff_t>(first + n - 1));
    std::vector<double> sub_w(w.begin() + static_cast<std::ptrdiff_t>(first),
                              w.begin() + static_cast<std::ptrdiff_t>(first + n));
    return JacobiOperator(sub, std::move(sub_a), std::move(sub_w));
}

inline std::vector<double> basis_vector(const IndexInterval& interval, BasisIndex k) {
    if (!interval.contains(k.site)) {
        throw RangeError("site " + std::to_string(k.site) + " outside interval " +
                         to_string(interval));
    }
    std::vector<double> e(interval.size(), 0.0);
    e[interval.offset(k.site)] = 1.0;
    return e;
}

} // namespace jacobi
