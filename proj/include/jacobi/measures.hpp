#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jacobi/eigensolve.hpp"
#include "jacobi/errors.hpp"
#include "jacobi/operator.hpp"
#include "jacobi/polynomials.hpp"

namespace jacobi {

/// Weight below which an atom counts as absent.
inline constexpr double default_tol_atom = 1e-12;
/// Atom locations match when closer than this fraction of the spectral diameter.
inline constexpr double default_match_fraction = 1e-8;

struct Tolerances {
    double atom = default_tol_atom;
    double match = 0.0; // absolute

    static Tolerances for_spectrum(double spectral_diameter) {
        Tolerances t;
        // Single-atom spectra have zero diameter; fall back to unit scale.
        t.match = default_match_fraction * (spectral_diameter > 0.0 ? spectral_diameter : 1.0);
        return t;
    }
    static Tolerances for_spectrum(const EigenDecomposition& ed) {
        return for_spectrum(ed.spectral_diameter());
    }
};

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

/// Finite atomic measure with strictly increasing atom locations. Atoms of
/// (numerically) zero weight are kept so failures can be traced to a location.
class AtomicMeasure {
public:
    AtomicMeasure() = default;
    explicit AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& x, const Atom& y) { return x.location < y.location; });
        for (const auto& at : atoms_) {
            if (at.weight < 0.0) throw InvalidSpec("negative atom weight");
        }
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    double total_mass() const {
        return std::accumulate(atoms_.begin(), atoms_.end(), 0.0,
                               [](double acc, const Atom& at) { return acc + at.weight; });
    }

    /// Mass of the atoms within `tol` of x.
    double mass_near(double x, double tol) const {
        double m = 0.0;
        for (auto it = first_from(x - tol); it != atoms_.end() && it->location <= x + tol; ++it) {
            m += it->weight;
        }
        return m;
    }

    /// Index of the atom closest to x.
    std::size_t nearest(double x) const {
        if (atoms_.empty()) throw RangeError("measure has no atoms");
        std::size_t best = 0;
        for (std::size_t j = 1; j < atoms_.size(); ++j) {
            if (std::abs(atoms_[j].location - x) < std::abs(atoms_[best].location - x)) best = j;
        }
        return best;
    }

    /// True if some atom within `tol` of x carries weight above `tol_atom`.
    bool charges(double x, const Tolerances& tol) const {
        for (auto it = first_from(x - tol.match);
             it != atoms_.end() && it->location <= x + tol.match; ++it) {
            if (it->weight > tol.atom) return true;
        }
        return false;
    }

private:
    std::vector<Atom>::const_iterator first_from(double x) const {
        return std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                [](const Atom& at, double v) { return at.location < v; });
    }

    std::vector<Atom> atoms_;
};

/// mu + nu. Atoms at identical locations are merged.
inline AtomicMeasure operator+(const AtomicMeasure& mu, const AtomicMeasure& nu) {
    std::vector<Atom> out;
    out.reserve(mu.size() + nu.size());
    auto i = mu.atoms().begin();
    auto j = nu.atoms().begin();
    while (i != mu.atoms().end() || j != nu.atoms().end()) {
        if (j == nu.atoms().end() || (i != mu.atoms().end() && i->location < j->location)) {
            out.push_back(*i++);
        } else if (i == mu.atoms().end() || j->location < i->location) {
            out.push_back(*j++);
        } else {
            out.push_back({i->location, i->weight + j->weight});
            ++i;
            ++j;
        }
    }
    return AtomicMeasure(std::move(out));
}

/// gamma(Delta) = integral over Delta of f dmu, for f >= 0.
template <typename F>
AtomicMeasure with_density(const AtomicMeasure& mu, F&& f) {
    std::vector<Atom> out;
    out.reserve(mu.size());
    for (const auto& at : mu.atoms()) {
        const double density = f(at.location);
        if (density < 0.0) throw InvalidSpec("density must be non-negative");
        out.push_back({at.location, density * at.weight});
    }
    return AtomicMeasure(std::move(out));
}

/// mu_phi: atom at each eigenvalue with weight <v_j, phi>^2.
inline AtomicMeasure spectral_measure(const EigenDecomposition& ed, std::span<const double> phi) {
    if (phi.size() != ed.size()) {
        throw LengthMismatch("vector has " + std::to_string(phi.size()) +
                             " entries, operator has size " + std::to_string(ed.size()));
    }
    if (std::all_of(phi.begin(), phi.end(), [](double x) { return x == 0.0; })) {
        throw ZeroVector("spectral measure of the zero vector");
    }
    std::vector<Atom> atoms(ed.size());
    for (std::size_t j = 0; j < ed.size(); ++j) {
        auto v = ed.eigenvector(j);
        const double c = std::inner_product(v.begin(), v.end(), phi.begin(), 0.0);
        atoms[j] = {ed.eigenvalue(j), c * c};
    }
    return AtomicMeasure(std::move(atoms));
}

/// mu_n, the spectral measure of delta_n.
inline AtomicMeasure site_measure(const EigenDecomposition& ed, BasisIndex site) {
    if (!ed.interval().contains(site.site)) {
        throw RangeError("site " + std::to_string(site.site) + " outside interval " +
                         to_string(ed.interval()));
    }
    std::vector<Atom> atoms(ed.size());
    for (std::size_t j = 0; j < ed.size(); ++j) {
        const double v = ed.component(j, site.site);
        atoms[j] = {ed.eigenvalue(j), v * v};
    }
    return AtomicMeasure(std::move(atoms));
}

inline AtomicMeasure site_measure(const EigenDecomposition& ed, index_t site) {
    return site_measure(ed, BasisIndex{site});
}

/// mu << nu: every charged atom of mu has a charged atom of nu within tol.match.
inline std::optional<Atom> first_uncovered_atom(const AtomicMeasure& mu, const AtomicMeasure& nu,
                                                const Tolerances& tol) {
    for (const auto& at : mu.atoms()) {
        if (at.weight > tol.atom && !nu.charges(at.location, tol)) return at;
    }
    return std::nullopt;
}

inline bool absolutely_continuous(const AtomicMeasure& mu, const AtomicMeasure& nu,
                                  const Tolerances& tol) {
    return !first_uncovered_atom(mu, nu, tol).has_value();
}

inline bool equivalent(const AtomicMeasure& mu, const AtomicMeasure& nu, const Tolerances& tol) {
    return absolutely_continuous(mu, nu, tol) && absolutely_continuous(nu, mu, tol);
}

/// Residuals of mu_n({lambda_j}) = s_lo(lambda_j, n)^2 mu_lo({lambda_j}) and of
/// the mirrored form with c_{hi+1} and mu_hi.
struct RelationReport {
    index_t site = 0;
    std::vector<double> s_residuals;
    std::vector<double> c_residuals;
    double max_s = 0.0;
    double max_c = 0.0;
    double max() const { return std::max(max_s, max_c); }
};

namespace detail {

// s_lo(lambda_j, n) and c_{hi+1}(lambda_j, n) at an eigenvalue. Running either
// recurrence across the whole interval amplifies the rounding of lambda_j on
// the side where the eigenvector decays. Each is run only up to the peak k of
// v_j, where it grows, and continued past k through the other one: at an
// eigenvalue both are multiples of v_j.
inline std::pair<double, double> boundary_solutions_at(const JacobiOperator& H,
                                                       const EigenDecomposition& ed,
                                                       std::size_t j, index_t n) {
    const double lambda = ed.eigenvalue(j);
    const auto v = ed.eigenvector(j);
    const auto peak = static_cast<index_t>(
        std::max_element(v.begin(), v.end(),
                         [](double x, double y) { return std::abs(x) < std::abs(y); }) -
        v.begin());
    const index_t k = H.lo() + peak;
    const index_t lo = H.lo(), hi = H.hi();
    const auto s = run_recurrence<double>(H.a(), H.omega(), lo, lambda, 0.0, 1.0, lo - 1,
                                          std::max(n, k));
    const auto c = run_recurrence<double>(H.a(), H.omega(), hi + 1, lambda, 1.0, 0.0,
                                          std::min(n, k), hi + 1);
    auto s_at = [&](index_t i) { return s[static_cast<std::size_t>(i - (lo - 1))]; };
    auto c_at = [&](index_t i) { return c[static_cast<std::size_t>(i - std::min(n, k))]; };
    if (n <= k) return {s_at(n), c_at(k) * s_at(n) / s_at(k)};
    return {s_at(k) * c_at(n) / c_at(k), c_at(n)};
}

} // namespace detail

inline RelationReport check_semiinfinite_relation(const EigenDecomposition& ed,
                                                  const JacobiOperator& H, index_t n) {
    if (!H.interval().contains(n)) {
        throw RangeError("site " + std::to_string(n) + " outside interval " +
                         to_string(H.interval()));
    }
    RelationReport rep;
    rep.site = n;
    for (std::size_t j = 0; j < ed.size(); ++j) {
        const double vn = ed.component(j, n);
        const double vlo = ed.component(j, H.lo());
        const double vhi = ed.component(j, H.hi());
        const auto [s, c] = detail::boundary_solutions_at(H, ed, j, n);
        const double rs = std::abs(vn * vn - s * s * vlo * vlo);
        const double rc = std::abs(vn * vn - c * c * vhi * vhi);
        rep.s_residuals.push_back(rs);
        rep.c_residuals.push_back(rc);
        rep.max_s = std::max(rep.max_s, rs);
        rep.max_c = std::max(rep.max_c, rc);
    }
    return rep;
}

/// One atom of the 2x2 matrix measure built from sites (m, m+1).
struct MatrixAtom {
    double location = 0.0;
    double m11 = 0.0;
    double m12 = 0.0;
    double m22 = 0.0;
    double trace() const { return m11 + m22; }
};

struct MatrixMeasure {
    index_t m = 0;
    std::vector<MatrixAtom> atoms;
};

inline MatrixMeasure matrix_measure(const EigenDecomposition& ed, index_t m) {
    if (!ed.interval().contains(m) || !ed.interval().contains(m + 1)) {
        throw RangeError("matrix measure needs sites " + std::to_string(m) + " and " +
                         std::to_string(m + 1) + " inside " + to_string(ed.interval()));
    }
    MatrixMeasure mm;
    mm.m = m;
    mm.atoms.reserve(ed.size());
    for (std::size_t j = 0; j < ed.size(); ++j) {
        const double x = ed.component(j, m);
        const double y = ed.component(j, m + 1);
        mm.atoms.push_back({ed.eigenvalue(j), x * x, x * y, y * y});
    }
    return mm;
}

/// Density of the matrix measure with respect to mu_m + mu_{m+1} at one atom:
/// [[a, b], [b, 1 - a]].
/// R = [[a, b], [b, d]] with a + d = 1. d is kept separately so that it keeps
/// full relative accuracy when a is close to 1.
struct RNMatrix {
    double location = 0.0;
    double a = 0.0;
    double b = 0.0;
    double d = 1.0;
};

inline RNMatrix rn_matrix(const MatrixAtom& atom, double tol_atom = default_tol_atom) {
    const double tr = atom.trace();
    if (!(tr > tol_atom)) {
        throw NullAtom("mu_m + mu_(m+1) has no mass at " + std::to_string(atom.location));
    }
    return {atom.location, atom.m11 / tr, atom.m12 / tr, atom.m22 / tr};
}

inline RNMatrix rn_matrix(const MatrixMeasure& mm, double location,
                          double tol_atom = default_tol_atom) {
    if (mm.atoms.empty()) throw RangeError("matrix measure has no atoms");
    const auto it = std::min_element(mm.atoms.begin(), mm.atoms.end(),
                                     [&](const MatrixAtom& x, const MatrixAtom& y) {
                                         return std::abs(x.location - location) <
                                                std::abs(y.location - location);
                                     });
    if (std::abs(it->location - location) > 1e-8 * (1.0 + std::abs(location))) {
        throw NullAtom("no atom of the matrix measure at " + std::to_string(location));
    }
    return rn_matrix(*it, tol_atom);
}

namespace detail {

// <R p, p> = (r1 c + r2 s)^2 + 2 (b - r1 r2) c s with r1 = sqrt(a), r2 = sign(b) sqrt(d).
// Atoms of a simple spectrum are rank one, and then b - r1 r2 is pure rounding;
// dropping it avoids the cancellation of a c^2 + 2 b c s + d s^2 when c and s
// grow exponentially away from m.
inline double quadratic_form(const RNMatrix& rn, double c, double s) {
    const double r1 = std::sqrt(std::max(rn.a, 0.0));
    const double r2 = std::copysign(std::sqrt(std::max(rn.d, 0.0)), rn.b);
    const double f = r1 * c + r2 * s;
    const double defect = rn.b - r1 * r2;
    if (std::abs(defect) <= 16 * std::numeric_limits<double>::epsilon() * std::abs(rn.b)) {
        return f * f;
    }
    return f * f + 2.0 * defect * c * s;
}

} // namespace detail

/// g_(m,n)(lambda) = <R_m(lambda) p, p> with p = (c_{m+1}(lambda, n), s_{m+1}(lambda, n)).
inline double g_factor(const SiteSequence<double>& a, const SiteSequence<double>& omega,
                       index_t m, index_t n, const RNMatrix& rn) {
    const double c = solution_value<double>(a, omega, Family::C, m + 1, rn.location, n);
    const double s = solution_value<double>(a, omega, Family::S, m + 1, rn.location, n);
    return detail::quadratic_form(rn, c, s);
}

inline double g_factor(const JacobiOperator& H, index_t m, index_t n, const RNMatrix& rn) {
    return g_factor(H.a(), H.omega(), m, n, rn);
}

} // namespace jacobi
