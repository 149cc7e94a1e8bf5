#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "jacobi/eigensolve.hpp"
#include "jacobi/errors.hpp"
#include "jacobi/measures.hpp"
#include "jacobi/operator.hpp"
#include "jacobi/polynomials.hpp"
#include "jacobi/randomness.hpp"

// Seeded Monte Carlo harnesses. "Almost surely" is read as: no failure over
// the configured trials, with the raw gap/weight statistics reported so that
// near misses stay visible.

namespace jacobi {

enum class ExperimentKind {
    Collision,
    Equivalence,
    SumEquivalence,
    AtomProbability,
    Counterexample,
    Carleman,
};

inline std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::Collision: return "collision";
    case ExperimentKind::Equivalence: return "equivalence";
    case ExperimentKind::SumEquivalence: return "sum_equivalence";
    case ExperimentKind::AtomProbability: return "atom_probability";
    case ExperimentKind::Counterexample: return "counterexample";
    case ExperimentKind::Carleman: return "carleman";
    }
    return "unknown";
}

inline ExperimentKind parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::Collision, ExperimentKind::Equivalence,
                   ExperimentKind::SumEquivalence, ExperimentKind::AtomProbability,
                   ExperimentKind::Counterexample, ExperimentKind::Carleman}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown experiment kind '" + s + "'");
}

/// Rule that produces the target set r_k(omega) of one trial.
struct TargetSelector {
    enum class Rule { Fixed, SZeros, Submatrix };
    Rule rule = Rule::Fixed;
    std::vector<double> values;   // Fixed
    index_t n = 0;                // SZeros: zeros of s_lo(., n)
    std::optional<IndexInterval> sub; // Submatrix
};

/// Off-diagonal sequence used for the Carleman partial sums.
///   constant(c):  a(n) = c
///   power(p):     a(n) = (n + 1)^p for n >= 0, a(n) = 1 for n < 0
///   geometric(r): a(n) = r^|n|
///   explicit:     a(first + k) = values[k]
struct CarlemanRule {
    enum class Kind { Constant, Power, Geometric, Explicit };
    Kind kind = Kind::Constant;
    double param = 1.0;
    index_t first = 0;
    std::vector<double> values;

    double a(index_t n) const {
        double v = 0.0;
        switch (kind) {
        case Kind::Constant: v = param; break;
        case Kind::Power: v = n >= 0 ? std::pow(double(n + 1), param) : 1.0; break;
        case Kind::Geometric: v = std::pow(param, double(n < 0 ? -n : n)); break;
        case Kind::Explicit: {
            const auto k = n - first;
            if (k < 0 || k >= index_t(values.size())) {
                throw CoverageError("explicit sequence does not cover a(" + std::to_string(n) +
                                    ")");
            }
            v = values[std::size_t(k)];
            break;
        }
        }
        if (!(v > 0.0)) {
            throw NonPositiveOffDiagonal("a(" + std::to_string(n) + ") = " + std::to_string(v) +
                                         " is not positive");
        }
        return v;
    }
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Collision;
    index_t N = 3;
    std::optional<index_t> lo;
    double hopping = 1.0;

    std::optional<IndexInterval> sub;
    std::vector<index_t> exclude;
    std::vector<index_t> sites;
    std::vector<std::pair<index_t, index_t>> pairs;
    std::vector<std::array<index_t, 4>> quads;
    TargetSelector target;
    CarlemanRule a_rule;

    PotentialModel distribution;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    double eps_collision = 1e-9;
    std::optional<double> tol_atom;
    std::optional<double> tol_match;

    /// Sites of the operator. sum_equivalence truncates Z symmetrically to
    /// -N..N unless lo is given; the other kinds use lo..lo+N-1 with lo = 1.
    IndexInterval interval() const {
        if (kind == ExperimentKind::SumEquivalence && !lo) return {-N, N};
        const index_t first = lo.value_or(1);
        return {first, first + N - 1};
    }

    Tolerances tolerances(const EigenDecomposition& ed) const {
        Tolerances t = Tolerances::for_spectrum(ed);
        if (tol_atom) t.atom = *tol_atom;
        if (tol_match) t.match = *tol_match;
        return t;
    }

    void validate() const;
};

struct Quantiles {
    double q0 = 0.0;
    double q50 = 0.0;
    double q100 = 0.0;
};

/// One failed check, with enough information to replay the trial.
struct TrialFailure {
    std::uint64_t trial = 0;
    std::uint64_t trial_seed = 0;
    std::string what;
    double location = 0.0;
    double value = 0.0;
};

struct Assertion {
    std::string name;
    double expected = 0.0;
    double observed = 0.0;
    bool pass = false;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::uint64_t checks = 0;
    std::uint64_t collisions = 0;
    std::optional<Quantiles> min_gap_quantiles;
    std::map<int, std::uint64_t> min_gap_histogram; // floor(log10(gap)) -> count
    double success_fraction = 1.0;
    double max_residual = 0.0;
    std::optional<double> positive_fraction;
    std::optional<double> max_measure;
    std::vector<TrialFailure> failures;
    std::vector<Assertion> assertions;
    std::vector<double> partial_sums;
    std::int64_t elapsed_ms = 0;

    bool all_passed() const {
        for (const auto& a : assertions)
            if (!a.pass) return false;
        return failures.empty();
    }
};

struct ExecutionOptions {
    unsigned threads = 0; // 0: hardware concurrency
};

namespace detail {

/// Runs f(trial) for every trial and returns the results in trial order.
template <typename F>
auto run_trials(std::uint64_t trials, const ExecutionOptions& opts, F&& f) {
    using R = decltype(f(std::uint64_t{0}));
    std::vector<R> out(trials);
    unsigned workers = opts.threads ? opts.threads : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, unsigned(std::max<std::uint64_t>(1, trials))));
    if (workers == 1) {
        for (std::uint64_t t = 0; t < trials; ++t) out[t] = f(t);
        return out;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            (void)w;
            for (std::uint64_t t; (t = next.fetch_add(1)) < trials && !failed;) {
                try {
                    out[t] = f(t);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

inline JacobiOperator sample_operator(const ExperimentConfig& cfg, std::uint64_t trial) {
    auto sampler = SeededSampler::derive(cfg.seed, trial);
    const auto I = cfg.interval();
    auto omega = sample_potential(cfg.distribution, I, sampler);
    return JacobiOperator(I, std::vector<double>(I.size() - 1, cfg.hopping), std::move(omega));
}

inline Quantiles quantiles(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return {v.front(), v[(v.size() - 1) / 2], v.back()};
}

/// Largest ||H v_j - lambda_j v_j|| / ||H||.
inline double eigen_residual(const JacobiOperator& H, const EigenDecomposition& ed) {
    const double scale = std::max(ed.spectral_radius(), std::numeric_limits<double>::min());
    double worst = 0.0;
    for (std::size_t j = 0; j < ed.size(); ++j) {
        auto v = ed.eigenvector(j);
        auto Hv = jacobi::apply(H, v);
        double r = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double d = Hv[k] - ed.eigenvalue(j) * v[k];
            r += d * d;
        }
        worst = std::max(worst, std::sqrt(r) / scale);
    }
    return worst;
}

/// Smallest |x - y| over x in xs, y in ys (both sorted).
inline double min_distance(const std::vector<double>& xs, const std::vector<double>& ys) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = 0;
    for (double x : xs) {
        while (j + 1 < ys.size() && ys[j + 1] <= x) ++j;
        best = std::min(best, std::abs(x - ys[j]));
        if (j + 1 < ys.size()) best = std::min(best, std::abs(x - ys[j + 1]));
    }
    return best;
}

/// Maximal runs of the interval that avoid every excluded site.
inline std::vector<IndexInterval> complement_blocks(const IndexInterval& I,
                                                    const std::vector<index_t>& exclude) {
    std::vector<IndexInterval> blocks;
    index_t start = I.lo;
    for (index_t n = I.lo; n <= I.hi + 1; ++n) {
        const bool cut =
            n > I.hi || std::find(exclude.begin(), exclude.end(), n) != exclude.end();
        if (cut) {
            if (start < n) blocks.emplace_back(start, n - 1);
            start = n + 1;
        }
    }
    return blocks;
}

inline std::vector<IndexInterval> deleted_blocks(const ExperimentConfig& cfg) {
    if (!cfg.exclude.empty()) return complement_blocks(cfg.interval(), cfg.exclude);
    return {*cfg.sub};
}

/// True when the interval minus the sites of `kept` still holds two adjacent
/// sites, i.e. the kept part is independent of omega at some (n0, n0 + 1).
inline bool leaves_adjacent_pair(const IndexInterval& I, const std::vector<IndexInterval>& kept) {
    auto is_kept = [&](index_t n) {
        for (const auto& b : kept)
            if (b.contains(n)) return true;
        return false;
    };
    for (index_t n = I.lo; n < I.hi; ++n) {
        if (!is_kept(n) && !is_kept(n + 1)) return true;
    }
    return false;
}

} // namespace detail

inline void ExperimentConfig::validate() const {
    if (kind == ExperimentKind::Carleman) {
        if (N < 1) throw ConfigError("carleman needs N >= 1");
        return;
    }
    if (kind == ExperimentKind::Counterexample) {
        if (N < 3 || N % 2 == 0) throw ConfigError("counterexample needs an odd size N >= 3");
        return;
    }
    if (N < 3) throw ConfigError("N must be at least 3 (got " + std::to_string(N) + ")");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (!(hopping > 0.0)) throw NonPositiveOffDiagonal("hopping a must be positive");
    if (!(eps_collision > 0.0)) throw ConfigError("eps_collision must be positive");
    if (tol_atom && !(*tol_atom >= 0.0)) throw ConfigError("tol_atom must be non-negative");
    if (tol_match && !(*tol_match >= 0.0)) throw ConfigError("tol_match must be non-negative");
    const auto I = interval();
    distribution.check_covers(I);

    auto need_site = [&](index_t n) {
        if (!I.contains(n)) {
            throw ConfigError("site " + std::to_string(n) + " outside interval " + to_string(I));
        }
    };
    switch (kind) {
    case ExperimentKind::Collision: {
        if (exclude.empty() && !sub) throw ConfigError("collision needs sub_lo/sub_hi or exclude");
        for (index_t n : exclude) need_site(n);
        if (sub) {
            if (!I.contains(*sub)) throw ConfigError("submatrix " + to_string(*sub) + " not inside " + to_string(I));
            if (*sub == I) throw ConfigError("submatrix must be a proper sub-interval");
        }
        if (detail::deleted_blocks(*this).empty()) throw ConfigError("submatrix is empty");
        break;
    }
    case ExperimentKind::Equivalence:
        for (auto [n, m] : pairs) {
            need_site(n);
            need_site(m);
        }
        break;
    case ExperimentKind::SumEquivalence:
        if (quads.empty()) throw ConfigError("sum_equivalence needs quads");
        for (const auto& q : quads)
            for (index_t n : q) need_site(n);
        break;
    case ExperimentKind::AtomProbability: {
        for (index_t n : sites) need_site(n);
        using Rule = TargetSelector::Rule;
        if (target.rule == Rule::SZeros) {
            // zeros of s_lo(., n) depend on omega(lo..n-1) only; (n, n+1) must exist.
            if (target.n < I.lo + 1 || target.n + 1 > I.hi) {
                throw ConfigError("s_zeros target needs lo < n < hi");
            }
        } else if (target.rule == Rule::Submatrix) {
            if (!target.sub || !I.contains(*target.sub)) throw ConfigError("target submatrix not inside interval");
            if (!detail::leaves_adjacent_pair(I, {*target.sub})) {
                throw ConfigError("target submatrix must leave two adjacent sites outside it");
            }
        }
        break;
    }
    default: break;
    }
}

/// Gap between the spectrum of H and that of the submatrix blocks, per trial.
inline ExperimentReport run_collision(const ExperimentConfig& cfg, const ExecutionOptions& opts = {}) {
    cfg.validate();
    const auto blocks = detail::deleted_blocks(cfg);
    struct Trial {
        double gap = 0.0;
        double residual = 0.0;
    };
    auto results = detail::run_trials(cfg.trials, opts, [&](std::uint64_t t) {
        const auto H = detail::sample_operator(cfg, t);
        const auto ed = eigendecompose(H);
        std::vector<double> sub_values;
        for (const auto& b : blocks) {
            const auto vals = eigendecompose(submatrix(H, b)).eigenvalues();
            sub_values.insert(sub_values.end(), vals.begin(), vals.end());
        }
        std::sort(sub_values.begin(), sub_values.end());
        return Trial{detail::min_distance(ed.eigenvalues(), sub_values),
                     detail::eigen_residual(H, ed)};
    });

    ExperimentReport rep;
    rep.config = cfg;
    std::vector<double> gaps;
    gaps.reserve(results.size());
    for (std::uint64_t t = 0; t < results.size(); ++t) {
        const auto& r = results[t];
        gaps.push_back(r.gap);
        rep.max_residual = std::max(rep.max_residual, r.residual);
        const int decade = r.gap > 0.0 ? int(std::floor(std::log10(r.gap))) : -400;
        ++rep.min_gap_histogram[decade];
        if (r.gap < cfg.eps_collision) {
            ++rep.collisions;
            rep.failures.push_back({t, SeededSampler::stream_seed(cfg.seed, t),
                                    "eigenvalue of H within eps_collision of the submatrix spectrum",
                                    0.0, r.gap});
        }
    }
    rep.checks = cfg.trials;
    rep.min_gap_quantiles = detail::quantiles(gaps);
    rep.success_fraction = 1.0 - double(rep.collisions) / double(cfg.trials);
    return rep;
}

/// Target set of one trial.
inline std::vector<double> select_targets(const TargetSelector& sel, const JacobiOperator& H) {
    switch (sel.rule) {
    case TargetSelector::Rule::Fixed: return sel.values;
    case TargetSelector::Rule::SZeros: return s_polynomial_zeros(H, H.lo(), sel.n);
    case TargetSelector::Rule::Submatrix: return eigendecompose(submatrix(H, *sel.sub)).eigenvalues();
    }
    return {};
}

/// mu_phi of a target set: weights of the atoms within tol.match of any target.
inline double measure_of_targets(const AtomicMeasure& mu, const std::vector<double>& targets,
                                 const Tolerances& tol) {
    double total = 0.0;
    for (const auto& at : mu.atoms()) {
        for (double r : targets) {
            if (std::abs(at.location - r) <= tol.match) {
                total += at.weight;
                break;
            }
        }
    }
    return total;
}

inline ExperimentReport run_atom_probability(const ExperimentConfig& cfg,
                                             const ExecutionOptions& opts = {}) {
    cfg.validate();
    const index_t phi_site = cfg.sites.empty() ? cfg.interval().lo : cfg.sites.front();
    auto values = detail::run_trials(cfg.trials, opts, [&](std::uint64_t t) {
        const auto H = detail::sample_operator(cfg, t);
        const auto ed = eigendecompose(H);
        const auto mu = site_measure(ed, phi_site);
        return measure_of_targets(mu, select_targets(cfg.target, H), cfg.tolerances(ed));
    });

    ExperimentReport rep;
    rep.config = cfg;
    rep.checks = cfg.trials;
    const double tol_atom = cfg.tol_atom.value_or(default_tol_atom);
    std::uint64_t positive = 0;
    double worst = 0.0;
    for (std::uint64_t t = 0; t < values.size(); ++t) {
        worst = std::max(worst, values[t]);
        if (values[t] > tol_atom) {
            ++positive;
            rep.failures.push_back({t, SeededSampler::stream_seed(cfg.seed, t),
                                    "mu_phi charges the target set", 0.0, values[t]});
        }
    }
    rep.positive_fraction = double(positive) / double(cfg.trials);
    rep.success_fraction = 1.0 - *rep.positive_fraction;
    rep.max_measure = worst;
    rep.max_residual = worst;
    return rep;
}

/// Outcome of the pairwise equivalence checks on one operator.
struct EquivalenceOutcome {
    std::uint64_t checks = 0;
    std::vector<TrialFailure> failures;
    double max_residual = 0.0;
};

inline EquivalenceOutcome check_pairwise_equivalence(
    const JacobiOperator& H, const std::vector<std::pair<index_t, index_t>>& pairs,
    const std::optional<Tolerances>& tol_override = std::nullopt) {
    const auto ed = eigendecompose(H);
    const auto tol = tol_override.value_or(Tolerances::for_spectrum(ed));
    std::vector<AtomicMeasure> mu;
    for (index_t n = H.lo(); n <= H.hi(); ++n) mu.push_back(site_measure(ed, n));
    auto at = [&](index_t n) -> const AtomicMeasure& { return mu[H.interval().offset(n)]; };

    EquivalenceOutcome out;
    for (auto [n, m] : pairs) {
        ++out.checks;
        auto miss = first_uncovered_atom(at(n), at(m), tol);
        if (!miss) miss = first_uncovered_atom(at(m), at(n), tol);
        if (miss) {
            out.failures.push_back({0, 0,
                                    "mu_" + std::to_string(n) + " !~ mu_" + std::to_string(m),
                                    miss->location, miss->weight});
        }
    }
    for (index_t n = H.lo(); n <= H.hi(); ++n) {
        out.max_residual = std::max(out.max_residual, check_semiinfinite_relation(ed, H, n).max());
    }
    return out;
}

inline std::vector<std::pair<index_t, index_t>> all_pairs(const IndexInterval& I) {
    std::vector<std::pair<index_t, index_t>> out;
    for (index_t n = I.lo; n <= I.hi; ++n)
        for (index_t m = n + 1; m <= I.hi; ++m) out.emplace_back(n, m);
    return out;
}

namespace detail {

inline void fold_outcomes(ExperimentReport& rep, const ExperimentConfig& cfg,
                          std::vector<EquivalenceOutcome>& outcomes) {
    std::uint64_t failed = 0;
    for (std::uint64_t t = 0; t < outcomes.size(); ++t) {
        auto& o = outcomes[t];
        rep.checks += o.checks;
        failed += o.failures.size();
        rep.max_residual = std::max(rep.max_residual, o.max_residual);
        for (auto& f : o.failures) {
            f.trial = t;
            f.trial_seed = SeededSampler::stream_seed(cfg.seed, t);
            rep.failures.push_back(std::move(f));
        }
    }
    rep.success_fraction = rep.checks ? 1.0 - double(failed) / double(rep.checks) : 1.0;
}

inline std::optional<Tolerances> explicit_tolerances(const ExperimentConfig& cfg,
                                                     const EigenDecomposition& ed) {
    if (!cfg.tol_atom && !cfg.tol_match) return std::nullopt;
    return cfg.tolerances(ed);
}

} // namespace detail

inline ExperimentReport run_equivalence(const ExperimentConfig& cfg,
                                        const ExecutionOptions& opts = {}) {
    cfg.validate();
    const auto pairs = cfg.pairs.empty() ? all_pairs(cfg.interval()) : cfg.pairs;
    auto outcomes = detail::run_trials(cfg.trials, opts, [&](std::uint64_t t) {
        const auto H = detail::sample_operator(cfg, t);
        std::optional<Tolerances> tol;
        if (cfg.tol_atom || cfg.tol_match) tol = detail::explicit_tolerances(cfg, eigendecompose(H));
        return check_pairwise_equivalence(H, pairs, tol);
    });
    ExperimentReport rep;
    rep.config = cfg;
    detail::fold_outcomes(rep, cfg, outcomes);
    return rep;
}

/// Largest |mu_t({lambda}) - g_(b,t)(lambda) (mu_b + mu_{b+1})({lambda})| over
/// the atoms where the density matrix is defined.
inline double g_identity_residual(const JacobiOperator& H, const EigenDecomposition& ed,
                                  index_t b, index_t t, double tol_atom = default_tol_atom) {
    const auto mm = matrix_measure(ed, b);
    double worst = 0.0;
    for (std::size_t j = 0; j < ed.size(); ++j) {
        const auto& atom = mm.atoms[j];
        const double vt = ed.component(j, t);
        if (atom.trace() <= tol_atom) {
            worst = std::max(worst, vt * vt > tol_atom ? vt * vt : 0.0);
            continue;
        }
        const double g = g_factor(H, b, t, rn_matrix(atom, tol_atom));
        worst = std::max(worst, std::abs(vt * vt - g * atom.trace()));
    }
    return worst;
}

inline EquivalenceOutcome check_sum_equivalence(
    const JacobiOperator& H, const std::vector<std::array<index_t, 4>>& quads,
    const std::optional<Tolerances>& tol_override = std::nullopt) {
    const auto ed = eigendecompose(H);
    const auto tol = tol_override.value_or(Tolerances::for_spectrum(ed));
    EquivalenceOutcome out;
    for (const auto& q : quads) {
        const auto [k, l, m, n] = q;
        ++out.checks;
        const auto lhs = site_measure(ed, k) + site_measure(ed, l);
        const auto rhs = site_measure(ed, m) + site_measure(ed, n);
        auto miss = first_uncovered_atom(lhs, rhs, tol);
        if (!miss) miss = first_uncovered_atom(rhs, lhs, tol);
        if (miss) {
            out.failures.push_back({0, 0,
                                    "mu_" + std::to_string(k) + " + mu_" + std::to_string(l) +
                                        " !~ mu_" + std::to_string(m) + " + mu_" +
                                        std::to_string(n),
                                    miss->location, miss->weight});
        }
        for (index_t base : {k, m}) {
            const index_t b = base < H.hi() ? base : base - 1;
            for (index_t t : q) {
                out.max_residual = std::max(out.max_residual, g_identity_residual(H, ed, b, t, tol.atom));
            }
        }
    }
    return out;
}

inline ExperimentReport run_sum_equivalence(const ExperimentConfig& cfg,
                                            const ExecutionOptions& opts = {}) {
    cfg.validate();
    auto outcomes = detail::run_trials(cfg.trials, opts, [&](std::uint64_t t) {
        const auto H = detail::sample_operator(cfg, t);
        std::optional<Tolerances> tol;
        if (cfg.tol_atom || cfg.tol_match) tol = detail::explicit_tolerances(cfg, eigendecompose(H));
        return check_sum_equivalence(H, cfg.quads, tol);
    });
    ExperimentReport rep;
    rep.config = cfg;
    detail::fold_outcomes(rep, cfg, outcomes);
    return rep;
}

/// Free zero-diagonal matrix of odd size: mu_1 has an atom at 0 that every
/// mu_{2k} misses, because s_1(0, 2k) = 0.
inline ExperimentReport run_counterexample(index_t size = 3) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Counterexample;
    cfg.N = size;
    cfg.validate();

    const auto H = free_operator({1, size});
    const auto ed = eigendecompose(H);
    const auto mu1 = site_measure(ed, 1);
    const auto mu2 = site_measure(ed, 2);
    const std::size_t zero = mu1.nearest(0.0);
    const double at_zero = mu1.atoms()[zero].location;

    ExperimentReport rep;
    rep.config = cfg;
    auto check = [&](std::string name, double expected, double observed, bool pass) {
        rep.assertions.push_back({std::move(name), expected, observed, pass});
    };
    const double expected_mass = 2.0 / double(size + 1);
    const double w1 = mu1.atoms()[zero].weight;
    check("mu_1({0})", expected_mass, w1, std::abs(w1 - expected_mass) <= 1e-12);
    for (index_t n = 2; n <= size; n += 2) {
        const double s = solution_value<double>(H, Family::S, 1, 0.0, n);
        check("s_1(0," + std::to_string(n) + ")", 0.0, s, s == 0.0);
        const double w = site_measure(ed, n).atoms()[zero].weight;
        check("mu_" + std::to_string(n) + "({0})", 0.0, w, w <= 1e-12);
    }
    const bool eq = equivalent(mu1, mu2, Tolerances::for_spectrum(ed));
    check("mu_1 ~ mu_2", 0.0, eq ? 1.0 : 0.0, !eq);
    rep.checks = rep.assertions.size();
    std::uint64_t passed = 0;
    for (const auto& a : rep.assertions) passed += a.pass;
    rep.success_fraction = double(passed) / double(rep.checks);
    rep.max_residual = std::abs(at_zero);
    return rep;
}

/// S_k = sum_{n=1..k} 1 / max{a(-n-1), a(n-1)}, k = 1..N.
inline std::vector<double> carleman_partial_sums(const CarlemanRule& rule, index_t N) {
    std::vector<double> sums;
    sums.reserve(std::size_t(std::max<index_t>(N, 0)));
    double acc = 0.0;
    for (index_t n = 1; n <= N; ++n) {
        acc += 1.0 / std::max(rule.a(-n - 1), rule.a(n - 1));
        sums.push_back(acc);
    }
    return sums;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const ExecutionOptions& opts = {}) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport rep;
    switch (cfg.kind) {
    case ExperimentKind::Collision: rep = run_collision(cfg, opts); break;
    case ExperimentKind::Equivalence: rep = run_equivalence(cfg, opts); break;
    case ExperimentKind::SumEquivalence: rep = run_sum_equivalence(cfg, opts); break;
    case ExperimentKind::AtomProbability: rep = run_atom_probability(cfg, opts); break;
    case ExperimentKind::Counterexample: rep = run_counterexample(cfg.N); break;
    case ExperimentKind::Carleman:
        cfg.validate();
        rep.config = cfg;
        rep.partial_sums = carleman_partial_sums(cfg.a_rule, cfg.N);
        rep.checks = 0;
        break;
    }
    rep.config = cfg;
    rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return rep;
}

} // namespace jacobi
