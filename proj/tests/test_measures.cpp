#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "jacobi/io.hpp"
#include "jacobi/measures.hpp"
#include "oracle/dense_oracle.hpp"

using namespace jacobi;

namespace {

void expect_atoms(const AtomicMeasure& mu, const std::vector<Atom>& ref, double tol = 1e-14) {
    ASSERT_EQ(mu.size(), ref.size());
    for (std::size_t j = 0; j < ref.size(); ++j) {
        EXPECT_NEAR(mu.atoms()[j].location, ref[j].location, tol) << "atom " << j;
        EXPECT_NEAR(mu.atoms()[j].weight, ref[j].weight, tol) << "atom " << j;
    }
}

const double r2 = std::sqrt(2.0);

} // namespace

TEST(Measures, SpectralMeasureExamples) {
    const auto ed2 = eigendecompose(free_operator({1, 2}));
    expect_atoms(spectral_measure(ed2, std::vector<double>{1, 0}), {{-1, 0.5}, {1, 0.5}});

    const auto ed3 = eigendecompose(free_operator({1, 3}));
    expect_atoms(spectral_measure(ed3, std::vector<double>{1, 0, 0}),
                 {{-r2, 0.25}, {0, 0.5}, {r2, 0.25}});
    expect_atoms(spectral_measure(ed3, std::vector<double>{0, 1, 0}),
                 {{-r2, 0.5}, {0, 0}, {r2, 0.5}});
    expect_atoms(site_measure(ed3, 1), {{-r2, 0.25}, {0, 0.5}, {r2, 0.25}});
    expect_atoms(site_measure(ed3, BasisIndex{2}), {{-r2, 0.5}, {0, 0}, {r2, 0.5}});
    expect_atoms(site_measure(ed3, 3), {{-r2, 0.25}, {0, 0.5}, {r2, 0.25}});

    const auto ed1 = eigendecompose(build_operator({0, 0}, {}, {2.5}));
    expect_atoms(site_measure(ed1, 0), {{2.5, 1.0}});

    EXPECT_THROW(spectral_measure(ed3, std::vector<double>{0, 0, 0}), ZeroVector);
    EXPECT_THROW(spectral_measure(ed3, std::vector<double>{1, 0}), LengthMismatch);
    EXPECT_THROW(site_measure(ed3, 4), RangeError);
}

TEST(Measures, ContinuityAndEquivalenceExamples) {
    const auto ed = eigendecompose(free_operator({1, 3}));
    const auto tol = Tolerances::for_spectrum(ed);
    const auto mu1 = site_measure(ed, 1), mu2 = site_measure(ed, 2), mu3 = site_measure(ed, 3);
    EXPECT_TRUE(absolutely_continuous(mu1, mu1, tol));
    EXPECT_TRUE(absolutely_continuous(mu2, mu1, tol));
    EXPECT_FALSE(absolutely_continuous(mu1, mu2, tol));
    EXPECT_TRUE(absolutely_continuous(AtomicMeasure{}, mu2, tol));
    EXPECT_TRUE(equivalent(mu1, mu3, tol));
    EXPECT_FALSE(equivalent(mu1, mu2, tol));
    EXPECT_TRUE(equivalent(mu2, mu2, tol));
    const auto miss = first_uncovered_atom(mu1, mu2, tol);
    ASSERT_TRUE(miss.has_value());
    EXPECT_NEAR(miss->location, 0.0, 1e-15);
}

TEST(Measures, MatchToleranceFallsBackForSingleAtom) {
    EXPECT_EQ(Tolerances::for_spectrum(0.0).match, 1e-8);
    EXPECT_EQ(Tolerances::for_spectrum(4.0).match, 4e-8);
}

TEST(Measures, SumAndDensity) {
    const AtomicMeasure mu({{0.0, 0.25}, {1.0, 0.75}});
    const AtomicMeasure nu({{1.0, 0.5}, {2.0, 0.5}});
    const auto s = mu + nu;
    expect_atoms(s, {{0.0, 0.25}, {1.0, 1.25}, {2.0, 0.5}});
    EXPECT_DOUBLE_EQ(s.total_mass(), 2.0);
    const auto g = with_density(s, [](double x) { return x; });
    expect_atoms(g, {{0.0, 0.0}, {1.0, 1.25}, {2.0, 1.0}});
    // gamma << mu + nu, and the reverse fails exactly where the density vanishes
    const auto tol = Tolerances::for_spectrum(2.0);
    EXPECT_TRUE(absolutely_continuous(g, s, tol));
    EXPECT_FALSE(absolutely_continuous(s, g, tol));
}

TEST(Measures, RelationExamples) {
    const auto H = free_operator({1, 3});
    const auto ed = eigendecompose(H);
    for (index_t n = 1; n <= 3; ++n) EXPECT_LE(check_semiinfinite_relation(ed, H, n).max(), 1e-14);
    // n = 3, lambda = sqrt 2: (2 - 1)^2 * 1/4
    EXPECT_NEAR(solution_value<double>(H, Family::S, 1, r2, 3), 1.0, 1e-15);
    EXPECT_EQ(solution_value<double>(H, Family::S, 1, 0.0, 2), 0.0);
}

TEST(Measures, MatrixMeasureExamples) {
    const auto ed = eigendecompose(free_operator({1, 3}));
    const auto mm = matrix_measure(ed, 1);
    ASSERT_EQ(mm.atoms.size(), 3u);
    const auto& zero = mm.atoms[1];
    EXPECT_NEAR(zero.m11, 0.5, 1e-15);
    EXPECT_NEAR(zero.m12, 0.0, 1e-15);
    EXPECT_NEAR(zero.m22, 0.0, 1e-15);
    const auto& top = mm.atoms[2];
    EXPECT_NEAR(top.m11, 0.25, 1e-15);
    EXPECT_NEAR(top.m12, r2 / 4, 1e-15);
    EXPECT_NEAR(top.m22, 0.5, 1e-15);
    const auto mu1 = site_measure(ed, 1), mu2 = site_measure(ed, 2);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(mm.atoms[j].m11, mu1.atoms()[j].weight);
        EXPECT_EQ(mm.atoms[j].m22, mu2.atoms()[j].weight);
    }
    EXPECT_THROW(matrix_measure(ed, 3), RangeError);

    const auto rz = rn_matrix(mm, 0.0);
    EXPECT_NEAR(rz.a, 1.0, 1e-15);
    EXPECT_NEAR(rz.b, 0.0, 1e-15);
    const auto rt = rn_matrix(mm, r2);
    EXPECT_NEAR(rt.a, 1.0 / 3, 1e-15);
    EXPECT_NEAR(rt.b, r2 / 3, 1e-15);
    EXPECT_NEAR(rt.b * rt.b, rt.a * (1 - rt.a), 1e-15);

    EXPECT_THROW(rn_matrix(MatrixAtom{0.0, 0.0, 0.0, 0.0}), NullAtom);
    EXPECT_THROW(rn_matrix(mm, 0.7), NullAtom);
}

TEST(Measures, GFactorExamples) {
    const auto H = free_operator({1, 3});
    const auto ed = eigendecompose(H);
    const auto mm = matrix_measure(ed, 1);
    const auto rt = rn_matrix(mm, r2);
    EXPECT_NEAR(g_factor(H, 1, 1, rt), rt.a, 1e-15);
    EXPECT_NEAR(g_factor(H, 1, 2, rt), 1 - rt.a, 1e-15);
    EXPECT_NEAR(g_factor(H, 1, 3, rt), 1.0 / 3, 1e-14);
    // brute force from the eigendecomposition
    EXPECT_NEAR(site_measure(ed, 3).atoms()[2].weight / mm.atoms[2].trace(), 1.0 / 3, 1e-14);
}

TEST(Measures, Csv) {
    const auto ed = eigendecompose(free_operator({1, 2}));
    const auto csv = io::measure_csv(site_measure(ed, 1));
    EXPECT_EQ(csv.substr(0, 16), "location,weight\n");
}

TEST(MeasuresProperty, NormalizationAndCompleteness) {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t N = 1 + rng() % 30;
        const auto H = oracle::random_operator(rng, N);
        const auto ed = eigendecompose(H);
        std::vector<double> per_atom(N, 0.0);
        for (index_t n = H.lo(); n <= H.hi(); ++n) {
            const auto mu = site_measure(ed, n);
            EXPECT_NEAR(mu.total_mass(), 1.0, 1e-10);
            for (std::size_t j = 0; j < N; ++j) per_atom[j] += mu.atoms()[j].weight;
        }
        for (double w : per_atom) EXPECT_NEAR(w, 1.0, 1e-10);
    }
}

TEST(MeasuresProperty, SemiInfiniteRelation) {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t N = 1 + rng() % 30;
        const auto H = oracle::random_operator(rng, N);
        const auto ed = eigendecompose(H);
        for (index_t n = H.lo(); n <= H.hi(); ++n) {
            const auto r = check_semiinfinite_relation(ed, H, n);
            EXPECT_LE(r.max_s, 1e-8);
            EXPECT_LE(r.max_c, 1e-8);
        }
    }
}

TEST(MeasuresProperty, DensityMatrixStructure) {
    std::mt19937_64 rng(47);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t N = 2 + rng() % 29;
        const auto H = oracle::random_operator(rng, N);
        const auto ed = eigendecompose(H);
        for (index_t m = H.lo(); m < H.hi(); ++m) {
            const auto mm = matrix_measure(ed, m);
            for (std::size_t j = 0; j < N; ++j) {
                const auto& at = mm.atoms[j];
                if (at.trace() <= default_tol_atom) {
                    EXPECT_THROW(rn_matrix(at), NullAtom);
                    continue;
                }
                // trace equals (mu_m + mu_{m+1})({lambda_j})
                const double w = ed.component(j, m) * ed.component(j, m) +
                                 ed.component(j, m + 1) * ed.component(j, m + 1);
                EXPECT_NEAR(at.trace(), w, 1e-15);
                const auto rn = rn_matrix(at);
                EXPECT_GE(rn.a, -1e-10);
                EXPECT_LE(rn.a, 1 + 1e-10);
                EXPECT_NEAR(rn.b * rn.b, rn.a * (1 - rn.a), 1e-10);
                // eigenvector recovery through the fundamental solutions at m+1
                for (index_t n = H.lo(); n <= H.hi(); ++n) {
                    const double g = g_factor(H, m, n, rn);
                    const double mun = ed.component(j, n) * ed.component(j, n);
                    EXPECT_NEAR(mun, g * at.trace(), 1e-8);
                }
            }
        }
    }
}

TEST(MeasuresProperty, ConsecutiveSumsAreEquivalent) {
    // mu_m + mu_{m+1} charges every eigenvalue: v_j(m) = v_j(m+1) = 0 would
    // force v_j = 0 through the recurrence. Masses of strongly localized states
    // drop below the default tol_atom (a weight, i.e. a squared component), so
    // the threshold here is the squared eigenvector accuracy instead.
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t N = 3 + rng() % 20;
        const auto H = rep % 2 ? oracle::random_operator(rng, N) : free_operator({1, index_t(N)});
        const auto ed = eigendecompose(H);
        auto tol = Tolerances::for_spectrum(ed);
        tol.atom = 1e-24;
        for (index_t m = H.lo(); m + 2 <= H.hi(); ++m) {
            const auto s1 = site_measure(ed, m) + site_measure(ed, m + 1);
            const auto s2 = site_measure(ed, m + 1) + site_measure(ed, m + 2);
            EXPECT_TRUE(equivalent(s1, s2, tol));
        }
    }
}

TEST(MeasuresProperty, PositiveDensityCharacterizesEquivalence) {
    // Two finite atomic measures are equivalent exactly when each is the other
    // times a strictly positive density on the charged atoms.
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto tol = Tolerances::for_spectrum(10.0);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<Atom> atoms;
        for (int k = 0; k < 6; ++k) atoms.push_back({double(k), u(rng) < 0.2 ? 0.0 : u(rng)});
        const AtomicMeasure mu(atoms);
        std::vector<double> f(6);
        for (auto& x : f) x = u(rng) < 0.2 ? 0.0 : u(rng) + 0.01;
        const auto nu = with_density(mu, [&](double x) { return f[std::size_t(x)]; });
        bool positive = true;
        for (int k = 0; k < 6; ++k)
            if (atoms[std::size_t(k)].weight > tol.atom && f[std::size_t(k)] == 0.0) positive = false;
        EXPECT_EQ(equivalent(mu, nu, tol), positive);
        EXPECT_TRUE(absolutely_continuous(nu, mu, tol));
    }
}

TEST(MeasuresProperty, AgreesWithDenseOracle) {
    std::mt19937_64 rng(61);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t N = 1 + rng() % 8;
        const auto H = oracle::random_operator(rng, N);
        const auto ed = eigendecompose(H);
        const auto A = oracle::dense(H);
        const auto lambda = oracle::eigenvalues(A);
        for (std::size_t j = 0; j < N; ++j) {
            const auto v = oracle::eigenvector(A, lambda[j]);
            for (index_t n = H.lo(); n <= H.hi(); ++n) {
                const double w = v[std::size_t(n - H.lo())] * v[std::size_t(n - H.lo())];
                EXPECT_NEAR(site_measure(ed, n).atoms()[j].weight, w, 1e-8);
            }
        }
    }
}
