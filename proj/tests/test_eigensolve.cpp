#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "jacobi/eigensolve.hpp"
#include "oracle/dense_oracle.hpp"

using namespace jacobi;

namespace {

double residual(const JacobiOperator& H, const EigenDecomposition& ed) {
    double worst = 0.0;
    for (std::size_t j = 0; j < ed.size(); ++j) {
        auto v = ed.eigenvector(j);
        const auto Hv = jacobi::apply(H, v);
        double r = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            r += (Hv[k] - ed.eigenvalue(j) * v[k]) * (Hv[k] - ed.eigenvalue(j) * v[k]);
        }
        worst = std::max(worst, std::sqrt(r));
    }
    return worst;
}

double orthogonality(const EigenDecomposition& ed) {
    double worst = 0.0;
    for (std::size_t i = 0; i < ed.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            auto u = ed.eigenvector(i);
            auto v = ed.eigenvector(j);
            const double d = std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
            worst = std::max(worst, std::abs(d - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

} // namespace

TEST(Eigensolve, FreeTwoByTwo) {
    const auto ed = eigendecompose(free_operator({1, 2}));
    const double h = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(ed.eigenvalue(0), -1.0, 1e-15);
    EXPECT_NEAR(ed.eigenvalue(1), 1.0, 1e-15);
    EXPECT_NEAR(ed.component(0, 1), h, 1e-15);
    EXPECT_NEAR(ed.component(0, 2), -h, 1e-15);
    EXPECT_NEAR(ed.component(1, 1), h, 1e-15);
    EXPECT_NEAR(ed.component(1, 2), h, 1e-15);
}

TEST(Eigensolve, FreeThreeByThree) {
    const auto ed = eigendecompose(free_operator({1, 3}));
    EXPECT_NEAR(ed.eigenvalue(0), -std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(ed.eigenvalue(1), 0.0, 1e-15);
    EXPECT_NEAR(ed.eigenvalue(2), std::sqrt(2.0), 1e-15);
}

TEST(Eigensolve, SingleSite) {
    const auto ed = eigendecompose(build_operator({4, 4}, {}, {5.0}));
    ASSERT_EQ(ed.size(), 1u);
    EXPECT_EQ(ed.eigenvalue(0), 5.0);
    EXPECT_EQ(ed.component(0, 4), 1.0);
}

TEST(Eigensolve, SturmCountExamples) {
    EXPECT_EQ(sturm_count(free_operator({1, 2}), 0.0), 1u);
    EXPECT_EQ(sturm_count(free_operator({1, 3}), 2.0), 3u);
    EXPECT_EQ(sturm_count(free_operator({1, 3}), -2.0), 0u);
    EXPECT_EQ(sturm_count(free_operator({1, 3}), 0.0), 1u);
}

TEST(Eigensolve, SignConventionAndDeterminism) {
    std::mt19937_64 rng(3);
    const auto H = oracle::random_operator(rng, 40);
    const auto e1 = eigendecompose(H);
    const auto e2 = eigendecompose(H);
    EXPECT_EQ(e1.eigenvalues(), e2.eigenvalues());
    for (std::size_t j = 0; j < e1.size(); ++j) {
        auto v = e1.eigenvector(j);
        auto w = e2.eigenvector(j);
        EXPECT_TRUE(std::equal(v.begin(), v.end(), w.begin()));
        const auto first = std::find_if(v.begin(), v.end(), [](double x) { return std::abs(x) > 64 * std::numeric_limits<double>::epsilon(); });
        ASSERT_NE(first, v.end());
        EXPECT_GT(*first, 0.0);
    }
}

TEST(EigensolveProperty, ResidualOrthogonalityTrace) {
    std::mt19937_64 rng(17);
    for (std::size_t N : {1u, 2u, 3u, 10u, 50u, 120u, 200u, 500u}) {
        const auto H = oracle::random_operator(rng, N);
        const auto ed = eigendecompose(H);
        const double norm = std::max(ed.spectral_radius(), 1e-300);
        EXPECT_LE(residual(H, ed), 1e-12 * norm) << "N=" << N;
        EXPECT_LE(orthogonality(ed), 1e-12 * double(N)) << "N=" << N;
        double tr = 0.0, sum = 0.0;
        for (double w : H.omega().values()) tr += w;
        for (double l : ed.eigenvalues()) sum += l;
        EXPECT_LE(std::abs(tr - sum), 1e-10 * std::max(std::abs(tr), norm));
        for (std::size_t j = 1; j < ed.size(); ++j) EXPECT_LT(ed.eigenvalue(j - 1), ed.eigenvalue(j));
    }
}

TEST(EigensolveProperty, NearDegenerateClusters) {
    // Wilkinson W21+: eigenvalue pairs agree to ~1e-14.
    std::vector<double> w(21);
    for (int k = 0; k < 21; ++k) w[std::size_t(k)] = std::abs(k - 10);
    const JacobiOperator H({1, 21}, std::vector<double>(20, 1.0), w);
    const auto ed = eigendecompose(H);
    EXPECT_NEAR(ed.eigenvalue(20), 10.746194182903393, 1e-12);
    EXPECT_LT(ed.eigenvalue(20) - ed.eigenvalue(19), 1e-12);
    EXPECT_LE(residual(H, ed), 1e-12 * ed.spectral_radius());
    EXPECT_LE(orthogonality(ed), 1e-12 * 21);
}

// Strict interlacing holds in exact arithmetic, but gaps of localized states
// can sit below double resolution; compare up to rounding.
TEST(EigensolveProperty, Interlacing) {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t N = 2 + rng() % 40;
        const auto H = oracle::random_operator(rng, N);
        const auto big = eigendecompose(H).eigenvalues();
        const auto small = eigendecompose(submatrix(H, {H.lo(), H.hi() - 1})).eigenvalues();
        const double slack = 1e-14 * std::max(std::abs(big.front()), std::abs(big.back()));
        for (std::size_t j = 0; j < small.size(); ++j) {
            EXPECT_LE(big[j], small[j] + slack);
            EXPECT_LE(small[j], big[j + 1] + slack);
        }
    }
}

TEST(EigensolveProperty, SturmCountMatchesSpectrum) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> x(-4.0, 4.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t N = 1 + rng() % 50;
        const auto H = oracle::random_operator(rng, N);
        const auto vals = eigendecompose(H).eigenvalues();
        for (int k = 0; k < 10; ++k) {
            const double p = x(rng);
            const auto brute = std::size_t(std::count_if(vals.begin(), vals.end(),
                                                         [&](double l) { return l < p; }));
            EXPECT_EQ(sturm_count(H, p), brute);
        }
    }
}

TEST(EigensolveProperty, AgreesWithDenseOracle) {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t N = 1 + rng() % 8;
        const auto H = oracle::random_operator(rng, N);
        const auto ed = eigendecompose(H);
        const auto ref = oracle::eigenvalues(oracle::dense(H));
        for (std::size_t j = 0; j < N; ++j) EXPECT_NEAR(ed.eigenvalue(j), ref[j], 1e-12);
    }
}

TEST(Eigensolve, ProjectionSumsToIdentity) {
    std::mt19937_64 rng(37);
    const auto H = oracle::random_operator(rng, 12);
    const auto ed = eigendecompose(H);
    std::vector<double> phi(12);
    for (std::size_t k = 0; k < 12; ++k) phi[k] = double(k) - 5.5;
    const auto all = ed.project([](double) { return true; }, phi);
    for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(all[k], phi[k], 1e-12);
    const auto none = ed.project([](double) { return false; }, phi);
    for (double v : none) EXPECT_EQ(v, 0.0);
}
