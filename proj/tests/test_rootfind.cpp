#include "chainres/errors.hpp"
#include "chainres/rootfind.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace chainres;
using namespace chainres::testing;

namespace {

const double ln_third = std::log(1.0 / 3.0);

ParamVector fig2_params() { return build_params(ChainGeometry({0.8, 1, 1.2, 1.4}, {0.9, 1.1, 1.3}), Medium(1, 1, 0.8)); }
ParamVector fig3_params() { return build_params(ChainGeometry({1.5, 4, 1}, {2, 4}), Medium(1, 1, 0.01)); }

int total_multiplicity(const SpectrumResult& r) {
    int n = 0;
    for (const auto& z : r.zeros) n += z.multiplicity;
    return n;
}

} // namespace

TEST(Rootfind, StripContainsSingleResonatorLine) {
    const auto poly = expand_f_trig(make_params({1.0}), 0.5);
    const auto loose = strip_bounds(poly, false);
    const auto tight = strip_bounds(poly, true);
    ASSERT_TRUE(loose && tight);
    EXPECT_LT(tight->lower, ln_third);
    EXPECT_GT(tight->upper, ln_third);
    EXPECT_LE(tight->upper, 0.1 + 1e-15);
    EXPECT_LE(tight->upper, loose->upper);
}

TEST(Rootfind, StripAbsentForSingleTerm) {
    EXPECT_FALSE(strip_bounds(expand_f_trig(make_params({1, 2, 3}), 1.0)).has_value());
}

TEST(Rootfind, CountSingleResonatorZeros) {
    const auto p = make_params({1.0});
    auto f = [&](cplx k) { return eval_f(k, p, 0.5); };
    EXPECT_EQ(count_zeros(f, Rect{-0.5, 9.9, -2.0, 0.0}, 1.0).count, 4);
    EXPECT_EQ(count_zeros(f, Rect{-10, 10, 0.05, 3.0}, 1.0).count, 0);
}

TEST(Rootfind, SingleResonatorClosedFormZeros) {
    const auto res = spectrum_in(make_params({1.0}), 0.5, -5.5 * pi, 5.5 * pi, true);
    ASSERT_EQ(res.zeros.size(), 11u);
    EXPECT_EQ(res.total_winding, 11);
    for (std::size_t i = 0; i < 11; ++i) {
        const int n = static_cast<int>(i) - 5;
        EXPECT_LE(std::abs(res.zeros[i].k - cplx(n * pi, ln_third)), 1e-9);
        EXPECT_EQ(res.zeros[i].multiplicity, 1);
        EXPECT_EQ(res.zeros[i].cluster_radius, 0.0);
    }
}

TEST(Rootfind, Fig2WindingAndDensity) {
    const auto p = fig2_params();
    const auto strip = strip_bounds(expand_f_trig(p, 0.8), true);
    for (auto [x, count, dens] : {std::tuple{5.0, 25, 2.5}, {50.0, 245, 2.45}}) {
        const auto res = spectrum_in(p, 0.8, -x, x, true);
        EXPECT_EQ(res.total_winding, count);
        EXPECT_EQ(total_multiplicity(res), count);
        const auto d = zero_density(res, p, 0.8);
        EXPECT_NEAR(d.empirical, dens, 1e-12);
        EXPECT_NEAR(d.theoretical, 7.7 / pi, 1e-12);
        EXPECT_TRUE(d.theoretical_applicable);
        for (const auto& z : res.zeros) {
            EXPECT_GT(z.k.imag(), strip->lower);
            EXPECT_LT(z.k.imag(), strip->upper);
        }
    }
}

TEST(Rootfind, Fig3ClusterCounts) {
    const auto p = fig3_params();
    const auto res = spectrum_in(p, 0.01, -0.5, 3.5, true);
    const auto rep = cluster_counts(res, p, 0.15);
    const std::vector<double> k0{0, pi / 4, pi / 2, 2 * pi / 3, 3 * pi / 4, pi};
    const std::vector<int> n{5, 2, 3, 1, 2, 4};
    ASSERT_EQ(rep.points.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_NEAR(rep.points[i].k0, k0[i], 1e-12);
        EXPECT_EQ(rep.points[i].expected, n[i]);
        EXPECT_EQ(rep.points[i].found, n[i]);
    }
    EXPECT_TRUE(rep.overlapping); // 2pi/3 and 3pi/4 are 0.26 apart
    EXPECT_EQ(total_multiplicity(res), res.total_winding);
}

TEST(Rootfind, EMultiplicity) {
    std::mt19937_64 rng(40);
    for (std::size_t n = 1; n <= 6; ++n) EXPECT_EQ(e_multiplicity(0.0, random_params(rng, n)), static_cast<int>(2 * n - 1));
    const auto p = make_params({1.0, 0.7, 2.0});
    EXPECT_EQ(e_multiplicity(pi, p), 2);
    EXPECT_EQ(e_multiplicity(pi / 2, p), 1);
    EXPECT_EQ(e_multiplicity(1.0, p), 0);
    EXPECT_TRUE(divides(0.3, pi / 0.3));
}

TEST(Rootfind, UnitContrastHasNoZeros) {
    const auto p = make_params({1, 2, 3});
    const auto res = find_zeros([&](cplx k) { return eval_f_with_derivative(k, p, 1.0); }, Rect{-5, 5, -3, 1});
    EXPECT_TRUE(res.zeros.empty());
    EXPECT_EQ(res.total_winding, 0);
    const auto d = zero_density(res, p, 1.0);
    EXPECT_EQ(d.empirical, 0.0);
    EXPECT_FALSE(d.theoretical_applicable);
}

TEST(RootfindProperty, WindingAdditivity) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_params(rng, 1 + trial % 4);
        const double sigma = uniform(rng, 0.05, 0.9);
        auto f = [&](cplx k) { return eval_f(k, p, sigma); };
        const auto strip = strip_bounds(expand_f_trig(p, sigma), true);
        const Rect r{uniform(rng, -6, -2), uniform(rng, 2, 6), strip->lower, strip->upper};
        const auto whole = count_zeros(f, r, p.norm1());
        const double xm = uniform(rng, r.x1 + 0.5, r.x2 - 0.5);
        const double ym = uniform(rng, r.y1 + 0.1, r.y2 - 0.1);
        const auto a = count_zeros(f, Rect{whole.rect.x1, xm, whole.rect.y1, whole.rect.y2}, p.norm1());
        const auto b = count_zeros(f, Rect{xm, whole.rect.x2, whole.rect.y1, whole.rect.y2}, p.norm1());
        // a shifted split line may move zeros between halves but never loses them
        if (a.rect.x2 == b.rect.x1) { EXPECT_EQ(a.count + b.count, whole.count); }
        const auto c = count_zeros(f, Rect{whole.rect.x1, whole.rect.x2, whole.rect.y1, ym}, p.norm1());
        const auto d = count_zeros(f, Rect{whole.rect.x1, whole.rect.x2, ym, whole.rect.y2}, p.norm1());
        if (c.rect.y2 == d.rect.y1) { EXPECT_EQ(c.count + d.count, whole.count); }
    }
}

TEST(RootfindProperty, ConservationNegativeImaginaryAndRefinement) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_params(rng, 1 + trial % 5);
        const double sigma = uniform(rng, 0.05, 5.0);
        const auto res = spectrum_in(p, sigma, -4, 4, true);
        EXPECT_EQ(total_multiplicity(res), res.total_winding);
        for (const auto& z : res.zeros) {
            EXPECT_LT(z.k.imag(), 0.0);
            if (z.multiplicity == 1 && z.cluster_radius == 0.0) {
                const auto vd = eval_f_with_derivative(z.k, p, sigma);
                const double scale = expand_f_trig(p, sigma).magnitude_scale(z.k.imag());
                EXPECT_LE(std::abs(vd.value), 1e-10 * scale);
                EXPECT_GT(std::abs(vd.d_dk), 0.0);
            }
        }
    }
}

TEST(RootfindProperty, ReflectionSymmetry) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_params(rng, 1 + trial % 4);
        const double sigma = uniform(rng, 0.05, 0.95);
        const auto res = spectrum_in(p, sigma, -6, 6, true);
        for (const auto& z : res.zeros) {
            if (std::abs(z.k.real()) > 5.5) continue;
            double best = 1e300;
            for (const auto& w : res.zeros) best = std::min(best, std::abs(w.k + std::conj(z.k)));
            EXPECT_LE(best, 1e-9) << z.k;
        }
    }
}

TEST(RootfindProperty, ContrastDuality) {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_params(rng, 1 + trial % 4);
        const double sigma = uniform(rng, 0.05, 0.95);
        const auto a = spectrum_in(p, sigma, -4, 4, true);
        const auto b = spectrum_in(p, 1.0 / sigma, -4, 4, true);
        ASSERT_EQ(a.zeros.size(), b.zeros.size());
        for (std::size_t i = 0; i < a.zeros.size(); ++i) {
            EXPECT_LE(std::abs(a.zeros[i].k - b.zeros[i].k), 1e-8);
            const double scale = expand_f_trig(p, 1.0 / sigma).magnitude_scale(a.zeros[i].k.imag());
            EXPECT_LE(std::abs(eval_f(a.zeros[i].k, p, 1.0 / sigma)), 1e-9 * scale);
        }
    }
}

TEST(Rootfind, ThreadCountDoesNotChangeZeros) {
    const auto p = fig2_params();
    const auto one = spectrum_in(p, 0.8, -20, 20, true, 1);
    const auto many = spectrum_in(p, 0.8, -20, 20, true, 4);
    ASSERT_EQ(one.zeros.size(), many.zeros.size());
    for (std::size_t i = 0; i < one.zeros.size(); ++i) EXPECT_LE(std::abs(one.zeros[i].k - many.zeros[i].k), 1e-12);
}

TEST(Rootfind, SortedOutput) {
    const auto res = spectrum_in(fig2_params(), 0.8, -5, 5, true);
    for (std::size_t i = 1; i < res.zeros.size(); ++i) EXPECT_LE(res.zeros[i - 1].k.real(), res.zeros[i].k.real());
}

TEST(Rootfind, NewtonRefine) {
    const auto p = make_params({1.0});
    auto f = [&](cplx k) { return eval_f_with_derivative(k, p, 0.5); };
    EXPECT_LE(std::abs(newton_refine(f, cplx(3.0, -1.0), 0.5) - cplx(pi, ln_third)), 1e-13);
    EXPECT_THROW(newton_refine(f, cplx(1.5, -1.0), 0.01), NumericalFailure);
}

TEST(Rootfind, RejectsBadRect) {
    auto f = [](cplx k) { return ValueWithDerivative{k, 1.0}; };
    EXPECT_THROW(find_zeros(f, Rect{1, 0, -1, 1}), InvalidInput);
    FindOptions o;
    o.tol = 0;
    EXPECT_THROW(find_zeros(f, Rect{-1, 1, -1, 1}, o), InvalidInput);
}

TEST(Rootfind, MultipleZeroIsClustered) {
    // (k - 1)^3 (k + 2): a triple zero reported once with multiplicity 3
    auto f = [](cplx k) {
        const cplx a = (k - 1.0) * (k - 1.0);
        return ValueWithDerivative{a * (k - 1.0) * (k + 2.0), 3.0 * a * (k + 2.0) + a * (k - 1.0)};
    };
    const auto res = find_zeros(f, Rect{-3.1, 3.3, -1.3, 1.1});
    EXPECT_EQ(res.total_winding, 4);
    ASSERT_EQ(res.zeros.size(), 2u);
    EXPECT_EQ(res.zeros[0].multiplicity, 1);
    EXPECT_LE(std::abs(res.zeros[0].k + 2.0), 1e-12);
    EXPECT_EQ(res.zeros[1].multiplicity, 3);
    EXPECT_LE(std::abs(res.zeros[1].k - 1.0), 1e-4);
}
