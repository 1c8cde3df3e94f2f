#include <gtest/gtest.h>

#include "cide/dual.hpp"
#include "ec_oracle.hpp"

using namespace cide;
using oracle::SmallCurve;

namespace {

long count_points(long p, const CurveParams& E) {
    const SmallCurve c{p, E.A.get_si(), E.B.get_si()};
    std::vector<int> sq(p, 0);
    for (long y = 0; y < p; ++y) ++sq[y * y % p];
    long n = 1;
    for (long x = 0; x < p; ++x) n += sq[c.f(x)];
    return n;
}

}  // namespace

TEST(FindPoint, SpecExample) {
    const auto E = curve_or_throw(0, 1, 31);
    auto r = find_point(E, 2);
    ASSERT_TRUE(holds<TwistedPoint>(r));
    const auto& t = std::get<TwistedPoint>(r);
    EXPECT_EQ(t.lambda, 9);
    EXPECT_EQ(t.point.x, 18);
    EXPECT_EQ(t.point.y, 19);
    EXPECT_EQ(t.curve.A, 0);
    EXPECT_EQ(t.curve.B, 729 % 31);
    EXPECT_TRUE(on_curve(t.point, t.curve));
}

TEST(FindPoint, TrivialTwist) {
    const auto E = curve_or_throw(0, 1, 31);
    const auto t = std::get<TwistedPoint>(find_point(E, 0));
    EXPECT_EQ(t.lambda, 1);
    EXPECT_EQ(t.curve, E);
    EXPECT_EQ(t.point, CurvePoint::affine(0, 1));
}

TEST(FindPoint, JacobiZeroGivesFactor) {
    const auto E = curve_or_throw(1, 10, 35);
    auto r = find_point(E, 0);
    ASSERT_TRUE(holds<FactorFound>(r));
    EXPECT_EQ(std::get<FactorFound>(r).factor, 5);
}

TEST(FindPoint, TwistPreservesSize) {
    for (long p : {31L, 43L, 101L})
        for (long b = 1; b < 6; ++b) {
            if ((32 + 27 * b * b) % p == 0) continue;
            const auto E = curve_or_throw(2, b, p);
            for (long s = 0; s < 10; ++s) {
                const auto t = std::get<TwistedPoint>(find_point(E, s));
                EXPECT_EQ(count_points(p, t.curve), count_points(p, E));
            }
        }
}

TEST(SearchDual, Pair31_43) {
    auto r = search_dual(43, {make_order(-3)}, 1000, 1);
    ASSERT_TRUE(holds<DualPair>(r));
    const auto& d = std::get<DualPair>(r);
    EXPECT_EQ(d.m, 31);
    EXPECT_EQ(d.mu.a, 11);
    EXPECT_EQ(abs(d.mu.b), 1);
    EXPECT_EQ(count_points(43, d.curve_n), 31);
    EXPECT_EQ(count_points(31, d.curve_m), 43);
    EXPECT_FALSE(check_dual_pair(d).has_value()) << *check_dual_pair(d);
}

TEST(SearchDual, Pair7_13) {
    auto r = search_dual(7, {make_order(-3)}, 1000, 1);
    ASSERT_TRUE(holds<DualPair>(r));
    const auto& d = std::get<DualPair>(r);
    EXPECT_EQ(d.m, 13);
    EXPECT_EQ(count_points(7, d.curve_n), 13);
    EXPECT_EQ(count_points(13, d.curve_m), 7);
    EXPECT_FALSE(check_dual_pair(d).has_value());
}

TEST(SearchDual, NotFoundCases) {
    EXPECT_TRUE(holds<NotFound>(search_dual(11, {make_order(-4)}, 1000, 1)));
    EXPECT_TRUE(holds<NotFound>(search_dual(43, {}, 1000, 1)));
    EXPECT_TRUE(holds<NotFound>(search_dual(43, {make_order(-3)}, 0, 1)));
    EXPECT_TRUE(holds<CompositeWitness>(search_dual(1105, {make_order(-3)}, 1000, 1)));
    EXPECT_THROW(search_dual(42, {make_order(-3)}, 1000, 1), PreconditionError);
}

TEST(SearchDual, PairsAreConsistent) {
    const auto orders = default_orders(100);
    int found = 0;
    for (long n = 1001; n < 4000; n += 2) {
        if (!is_small_prime(n) || n % 3 == 0) continue;
        auto r = search_dual(n, orders, 200, 7);
        if (!holds<DualPair>(r)) continue;
        ++found;
        const auto& d = std::get<DualPair>(r);
        EXPECT_FALSE(check_dual_pair(d).has_value()) << n;
        const Int gap = abs(d.m - d.n) - 1;
        EXPECT_LE(gap * gap, 4 * d.m) << n;
        EXPECT_TRUE(is_small_prime(d.m.get_ui())) << n;
        EXPECT_EQ(count_points(n, d.curve_n), d.m.get_si()) << n;
        EXPECT_EQ(count_points(d.m.get_si(), d.curve_m), n) << n;
    }
    EXPECT_GT(found, 200);
}

TEST(SearchDual, TamperedPairRejected) {
    auto d = std::get<DualPair>(search_dual(43, {make_order(-3)}, 1000, 1));
    auto bad = d;
    bad.point_n.y = mod(bad.point_n.y + 1, Int(43));
    EXPECT_EQ(check_dual_pair(bad), "on-curve");
    bad = d;
    bad.mu.a += 2;
    EXPECT_EQ(check_dual_pair(bad), "norm");
}
