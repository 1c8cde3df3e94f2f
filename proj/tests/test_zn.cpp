#include <gtest/gtest.h>

#include "cide/zn.hpp"

using namespace cide;

namespace {

bool brute_prime(unsigned long n) { return is_small_prime(n); }

int brute_legendre(long a, long p) {
    a = ((a % p) + p) % p;
    if (a == 0) return 0;
    for (long x = 1; x < p; ++x)
        if (x * x % p == a) return 1;
    return -1;
}

}  // namespace

TEST(TryInvert, SpecExamples) {
    auto a = try_invert(Int(3), Int(10));
    ASSERT_TRUE(holds<Unit>(a));
    EXPECT_EQ(std::get<Unit>(a).inverse, 7);
    auto b = try_invert(Int(4), Int(10));
    ASSERT_TRUE(holds<FactorFound>(b));
    EXPECT_EQ(std::get<FactorFound>(b).factor, 2);
    EXPECT_TRUE(holds<ZeroElement>(try_invert(Int(0), Int(7))));
}

TEST(TryInvert, ExhaustiveSmallModuli) {
    for (long n : {15L, 97L, 221L, 1001L}) {
        for (long x = 0; x < n; ++x) {
            auto r = try_invert(Int(x), Int(n));
            const Int g = gcd(Int(x), Int(n));
            if (x == 0) {
                EXPECT_TRUE(holds<ZeroElement>(r));
            } else if (g == 1) {
                ASSERT_TRUE(holds<Unit>(r));
                EXPECT_EQ(mod(std::get<Unit>(r).inverse * x, Int(n)), 1);
            } else {
                ASSERT_TRUE(holds<FactorFound>(r));
                const Int d = std::get<FactorFound>(r).factor;
                EXPECT_TRUE(d > 1 && d < n && n % d == 0);
            }
        }
    }
}

TEST(MillerRabin, SpecExamples) {
    EXPECT_FALSE(miller_rabin_base(Int(561), Int(2)));
    EXPECT_FALSE(miller_rabin_base(Int(9), Int(2)));
    EXPECT_TRUE(strong_pseudoprime(Int(7)));
    EXPECT_TRUE(strong_pseudoprime(Int(3)));
    EXPECT_THROW(strong_pseudoprime(Int(10)), PreconditionError);
    EXPECT_THROW(strong_pseudoprime(Int(1)), PreconditionError);
}

TEST(MillerRabin, PrimesUpTo1e5AndCarmichaels) {
    for (unsigned long n = 3; n < 100000; n += 2)
        if (brute_prime(n)) ASSERT_TRUE(strong_pseudoprime(Int(n), 5, 42)) << n;
    for (unsigned long c : {561UL, 1105UL, 1729UL, 2465UL, 2821UL, 6601UL})
        EXPECT_FALSE(strong_pseudoprime(Int(c), 5, 42)) << c;
}

TEST(MillerRabin, SeedDeterminism) {
    for (unsigned long n = 9; n < 3000; n += 2)
        EXPECT_EQ(strong_pseudoprime(Int(n), 3, 7), strong_pseudoprime(Int(n), 3, 7));
}

TEST(Jacobi, SpecExamples) {
    EXPECT_EQ(jacobi_symbol(Int(2), Int(7)), 1);
    EXPECT_EQ(jacobi_symbol(Int(0), Int(9)), 0);
    EXPECT_EQ(jacobi_symbol(Int(2), Int(15)), 1);
}

TEST(Jacobi, LegendreForPrimes) {
    for (long p = 3; p <= 997; p += 2) {
        if (!brute_prime(p)) continue;
        for (long a = -5; a < p; ++a) ASSERT_EQ(jacobi_symbol(Int(a), Int(p)), brute_legendre(a, p)) << a << " " << p;
    }
}

TEST(SqrtMod, SpecExamples) {
    auto r = sqrt_mod(Int(2), Int(7));
    ASSERT_TRUE(holds<SqrtRoot>(r));
    const Int x = std::get<SqrtRoot>(r).root;
    EXPECT_TRUE(x == 3 || x == 4);
    EXPECT_TRUE(holds<NotSquare>(sqrt_mod(Int(3), Int(7))));
    auto c = sqrt_mod(Int(4), Int(15));
    if (auto* s = std::get_if<SqrtRoot>(&c)) EXPECT_EQ(mod(s->root * s->root, Int(15)), 4);
}

TEST(SqrtMod, AllResiduesSmallPrimes) {
    for (long p : {3L, 5L, 13L, 17L, 97L, 257L, 641L, 7681L}) {
        for (long a = 0; a < std::min(p, 700L); ++a) {
            auto r = sqrt_mod(Int(a), Int(p));
            if (brute_legendre(a, p) >= 0) {
                ASSERT_TRUE(holds<SqrtRoot>(r)) << a << " " << p;
                const Int x = std::get<SqrtRoot>(r).root;
                EXPECT_EQ(mod(x * x, Int(p)), a);
            } else {
                EXPECT_TRUE(holds<NotSquare>(r));
            }
        }
    }
}

TEST(SqrtMod, CompositeNeverLies) {
    for (long n : {15L, 21L, 561L, 1105L, 3277L}) {
        for (long a = 1; a < 200; ++a) {
            auto r = sqrt_mod(Int(a), Int(n));
            if (auto* s = std::get_if<SqrtRoot>(&r)) EXPECT_EQ(mod(s->root * s->root, Int(n)), mod(Int(a), Int(n)));
            if (auto* f = std::get_if<FactorFound>(&r)) EXPECT_TRUE(n % f->factor == 0 && f->factor > 1 && f->factor < n);
        }
    }
}

TEST(SmallHelpers, PrimitiveRootAndFactor) {
    EXPECT_EQ(primitive_root(7), 3UL);
    EXPECT_EQ(primitive_root(13), 2UL);
    auto f = factor_small(360);
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f[0], (std::pair<unsigned long, unsigned>{2, 3}));
    EXPECT_EQ(valuation(Int(48), 2), 4UL);
}
