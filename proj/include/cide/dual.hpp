#pragma once

// Dual elliptic pseudoprime search: a partner m = N(mu) for n = N(mu + 1),
// with CM curves of sizes m (mod n) and n (mod m).

#include <optional>

#include "cide/cm.hpp"
#include "cide/ec.hpp"

namespace cide {

struct TwistedPoint {
    CurveParams curve;  // Y^2 = X^3 + A l^2 X + B l^3
    CurvePoint point;   // (l x0, l^2)
    Int lambda;
};

/// Walks x0 = start, start+1, ... until l = f(x0) has Jacobi symbol 1.
inline std::variant<TwistedPoint, FactorFound> find_point(const CurveParams& E, const Int& start,
                                                          long max_steps = 10000) {
    const Int& n = E.n();
    Int x0 = mod(start, n);
    for (long i = 0; i < max_steps; ++i, x0 = mod(x0 + 1, n)) {
        const Int l = E.f(x0);
        const int j = jacobi_symbol(l, n);
        if (j == 0) {
            if (Int g = gcd(l, n); g != n) return FactorFound{g};
            continue;
        }
        if (j != 1) continue;
        const Int l2 = mulmod(l, l, n);
        auto tw = make_curve(mulmod(E.A, l2, n), mulmod(E.B, mulmod(l2, l, n), n), n);
        if (auto* f = std::get_if<FactorFound>(&tw)) return *f;
        return TwistedPoint{std::get<CurveParams>(tw), make_point(mulmod(l, x0, n), l2, std::get<CurveParams>(tw)), l};
    }
    throw PreconditionError("find_point: no suitable abscissa in range");
}

inline const std::vector<unsigned long>& small_primes_1000() {
    static const std::vector<unsigned long> v = [] {
        std::vector<unsigned long> p;
        for (unsigned long q = 2; q < 1000; ++q)
            if (is_small_prime(q)) p.push_back(q);
        return p;
    }();
    return v;
}

/// [size]P = O and [size/q]P != O for the primes q < 1000 dividing size
/// (and for size itself when it is such a prime).
inline EllTestOutcome order_surrogate_test(const CurveParams& E, const CurvePoint& P, const Int& size) {
    auto r = elliptic_fermat_test(E, P, size);
    if (!holds<Pass>(r)) return r;
    if (std::get<Pass>(r).degenerate) return CompositeWitness{"point at infinity"};
    for (unsigned long q : small_primes_1000()) {
        if (!mpz_divisible_ui_p(size.get_mpz_t(), q)) continue;
        auto s = scalar_mul(size / q, P, E);
        if (auto* f = std::get_if<FactorFound>(&s)) return *f;
        if (std::get<CurvePoint>(s).infinity) return CompositeWitness{"point order is a proper divisor of the size"};
    }
    return Pass{};
}

struct DualPair {
    Int m, n;
    QuadOrder order;
    QuadInt mu;         // N(mu) = m, N(mu + 1) = n
    int epsilon = 1;
    CurveParams curve_m, curve_n;  // curve_m is over Z/mZ with n points, curve_n over Z/nZ with m points
    CurvePoint point_m, point_n;
    Int j_m, j_n;
};

struct NotFound {
    std::string reason;
};

/// Twist selectors c such that curve_from_j(j, c, n) runs over all twists.
inline std::vector<Int> twist_selectors(const QuadOrder& O, const Int& n) {
    Int g = 2;
    for (;; ++g) {
        if (g >= n) return {1};
        if (jacobi_symbol(g, n) != -1) continue;
        if (O.D == -3 && mod_ul(n, 3) == 1 && powmod(g, (n - 1) / 3, n) == 1) continue;
        break;
    }
    const int count = O.D == -3 ? 6 : O.D == -4 ? 4 : 2;
    std::vector<Int> out{1};
    for (int i = 1; i < count; ++i) out.push_back(mulmod(out.back(), g, n));
    return out;
}

struct SideResult {
    CurveParams curve;
    CurvePoint point;
    Int j;
};

/// A curve over Z/NZ with the given j-invariant and size, with a point
/// passing the order surrogate. budget counts point attempts.
inline std::variant<SideResult, NotFound, FactorFound, CompositeWitness> build_side(const Int& N, const QuadOrder& O,
                                                                                  const Int& size, std::uint64_t seed,
                                                                                  long& budget) {
    const Modulus mod_n(N);
    auto roots = roots_mod(class_polynomial(O).mod_n(mod_n), seed);
    if (auto* f = std::get_if<FactorFound>(&roots)) return *f;
    if (auto* w = std::get_if<CompositeWitness>(&roots)) return *w;
    const auto& js = std::get<std::vector<Int>>(roots);
    if (js.empty()) return CompositeWitness{"class polynomial has no root although the order splits"};
    const Int j = js.front();
    CounterRng rng(mix64(seed, mod_ul(N, 1000003)));
    for (const Int& c : twist_selectors(O, N)) {
        auto Ev = curve_from_j(j, c, N);
        if (auto* f = std::get_if<FactorFound>(&Ev)) return *f;
        const auto& E = std::get<CurveParams>(Ev);
        // A wrong twist fails the Fermat test for nearly every point; the
        // right one passes for every point of full order.
        int passes = 0;
        std::optional<SideResult> found;
        for (int attempt = 0; attempt < 4 && passes < 3; ++attempt) {
            if (budget-- <= 0) return NotFound{"budget exhausted"};
            auto tp = find_point(E, rng.below(N));
            if (auto* f = std::get_if<FactorFound>(&tp)) return *f;
            const auto& T = std::get<TwistedPoint>(tp);
            auto r = elliptic_fermat_test(T.curve, T.point, size);
            if (auto* f = std::get_if<FactorFound>(&r)) return *f;
            if (!holds<Pass>(r)) break;
            ++passes;
            if (!found && holds<Pass>(order_surrogate_test(T.curve, T.point, size))) found = SideResult{T.curve, T.point, j};
        }
        if (passes >= 3 && found) return *found;
    }
    return NotFound{"no twist of the requested size"};
}

/// Fundamental discriminants with |D| <= bound: class number <= 8 first,
/// each group by ascending |D|.
inline std::vector<QuadOrder> default_orders(long bound) {
    std::vector<QuadOrder> small, large;
    for (long D = -3; D >= -bound; --D) {
        if (!is_fundamental_discriminant(D)) continue;
        (class_number(D) <= 8 ? small : large).push_back(make_order(D));
    }
    small.insert(small.end(), large.begin(), large.end());
    return small;
}

using DualOutcome = std::variant<DualPair, NotFound, FactorFound, CompositeWitness>;

inline DualOutcome search_dual(const Int& n, const std::vector<QuadOrder>& orders, long budget, std::uint64_t seed) {
    if (n < 5 || gcd(n, 6) != 1) throw PreconditionError("search_dual: need gcd(n, 6) = 1");
    if (!strong_pseudoprime(n, kDefaultRounds, seed)) return CompositeWitness{"n is not a strong pseudoprime"};
    for (const auto& O : orders) {
        auto split = cornacchia_split(n, O);
        if (auto* f = std::get_if<FactorFound>(&split)) return *f;
        if (auto* w = std::get_if<CompositeWitness>(&split)) return *w;
        if (holds<NoSplit>(split)) continue;
        const QuadInt nu = std::get<QuadInt>(split);
        const QuadInt one = QuadInt::integer(1, O.D);
        for (const auto& u : units(O)) {
            const QuadInt mu = u * nu - one;
            const Int m = mu.norm();
            if (m < 5 || gcd(m, 6) != 1 || m == n) continue;
            if (!strong_pseudoprime(m, kDefaultRounds, seed)) continue;
            if (gcd(m, mu.trace()) != 1 || gcd(n, (mu + one).trace()) != 1) continue;
            if (gcd(m, Int(O.D)) != 1) continue;
            if (budget <= 0) return NotFound{"budget exhausted"};
            auto sn = build_side(n, O, m, seed, budget);
            if (auto* f = std::get_if<FactorFound>(&sn)) return *f;
            if (auto* w = std::get_if<CompositeWitness>(&sn)) return *w;
            if (!holds<SideResult>(sn)) continue;
            auto sm = build_side(m, O, n, seed, budget);
            // A failure on the m side says nothing about n.
            if (!holds<SideResult>(sm)) continue;
            const auto& a = std::get<SideResult>(sm);
            const auto& b = std::get<SideResult>(sn);
            return DualPair{m, n, O, mu, 1, a.curve, b.curve, a.point, b.point, a.j, b.j};
        }
    }
    return NotFound{"no dual partner in the order list"};
}

/// Re-checks a stored pair; returns the failing clause.
inline std::optional<std::string> check_dual_pair(const DualPair& p) {
    const QuadInt one = QuadInt::integer(1, p.order.D);
    if (p.epsilon != 1) return "epsilon";
    if (!p.mu.valid() || p.mu.D != p.order.D || !is_fundamental_discriminant(p.order.D)) return "order";
    if (p.mu.norm() != p.m || (p.mu + one).norm() != p.n) return "norm";
    if (gcd(p.m, p.mu.trace()) != 1 || gcd(p.n, (p.mu + one).trace()) != 1) return "coprim";
    if (gcd(p.m, 6) != 1 || gcd(p.n, 6) != 1) return "small-factor";
    if (is_perfect_power(p.m) || is_perfect_power(p.n)) return "perfect-power";
    if (!(p.curve_m.n() == p.m) || !(p.curve_n.n() == p.n)) return "curve-modulus";
    if (p.curve_m.discriminant() == 0 || p.curve_n.discriminant() == 0) return "singular";
    if (!on_curve(p.point_m, p.curve_m) || !on_curve(p.point_n, p.curve_n)) return "on-curve";
    if (auto v = check_association(p.curve_m, p.order, p.mu, p.j_m); holds<Violation>(v))
        return "association-m:" + std::get<Violation>(v).clause;
    if (auto v = check_association(p.curve_n, p.order, p.mu + one, p.j_n); holds<Violation>(v))
        return "association-n:" + std::get<Violation>(v).clause;
    if (!holds<Pass>(order_surrogate_test(p.curve_m, p.point_m, p.n))) return "fermat-m";
    if (!holds<Pass>(order_surrogate_test(p.curve_n, p.point_n, p.m))) return "fermat-n";
    return std::nullopt;
}

}  // namespace cide
