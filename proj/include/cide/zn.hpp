#pragma once

// Arithmetic over Z/nZ where every failed inversion either proves the
// element is zero or hands back a factor of n.

#include <memory>
#include <variant>
#include <vector>

#include "cide/outcome.hpp"

namespace cide {

class Modulus {
public:
    /// Placeholder for default-constructed containers; must be assigned before use.
    Modulus() = default;
    explicit Modulus(Int n) : n_(std::make_shared<const Int>(std::move(n))) {
        if (*n_ < 2) throw PreconditionError("modulus must be >= 2");
    }
    const Int& value() const { return *n_; }
    bool operator==(const Modulus& o) const { return *n_ == *o.n_; }

private:
    std::shared_ptr<const Int> n_;
};

/// Residue in canonical form 0 <= value < n.
struct ZnElt {
    Int value;
    Modulus modulus;

    ZnElt(const Int& v, Modulus m) : value(v), modulus(std::move(m)) {
        mpz_mod(value.get_mpz_t(), value.get_mpz_t(), modulus.value().get_mpz_t());
    }
    bool operator==(const ZnElt& o) const { return value == o.value && modulus == o.modulus; }
};

inline Int mod(const Int& a, const Int& n) {
    Int r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline Int mulmod(const Int& a, const Int& b, const Int& n) {
    count_ops(1);
    Int r = a * b;
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline Int powmod(const Int& base, const Int& e, const Int& n) {
    if (e < 0) throw PreconditionError("powmod: negative exponent");
    count_ops(2 * mpz_sizeinbase(e.get_mpz_t(), 2));
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline Int gcd(const Int& a, const Int& b) {
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

struct Unit {
    Int inverse;
};
struct ZeroElement {};

using InversionOutcome = std::variant<Unit, FactorFound, ZeroElement>;

/// Inverse of x mod n, or the gcd(x, n) when it is nontrivial.
inline InversionOutcome try_invert(const Int& x, const Int& n) {
    const Int v = mod(x, n);
    if (v == 0) return ZeroElement{};
    Int g = gcd(v, n);
    if (g != 1) return FactorFound{g};
    Int inv;
    mpz_invert(inv.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
    return Unit{inv};
}

inline InversionOutcome try_invert(const ZnElt& x) { return try_invert(x.value, x.modulus.value()); }

/// Jacobi symbol (a/n) for odd positive n.
inline int jacobi_symbol(const Int& a, const Int& n) {
    if (n <= 0 || mpz_even_p(n.get_mpz_t())) throw PreconditionError("jacobi_symbol: n must be odd positive");
    return mpz_jacobi(mod(a, n).get_mpz_t(), n.get_mpz_t());
}

/// One Miller-Rabin round with an explicit base. false means composite.
inline bool miller_rabin_base(const Int& n, const Int& base) {
    if (n < 3 || mpz_even_p(n.get_mpz_t())) throw PreconditionError("miller_rabin: n must be odd >= 3");
    const Int nm1 = n - 1;
    Int d = nm1;
    unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
    Int x = powmod(mod(base, n), d, n);
    if (x == 1 || x == nm1 || x == 0) return x != 0 || mod(base, n) == 0;
    for (unsigned long i = 1; i < s; ++i) {
        x = mulmod(x, x, n);
        if (x == nm1) return true;
        if (x == 1) return false;
    }
    return false;
}

inline constexpr int kDefaultRounds = 20;

/// i-th Miller-Rabin base for the given seed, in [2, n-2].
inline Int mr_base(const Int& n, std::uint64_t seed, std::uint64_t i) {
    CounterRng rng(mix64(seed, 0xB45E0000ULL + i));
    return 2 + rng.below(n - 3);
}

/// Strong-pseudoprime test with `rounds` bases derived from `seed`. When it
/// fails, `witness` (if given) receives the failing base.
inline bool strong_pseudoprime(const Int& n, int rounds = kDefaultRounds, std::uint64_t seed = 1,
                               Int* witness = nullptr) {
    if (n < 3 || mpz_even_p(n.get_mpz_t())) throw PreconditionError("strong_pseudoprime: n must be odd >= 3");
    if (n == 3) return true;
    for (int i = 0; i < rounds; ++i) {
        const Int b = mr_base(n, seed, static_cast<std::uint64_t>(i));
        if (!miller_rabin_base(n, b)) {
            if (witness) *witness = b;
            return false;
        }
    }
    return true;
}

struct SqrtRoot {
    Int root;
};
struct NotSquare {};

using SqrtOutcome = std::variant<SqrtRoot, NotSquare, FactorFound, CompositeWitness>;

/// Tonelli-Shanks, treating n as prime. Anything that would be impossible
/// modulo a prime is reported instead of hidden.
inline SqrtOutcome sqrt_mod(const Int& a_in, const Int& n) {
    if (n < 3 || mpz_even_p(n.get_mpz_t())) throw PreconditionError("sqrt_mod: n must be odd >= 3");
    const Int a = mod(a_in, n);
    if (a == 0) return SqrtRoot{0};
    if (Int g = gcd(a, n); g != 1) return FactorFound{g};
    const Int nm1 = n - 1;
    const Int euler = powmod(a, nm1 / 2, n);
    if (euler == nm1) return NotSquare{};
    if (euler != 1) return CompositeWitness{"Euler criterion value is neither 1 nor -1"};

    Int q = nm1;
    unsigned long s = mpz_scan1(q.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(q.get_mpz_t(), q.get_mpz_t(), s);

    // Least quadratic non-residue.
    Int z = 2;
    for (;; ++z) {
        if (z >= n) return CompositeWitness{"no quadratic non-residue found"};
        if (Int g = gcd(z, n); g != 1) return FactorFound{g};
        const Int e = powmod(z, nm1 / 2, n);
        if (e == nm1) break;
        if (e != 1) return CompositeWitness{"Euler criterion value is neither 1 nor -1"};
    }

    Int c = powmod(z, q, n);
    Int r = powmod(a, (q + 1) / 2, n);
    Int t = powmod(a, q, n);
    unsigned long m = s;
    while (t != 1) {
        unsigned long i = 0;
        Int tt = t;
        while (tt != 1) {
            tt = mulmod(tt, tt, n);
            if (++i == m) return CompositeWitness{"Tonelli-Shanks order search exceeded 2-adic bound"};
        }
        Int b = c;
        for (unsigned long j = 0; j + i + 1 < m; ++j) b = mulmod(b, b, n);
        m = i;
        c = mulmod(b, b, n);
        t = mulmod(t, c, n);
        r = mulmod(r, b, n);
    }
    if (mulmod(r, r, n) != a) return CompositeWitness{"square root fails to square back"};
    return SqrtRoot{r};
}

inline bool is_perfect_power(const Int& n) { return mpz_perfect_power_p(n.get_mpz_t()) != 0; }

/// floor(n^(1/k)).
inline Int iroot(const Int& n, unsigned long k) {
    Int r;
    mpz_root(r.get_mpz_t(), n.get_mpz_t(), k);
    return r;
}

/// p-adic valuation of x != 0.
inline unsigned long valuation(Int x, unsigned long p) {
    if (x == 0) throw PreconditionError("valuation of zero");
    unsigned long v = 0;
    while (mpz_divisible_ui_p(x.get_mpz_t(), p)) {
        mpz_divexact_ui(x.get_mpz_t(), x.get_mpz_t(), p);
        ++v;
    }
    return v;
}

inline bool is_small_prime(unsigned long p) {
    if (p < 2) return false;
    for (unsigned long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

/// Prime factorization of a machine-size integer by trial division.
inline std::vector<std::pair<unsigned long, unsigned>> factor_small(unsigned long x) {
    std::vector<std::pair<unsigned long, unsigned>> out;
    for (unsigned long d = 2; d * d <= x; ++d) {
        if (x % d) continue;
        unsigned e = 0;
        while (x % d == 0) x /= d, ++e;
        out.emplace_back(d, e);
    }
    if (x > 1) out.emplace_back(x, 1);
    return out;
}

inline unsigned long powul(unsigned long b, unsigned e) {
    unsigned long r = 1;
    while (e--) r *= b;
    return r;
}

inline unsigned long powmod_ul(unsigned long b, unsigned long e, unsigned long m) {
    unsigned __int128 r = 1 % m, x = b % m;
    while (e) {
        if (e & 1) r = r * x % m;
        x = x * x % m;
        e >>= 1;
    }
    return static_cast<unsigned long>(r);
}

/// Least primitive root modulo a small prime.
inline unsigned long primitive_root(unsigned long p) {
    if (p == 2) return 1;
    const auto fac = factor_small(p - 1);
    for (unsigned long g = 2; g < p; ++g) {
        bool ok = true;
        for (auto [q, e] : fac) {
            (void)e;
            if (powmod_ul(g, (p - 1) / q, p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    throw PreconditionError("primitive_root: no generator (is p prime?)");
}

inline unsigned long ul(const Int& x) { return x.get_ui(); }

/// x mod m for a machine-size m, as a machine integer.
inline unsigned long mod_ul(const Int& x, unsigned long m) { return mpz_fdiv_ui(x.get_mpz_t(), m); }

}  // namespace cide
