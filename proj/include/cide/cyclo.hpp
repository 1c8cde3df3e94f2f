#pragma once

// Cyclotomic extensions of Z/nZ, characters, Gauss and Jacobi sums, and the
// Jacobi-sum main stage.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cide/ring.hpp"

namespace cide {

/// v_2(n^2 - 1) for p = 2, n = 3 mod 4; v_p(n^(p-1) - 1) otherwise.
inline unsigned long saturation_exponent(unsigned long p, const Int& n) {
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) throw PreconditionError("saturation_exponent: p divides n");
    if (p == 2) {
        if (mod_ul(n, 4) == 3) return valuation(n * n - 1, 2);
        return valuation(n - 1, 2);
    }
    Int x;
    mpz_pow_ui(x.get_mpz_t(), n.get_mpz_t(), p - 1);
    return valuation(x - 1, p);
}

/// Multiplicative order of n modulo s (s >= 1, gcd(n, s) = 1).
inline unsigned long order_mod(const Int& n, unsigned long s) {
    if (s == 1) return 1;
    const unsigned long r = mod_ul(n, s);
    unsigned long x = r, k = 1;
    while (x != 1) {
        x = static_cast<unsigned long>(static_cast<unsigned __int128>(x) * r % s);
        if (++k > s) throw PreconditionError("order_mod: n not a unit mod s");
    }
    return k;
}

/// Phi_{p^k}(X) = Phi_p(X^(p^(k-1))).
inline Poly cyclotomic_prime_power(unsigned long p, unsigned long k, const Modulus& m) {
    const unsigned long step = powul(p, static_cast<unsigned>(k - 1));
    std::vector<Int> c(step * (p - 1) + 1, 0);
    for (unsigned long i = 0; i < p; ++i) c[i * step] = 1;
    return Poly(c, m);
}

inline unsigned long carmichael_lambda(unsigned long s) {
    unsigned long l = 1;
    for (auto [q, e] : factor_small(s)) {
        unsigned long v = powul(q, e - 1) * (q - 1);
        if (q == 2 && e >= 3) v /= 2;
        l = std::lcm(l, v);
    }
    return l;
}

/// Ring Z/nZ[X]/(Psi) with zeta = X a primitive s-th root of unity and
/// sigma(zeta) = zeta^n. degree() = order of n mod s.
struct CycloExt {
    QuotientRing ring;
    RingElt zeta;
    unsigned long s = 1;

    const Int& n() const { return ring.n(); }
    int degree() const { return ring.degree(); }
    const Poly& psi() const { return ring.modulus_poly(); }

    /// zeta_d^e for d | s, where zeta_d = zeta^(s/d).
    RingElt root_pow(unsigned long d, long e) const {
        const unsigned long ee = static_cast<unsigned long>(((e % static_cast<long>(d)) + static_cast<long>(d)) % static_cast<long>(d));
        return ring.pow(zeta, Int(s / d * ee));
    }
};

inline CycloExt trivial_extension(const Modulus& m) {
    QuotientRing R(Poly({-1, 1}, m));
    return CycloExt{R, R.one(), 1};
}

/// prod_{i<d} (T - x^(n^i)) with coefficients in R.
inline std::vector<RingElt> conjugate_product(const QuotientRing& R, const RingElt& x, int d) {
    std::vector<RingElt> prod{R.one()};
    RingElt c = x;
    for (int i = 0; i < d; ++i) {
        std::vector<RingElt> next(prod.size() + 1, R.zero());
        for (std::size_t j = 0; j < prod.size(); ++j) {
            next[j + 1] = R.add(next[j + 1], prod[j]);
            next[j] = R.sub(next[j], R.mul(prod[j], c));
        }
        prod = std::move(next);
        c = R.pow(c, R.n());
    }
    return prod;
}

/// Checks F1 (Psi = prod (X - zeta^(n^i))) and F2 (sigma cycles the
/// conjugates and zeta is a primitive s-th root).
inline std::variant<std::monostate, FactorFound, CompositeWitness> verify_extension(const CycloExt& e) {
    const QuotientRing& R = e.ring;
    const int d = R.degree();
    std::vector<RingElt> conj{e.zeta};
    for (int i = 1; i <= d; ++i) conj.push_back(R.pow(conj.back(), e.n()));
    if (!R.equal(conj[d], e.zeta)) return CompositeWitness{"sigma^d does not fix zeta"};
    const auto prod = conjugate_product(R, e.zeta, d);
    for (int j = 0; j <= d; ++j)
        if (!R.equal(prod[j], R.from_int(e.psi().coeff(j)))) return CompositeWitness{"Psi is not the product of the conjugates of zeta"};
    if (!R.equal(R.pow(e.zeta, Int(e.s)), R.one())) return CompositeWitness{"zeta^s != 1"};
    if (e.s > 1) {
        for (auto [p, k] : factor_small(e.s)) {
            (void)k;
            auto inv = R.try_invert(R.sub(R.pow(e.zeta, Int(e.s / p)), R.one()));
            if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
            if (holds<NotInvertible>(inv)) return CompositeWitness{"zeta is not primitive"};
        }
    }
    return std::monostate{};
}

/// Working extension for s = p^k. A degree-ord factor of the small base
/// cyclotomic polynomial gives a field candidate F; a random power of
/// exact order p^min(k, k(p)) in F has minimal polynomial Psi1, and
/// Psi(X) = Psi1(X^(p^(k - min(k, k(p))))). F1/F2 are then verified.
inline std::variant<CycloExt, CompositeWitness, FactorFound> build_working_extension(const Int& n, unsigned long p,
                                                                                     unsigned long k,
                                                                                     std::uint64_t seed = 1) {
    const unsigned long k0 = saturation_exponent(p, n);
    if (k < k0) throw PreconditionError("build_working_extension: k below saturation exponent");
    if (k * std::log2(static_cast<double>(p)) > 60) throw PreconditionError("build_working_extension: p^k too large");
    const Modulus m(n);
    const unsigned long s = powul(p, static_cast<unsigned>(k));
    if (s <= 2) {
        QuotientRing R(cyclotomic_prime_power(p, k == 0 ? 1 : k, m));
        if (k == 0) return trivial_extension(m);
        return CycloExt{R, R.theta(), s};
    }
    CounterRng rng(mix64(seed, s));
    // Base field candidate from Phi_p (or Phi_4 for p = 2).
    const unsigned long pb = p == 2 ? 4 : p;
    const Poly phib = p == 2 ? Poly({1, 0, 1}, m) : cyclotomic_prime_power(p, 1, m);
    const int d0 = static_cast<int>(order_mod(n, pb));
    Poly base = phib;
    if (d0 < phib.deg()) {
        auto split = equal_degree_factor(phib, d0, rng);
        if (auto* f = std::get_if<FactorFound>(&split)) return *f;
        if (auto* w = std::get_if<CompositeWitness>(&split)) return *w;
        auto& fs = std::get<std::vector<Poly>>(split);
        base = *std::min_element(fs.begin(), fs.end(),
                                 [](const Poly& a, const Poly& b) { return a.coeffs() < b.coeffs(); });
    }
    const QuotientRing F(base);
    const unsigned long k1 = std::min(k, k0);
    const unsigned long s1 = powul(p, static_cast<unsigned>(k1));
    Int fsize;
    mpz_pow_ui(fsize.get_mpz_t(), n.get_mpz_t(), static_cast<unsigned long>(d0));
    if (mpz_fdiv_ui(Int(fsize - 1).get_mpz_t(), s1) != 0) return CompositeWitness{"field size not 1 mod p^k"};
    const Int cof = (fsize - 1) / s1;
    Poly psi1;
    for (int tries = 0;; ++tries) {
        if (tries == 64) return CompositeWitness{"no element of the expected order"};
        std::vector<Int> c(d0);
        for (auto& x : c) x = rng.below(n);
        const RingElt a = F.reduce(Poly(c, m));
        if (F.is_zero(a)) continue;
        const RingElt b = F.pow(a, cof);
        if (F.equal(F.pow(b, Int(s1 / p)), F.one())) continue;
        if (!F.equal(F.pow(b, Int(s1)), F.one())) return CompositeWitness{"element order exceeds the field bound"};
        const int dd = static_cast<int>(order_mod(n, s1));
        auto prod = conjugate_product(F, b, dd);
        std::vector<Int> coeffs;
        for (const auto& e : prod) {
            auto cs = F.coords(e);
            for (std::size_t i = 1; i < cs.size(); ++i)
                if (cs[i] != 0) return CompositeWitness{"minimal polynomial has coefficients outside Z/nZ"};
            coeffs.push_back(cs.empty() ? Int(0) : cs[0]);
        }
        psi1 = Poly(coeffs, m);
        break;
    }
    const unsigned long lift = s / s1;
    std::vector<Int> big(static_cast<std::size_t>(psi1.deg()) * lift + 1, 0);
    for (int i = 0; i <= psi1.deg(); ++i) big[i * lift] = psi1.coeff(i);
    QuotientRing R(Poly(big, m));
    CycloExt e{R, R.theta(), s};
    auto v = verify_extension(e);
    if (auto* f = std::get_if<FactorFound>(&v)) return *f;
    if (auto* w = std::get_if<CompositeWitness>(&v)) return *w;
    return e;
}

struct NotCoprime {};

/// Extension for s1*s2 with zeta = zeta1*zeta2. The minimal polynomial M
/// of zeta1 (x) zeta2 in the tensor basis comes from elimination over
/// Z/nZ; the ring is cut down to one degree-ord factor of M.
inline std::variant<CycloExt, NotCoprime, FactorFound, CompositeWitness> compose_extensions(const CycloExt& e1,
                                                                                            const CycloExt& e2,
                                                                                            std::uint64_t seed = 1) {
    if (std::gcd(e1.s, e2.s) != 1) return NotCoprime{};
    if (e2.s == 1) return e1;
    if (e1.s == 1) return e2;
    const Int& n = e1.n();
    const Modulus& m = e1.ring.base();
    const int d1 = e1.degree(), d2 = e2.degree();
    const int dim = d1 * d2;
    const unsigned long s = e1.s * e2.s;
    // Echelon basis: reduced vector (pivot normalized to 1) and the power combination producing it.
    struct Row {
        int pivot;
        std::vector<Int> v, comb;
    };
    std::vector<Row> basis;
    std::vector<Int> minpoly;
    RingElt z1 = e1.ring.one(), z2 = e2.ring.one();
    for (int i = 0; i <= dim && minpoly.empty(); ++i) {
        auto c1 = e1.ring.coords(z1), c2 = e2.ring.coords(z2);
        std::vector<Int> v(dim), comb(dim + 1, 0);
        for (int a = 0; a < d1; ++a)
            for (int b = 0; b < d2; ++b) v[a * d2 + b] = mulmod(c1[a], c2[b], n);
        comb[i] = 1;
        for (const auto& r : basis) {
            const Int f = v[r.pivot];
            if (f == 0) continue;
            for (int j = 0; j < dim; ++j) v[j] = mod(v[j] - f * r.v[j], n);
            for (int j = 0; j <= dim; ++j) comb[j] = mod(comb[j] - f * r.comb[j], n);
        }
        auto it = std::find_if(v.begin(), v.end(), [](const Int& x) { return x != 0; });
        if (it == v.end()) {
            minpoly.assign(comb.begin(), comb.begin() + i + 1);
            break;
        }
        auto inv = try_invert(*it, n);
        if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
        const Int u = std::get<Unit>(inv).inverse;
        for (auto& x : v) x = mulmod(x, u, n);
        for (auto& x : comb) x = mulmod(x, u, n);
        basis.push_back({static_cast<int>(it - v.begin()), std::move(v), std::move(comb)});
        z1 = e1.ring.mul(z1, e1.zeta);
        z2 = e2.ring.mul(z2, e2.zeta);
    }
    if (minpoly.empty()) return CompositeWitness{"composed root has no minimal polynomial"};
    Poly M(minpoly, m);
    const int deg = static_cast<int>(order_mod(n, s));
    if (M.deg() % deg) return CompositeWitness{"minimal polynomial degree is not a multiple of the order"};
    if (M.deg() > deg) {
        CounterRng rng(mix64(seed, s));
        auto split = equal_degree_factor(M, deg, rng);
        if (auto* f = std::get_if<FactorFound>(&split)) return *f;
        if (auto* w = std::get_if<CompositeWitness>(&split)) return *w;
        auto& fs = std::get<std::vector<Poly>>(split);
        M = *std::min_element(fs.begin(), fs.end(), [](const Poly& a, const Poly& b) { return a.coeffs() < b.coeffs(); });
    }
    QuotientRing R(M);
    CycloExt e{R, R.theta(), s};
    auto v = verify_extension(e);
    if (auto* f = std::get_if<FactorFound>(&v)) return *f;
    if (auto* w = std::get_if<CompositeWitness>(&v)) return *w;
    return e;
}

/// Character of prime conductor q and order `order` | q-1:
/// chi(g^i) = zeta_order^(i * power), g the least primitive root mod q.
struct CharacterData {
    unsigned long q = 0;
    unsigned long order = 1;
    unsigned long power = 1;
    unsigned long g = 0;
    std::vector<unsigned long> dlog;  // dlog[x] for 1 <= x < q

    /// Exponent of chi(x) in Z/order; x must be a unit mod q.
    unsigned long exp_of(unsigned long x) const { return dlog[x % q] * power % order; }
    CharacterData pow(unsigned long k) const {
        CharacterData c = *this;
        c.power = power * (k % order) % order;
        return c;
    }
    bool trivial() const { return power % order == 0; }
};

inline CharacterData make_character(unsigned long q, unsigned long order, unsigned long power = 1) {
    if (!is_small_prime(q) || (q - 1) % order) throw PreconditionError("make_character: order must divide q-1");
    CharacterData c{q, order, power % order, primitive_root(q), std::vector<unsigned long>(q, 0)};
    unsigned long x = 1;
    for (unsigned long i = 0; i < q - 1; ++i) {
        c.dlog[x] = i;
        x = x * c.g % q;
    }
    return c;
}

/// Ring over R_p adjoining a primitive q-th root xi: R_p[Y]/(Phi_q(Y)).
inline SimpleExt<QuotientRing> adjoin_root_of_unity(const CycloExt& e, unsigned long q) {
    return SimpleExt<QuotientRing>(e.ring, cyclotomic_prime_power(q, 1, e.ring.base()));
}

/// tau(chi) = sum_x chi(x) xi^x in R_p[xi].
inline std::vector<RingElt> gauss_sum(const CharacterData& chi, const SimpleExt<QuotientRing>& T, const CycloExt& e) {
    auto acc = T.zero();
    auto xi = T.gen(), xp = xi;
    for (unsigned long x = 1; x < chi.q; ++x) {
        acc = T.add(acc, T.scale_base(xp, e.root_pow(chi.order, static_cast<long>(chi.exp_of(x)))));
        xp = T.mul(xp, xi);
    }
    return acc;
}

/// j(chi^a, chi^b) = sum_{x != 0, 1} chi^a(x) chi^b(1 - x) in R_p.
inline RingElt jacobi_sum(const CharacterData& chi, unsigned long a, unsigned long b, const CycloExt& e) {
    std::vector<long> cnt(chi.order, 0);
    for (unsigned long x = 2; x < chi.q; ++x) {
        const unsigned long ea = chi.exp_of(x) * a % chi.order;
        const unsigned long eb = chi.exp_of(chi.q + 1 - x) * b % chi.order;
        ++cnt[(ea + eb) % chi.order];
    }
    RingElt acc = e.ring.zero();
    for (unsigned long k = 0; k < chi.order; ++k)
        if (cnt[k]) acc = e.ring.add(acc, e.ring.scale(e.root_pow(chi.order, static_cast<long>(k)), Int(cnt[k])));
    return acc;
}

/// J_1..J_d with J_{v+1} = J_v j(chi, chi^v) and J_d = chi(-1) q J_{d-1}.
inline std::vector<RingElt> multiple_jacobi_sums(const CharacterData& chi, const CycloExt& e) {
    const unsigned long d = chi.order;
    if (d < 2 || chi.trivial()) throw PreconditionError("multiple_jacobi_sums: character must be nontrivial");
    std::vector<RingElt> J{e.ring.one()};
    for (unsigned long v = 1; v + 1 < d; ++v) J.push_back(e.ring.mul(J.back(), jacobi_sum(chi, 1, v, e)));
    const RingElt chi_m1 = e.root_pow(d, static_cast<long>(chi.exp_of(chi.q - 1)));
    J.push_back(e.ring.scale(e.ring.mul(J.back(), chi_m1), Int(chi.q)));
    return J;
}

/// e with x = zeta_d^e, if any.
inline std::optional<unsigned long> root_of_unity_exponent(const RingElt& x, unsigned long d, const CycloExt& e) {
    const RingElt z = e.root_pow(d, 1);
    RingElt cur = e.ring.one();
    for (unsigned long k = 0; k < d; ++k) {
        if (e.ring.equal(cur, x)) return k;
        cur = e.ring.mul(cur, z);
    }
    return std::nullopt;
}

struct CppRecord {
    unsigned long q = 0;
    unsigned long pk = 0;
    Int b;
    unsigned long r = 0;
    unsigned long eta = 0;
};

/// One character of the main stage: J_{p^k}^b J_r = zeta_{p^k}^eta with n = b p^k + r.
inline std::variant<CppRecord, CompositeWitness> cpp_character(const Int& n, const CharacterData& chi,
                                                               const CycloExt& e) {
    const unsigned long pk = chi.order;
    const Int b = n / pk;
    const unsigned long r = mod_ul(n, pk);
    auto J = multiple_jacobi_sums(chi, e);
    RingElt lhs = e.ring.pow(J[pk - 1], b);
    if (r > 0) lhs = e.ring.mul(lhs, J[r - 1]);
    auto eta = root_of_unity_exponent(lhs, pk, e);
    if (!eta) return CompositeWitness{"Jacobi sum power is not a root of unity (q=" + std::to_string(chi.q) +
                                      ", p^k=" + std::to_string(pk) + ")"};
    return CppRecord{chi.q, pk, b, r, *eta};
}

struct InsufficientTest {};

using CppOutcome = std::variant<std::vector<CppRecord>, InsufficientTest, CompositeWitness, FactorFound>;

/// Main stage over a list of characters. exts maps p to the working
/// extension R_p. Requires, per prime p present, one primitive eta.
inline CppOutcome cpp_main_stage(const Int& n, const std::vector<CharacterData>& chars,
                                 const std::map<unsigned long, CycloExt>& exts) {
    if (chars.empty()) return InsufficientTest{};
    std::vector<CppRecord> out;
    std::map<unsigned long, bool> primitive;
    for (const auto& chi : chars) {
        const unsigned long p = factor_small(chi.order).front().first;
        auto it = exts.find(p);
        if (it == exts.end()) throw PreconditionError("cpp_main_stage: missing working extension");
        auto rec = cpp_character(n, chi, it->second);
        if (auto* w = std::get_if<CompositeWitness>(&rec)) return *w;
        const auto& r = std::get<CppRecord>(rec);
        primitive[p] = primitive[p] || (r.eta % p != 0);
        out.push_back(r);
    }
    for (auto [p, ok] : primitive)
        if (!ok) return InsufficientTest{};
    return out;
}

/// Primes q with q - 1 | t, ascending.
inline std::vector<unsigned long> cyclotomy_primes(unsigned long t) {
    std::vector<unsigned long> out;
    for (unsigned long d = 1; d <= t; ++d)
        if (t % d == 0 && is_small_prime(d + 1)) out.push_back(d + 1);
    return out;
}

struct Parameters {
    unsigned long s = 1, t = 1;
    std::vector<unsigned long> primes;
};

struct ParameterSearchExhausted {};

inline const std::vector<unsigned long>& candidate_t_values() {
    static const std::vector<unsigned long> v = {2, 4, 6, 12, 60, 120, 180, 240, 360, 720, 840, 1260, 1680, 2520, 5040};
    return v;
}

/// Greedy s = prod q over q - 1 | t until s > floor; t is then lambda(s).
/// Primes dividing `avoid` are skipped.
inline std::optional<Parameters> parameters_for(unsigned long t, const Int& floor, const Int& avoid = 1) {
    Int s = 1;
    std::vector<unsigned long> qs;
    for (unsigned long q : cyclotomy_primes(t)) {
        if (mpz_divisible_ui_p(avoid.get_mpz_t(), q)) continue;
        qs.push_back(q);
        s *= q;
        if (s > floor) break;
    }
    if (s <= floor || !s.fits_ulong_p()) return std::nullopt;
    const unsigned long su = s.get_ui();
    return Parameters{su, carmichael_lambda(su), qs};
}

inline std::variant<Parameters, ParameterSearchExhausted> select_parameters(const Int& floor, const Int& avoid = 1) {
    for (unsigned long t : candidate_t_values())
        if (auto p = parameters_for(t, floor, avoid)) return *p;
    return ParameterSearchExhausted{};
}

}  // namespace cide
