#pragma once

// Elkies factors of psi_l, elliptic Gauss sums over the Elkies ring, and
// the elliptic extension test that pins down the Frobenius eigenvalue.

#include "cide/cm.hpp"
#include "cide/cyclo.hpp"
#include "cide/ec.hpp"

namespace cide {

/// Eigenspace factor gcd(psi_l, X^n - g_x(X)) of degree (l-1)/2.
inline std::variant<Poly, CompositeWitness, FactorFound> elkies_factor(const CurveParams& E, unsigned long ell,
                                                                        unsigned long x_eig) {
    const Int& n = E.n();
    if (ell < 5 || !is_small_prime(ell)) throw PreconditionError("elkies_factor: l must be a prime >= 5");
    const unsigned long lam = x_eig % ell;
    const unsigned long n_l = mod_ul(n, ell);
    if (lam == 0) throw PreconditionError("elkies_factor: eigenvalue must be a unit mod l");
    if (lam * lam % ell == n_l || (lam * lam + n_l) % ell == 0)
        throw PreconditionError("elkies_factor: eigenvalue is double or paired with its negative");
    auto mon = try_make_monic(division_poly(Int(ell), E));
    if (auto* f = std::get_if<FactorFound>(&mon)) return *f;
    const Poly psi = std::get<Poly>(mon);
    QuotientRing R(psi);
    const Poly h1 = x_pow_mod(n, R);
    DivisionValues<QuotientRing> dv(R, E, R.theta());
    const Int li(std::min(lam, ell - lam));
    auto inv = R.try_invert(dv.psi_sq(li));
    if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
    if (holds<NotInvertible>(inv)) return CompositeWitness{"psi_x shares a factor with psi_l"};
    const Poly h2 = R.mul(dv.phi(li), std::get<RingElt>(inv));
    auto g = try_gcd(psi, R.sub(h1, h2));
    if (auto* f = std::get_if<FactorFound>(&g)) return *f;
    Poly F = std::get<Poly>(g);
    if (F.deg() != static_cast<int>((ell - 1) / 2))
        return CompositeWitness{"Elkies factor has degree " + std::to_string(F.deg())};
    return F;
}

/// Torsion algebra on an Elkies factor with the multiples [x]P = (g_x, w_x Omega)
/// for 1 <= x < l.
struct ElkiesRing {
    unsigned long ell = 0;
    TorsionAlgebra alg;
    std::vector<RingElt> g, w;  // index x - 1

    const QuotientRing& ring() const { return alg.ring; }
    const Poly& factor() const { return alg.rho; }
};

/// Builds the ring and re-validates F(T) = prod_{i <= (l-1)/2} (T - g_i(Theta)).
inline std::variant<ElkiesRing, CompositeWitness, FactorFound> make_elkies_ring(const CurveParams& E,
                                                                                unsigned long ell, const Poly& F) {
    auto a = build_torsion_algebra(F, Int(ell), E, true);
    if (auto* f = std::get_if<FactorFound>(&a)) return *f;
    if (auto* w = std::get_if<CompositeWitness>(&a)) return *w;
    if (holds<NotADivisor>(a)) return CompositeWitness{"Elkies factor does not divide psi_l"};
    ElkiesRing er{ell, std::get<TorsionAlgebra>(a), {}, {}};
    auto mult = torsion_multiples(er.alg, static_cast<long>(ell - 1));
    if (auto* f = std::get_if<FactorFound>(&mult)) return *f;
    if (auto* w = std::get_if<CompositeWitness>(&mult)) return *w;
    for (auto& [gx, wx] : std::get<std::vector<std::pair<RingElt, RingElt>>>(mult)) {
        er.g.push_back(std::move(gx));
        er.w.push_back(std::move(wx));
    }
    const QuotientRing& R = er.ring();
    if (!R.equal(er.g.back(), R.theta()) || !R.equal(er.w.back(), R.from_int(-1)))
        return CompositeWitness{"[l-1]P is not -P"};
    std::vector<RingElt> prod{R.one()};
    for (unsigned long i = 1; i <= (ell - 1) / 2; ++i) {
        std::vector<RingElt> next(prod.size() + 1, R.zero());
        for (std::size_t j = 0; j < prod.size(); ++j) {
            next[j + 1] = R.add(next[j + 1], prod[j]);
            next[j] = R.sub(next[j], R.mul(prod[j], er.g[i - 1]));
        }
        prod = std::move(next);
    }
    for (int j = 0; j <= F.deg(); ++j)
        if (!R.equal(prod[j], R.from_int(F.coeff(j))))
            return CompositeWitness{"elementary symmetric functions of the abscissae are not in Z/nZ"};
    return er;
}

/// R_p[Theta] = R_p[Z]/(F(Z)), where the elliptic Gauss sums live.
using GaussRing = SimpleExt<QuotientRing>;

inline GaussRing gauss_ring(const ElkiesRing& er, const CycloExt& e) { return GaussRing(e.ring, er.factor()); }

/// tau_e(chi) = sum_x chi(x) g_x(Theta) for chi of odd order.
inline GaussRing::Elt elliptic_gauss_sum_odd(const CharacterData& chi, const ElkiesRing& er, const CycloExt& e,
                                             const GaussRing& T) {
    if (chi.order % 2 == 0) throw PreconditionError("elliptic_gauss_sum_odd: character order must be odd");
    if (chi.q != er.ell) throw PreconditionError("elliptic_gauss_sum_odd: conductor must be l");
    auto acc = T.zero();
    for (unsigned long x = 1; x < er.ell; ++x)
        acc = T.add(acc, T.scale_base(T.from_scalars(er.g[x - 1]), e.root_pow(chi.order, static_cast<long>(chi.exp_of(x)))));
    return acc;
}

/// tau'_e(chi) / Omega = sum_x chi(x) w_x(Theta) for chi of even order.
inline GaussRing::Elt elliptic_gauss_sum_even(const CharacterData& chi, const ElkiesRing& er, const CycloExt& e,
                                              const GaussRing& T) {
    if (chi.order % 2 != 0) throw PreconditionError("elliptic_gauss_sum_even: character order must be even");
    if (chi.q != er.ell) throw PreconditionError("elliptic_gauss_sum_even: conductor must be l");
    auto acc = T.zero();
    for (unsigned long x = 1; x < er.ell; ++x)
        acc = T.add(acc, T.scale_base(T.from_scalars(er.w[x - 1]), e.root_pow(chi.order, static_cast<long>(chi.exp_of(x)))));
    return acc;
}

struct ExceptionalConductor {
    unsigned long ell = 0;
};

/// Resultant of F with the norm down to Z[Theta] of a: 0 means exceptional,
/// a proper gcd with n is a factor.
inline std::variant<std::monostate, ExceptionalConductor, FactorFound, CompositeWitness> unit_check(
    const GaussRing::Elt& a, const ElkiesRing& er, const CycloExt& e, const GaussRing& T) {
    const QuotientRing& R = e.ring;
    const Int& n = e.n();
    auto norm = a;
    RingElt zk = e.zeta;
    for (int k = 1; k < e.degree(); ++k) {
        zk = R.pow(zk, n);
        GaussRing::Elt c(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = eval_in(a[i], zk, R);
        norm = T.mul(norm, c);
    }
    std::vector<Int> coeffs;
    for (const auto& c : norm) {
        auto cs = R.coords(c);
        for (std::size_t i = 1; i < cs.size(); ++i)
            if (cs[i] != 0) return CompositeWitness{"norm of elliptic Gauss sum is not fixed by sigma"};
        coeffs.push_back(cs.empty() ? Int(0) : cs[0]);
    }
    auto res = try_resultant(er.factor(), Poly(coeffs, er.factor().modulus()));
    if (auto* f = std::get_if<FactorFound>(&res)) return *f;
    const Int r = mod(std::get<Int>(res), n);
    if (r == 0) return ExceptionalConductor{er.ell};
    if (Int g = gcd(r, n); g != 1) return FactorFound{g};
    return std::monostate{};
}

struct EtaRecord {
    unsigned long q = 0;      // prime
    unsigned long order = 0;  // q^a exactly dividing l - 1
    unsigned long eta = 0;    // exponent: tau^n = zeta_order^eta tau(chi^n)
};

struct EllipticExtensionWitness {
    unsigned long ell = 0;
    std::vector<EtaRecord> etas;
    unsigned long lambda = 0;
};

using EllExtOutcome = std::variant<EllipticExtensionWitness, CompositeWitness, ExceptionalConductor, FactorFound>;

/// Prime powers q^a exactly dividing l - 1.
inline std::vector<std::pair<unsigned long, unsigned long>> eta_orders(unsigned long ell) {
    std::vector<std::pair<unsigned long, unsigned long>> out;
    for (auto [q, a] : factor_small(ell - 1)) out.emplace_back(q, powul(q, a));
    return out;
}

/// exts maps each prime q | l-1 to a working extension containing the
/// q^a-th roots of unity. trace is n + 1 - |E(Z/nZ)|. With `expected`, each
/// eta is checked against the stored one instead of being searched for.
inline EllExtOutcome elliptic_extension_test(const Int& n, const ElkiesRing& er,
                                             const std::map<unsigned long, CycloExt>& exts, const Int& trace,
                                             const std::vector<EtaRecord>* expected = nullptr) {
    const unsigned long ell = er.ell;
    EllipticExtensionWitness wit{ell, {}, 0};
    Int dlog = 0, modulus = 1;
    for (auto [q, qa] : eta_orders(ell)) {
        auto it = exts.find(q);
        if (it == exts.end() || it->second.s % qa) throw PreconditionError("elliptic_extension_test: missing working extension");
        const CycloExt& e = it->second;
        const GaussRing T = gauss_ring(er, e);
        const CharacterData chi = make_character(ell, qa);
        const CharacterData chin = chi.pow(mod_ul(n, qa));
        GaussRing::Elt lhs, rhs;
        if (q == 2) {
            const auto v = elliptic_gauss_sum_even(chi, er, e, T);
            auto u = unit_check(v, er, e, T);
            if (auto* f = std::get_if<FactorFound>(&u)) return *f;
            if (auto* w = std::get_if<CompositeWitness>(&u)) return *w;
            if (auto* x = std::get_if<ExceptionalConductor>(&u)) return *x;
            // (Omega v)^n = Omega f^((n-1)/2) v^n
            lhs = T.mul(ring_pow(T, T.from_scalars(er.alg.omega_sq), (n - 1) / 2), ring_pow(T, v, n));
            rhs = elliptic_gauss_sum_even(chin, er, e, T);
        } else {
            const auto v = elliptic_gauss_sum_odd(chi, er, e, T);
            auto u = unit_check(v, er, e, T);
            if (auto* f = std::get_if<FactorFound>(&u)) return *f;
            if (auto* w = std::get_if<CompositeWitness>(&u)) return *w;
            if (auto* x = std::get_if<ExceptionalConductor>(&u)) return *x;
            lhs = ring_pow(T, v, n);
            rhs = elliptic_gauss_sum_odd(chin, er, e, T);
        }
        std::optional<unsigned long> eta;
        if (expected) {
            auto rec = std::find_if(expected->begin(), expected->end(),
                                    [&](const EtaRecord& r) { return r.q == q && r.order == qa; });
            if (rec != expected->end() && rec->eta < qa &&
                T.equal(lhs, T.scale_base(rhs, e.root_pow(qa, static_cast<long>(rec->eta)))))
                eta = rec->eta;
        } else {
            for (unsigned long k = 0; k < qa && !eta; ++k)
                if (T.equal(lhs, T.scale_base(rhs, e.root_pow(qa, static_cast<long>(k))))) eta = k;
        }
        if (!eta) return CompositeWitness{"elliptic Gauss sum power is not a root of unity times its conjugate (l=" +
                                          std::to_string(ell) + ", q=" + std::to_string(qa) + ")"};
        wit.etas.push_back({q, qa, *eta});
        // zeta^eta = chi(lambda)^(-n): dlog(lambda) = -eta / n mod q^a.
        Int ninv;
        const Int qai(qa);
        mpz_invert(ninv.get_mpz_t(), Int(mod(n, qai)).get_mpz_t(), qai.get_mpz_t());
        const Int c = mod(-Int(*eta) * ninv, qai);
        // CRT into dlog mod modulus * qa.
        Int minv;
        mpz_invert(minv.get_mpz_t(), Int(mod(modulus, qai)).get_mpz_t(), qai.get_mpz_t());
        dlog = dlog + modulus * mod((c - dlog) * minv, qai);
        modulus *= qa;
    }
    const unsigned long g = primitive_root(ell);
    wit.lambda = powmod_ul(g, ul(dlog), ell);
    const unsigned long lam = wit.lambda;
    const Int frob = Int(lam) * lam - trace * lam + n;
    if (mod_ul(frob, ell) != 0) return CompositeWitness{"eigenvalue fails the Frobenius equation mod " + std::to_string(ell)};
    return wit;
}

/// mu mod L1 where L1 = (l, sqrt(D) - r) with r the least root of X^2 = D mod l.
inline unsigned long quad_mod_prime(const QuadInt& mu, unsigned long ell) {
    const long D = mu.D;
    const unsigned long Dl = static_cast<unsigned long>(((D % static_cast<long>(ell)) + static_cast<long>(ell)) % static_cast<long>(ell));
    if (Dl == 0 || powmod_ul(Dl, (ell - 1) / 2, ell) != 1) throw PreconditionError("quad_mod_prime: l must split");
    unsigned long r = 0;
    while (r * r % ell != Dl) ++r;
    const unsigned long inv2 = (ell + 1) / 2;
    const unsigned long v = (mod_ul(mu.a, ell) + mod_ul(mu.b, ell) * r) % ell;
    return v * inv2 % ell;
}

/// lambda_m = mu + 1 and lambda_n = mu under the same embedding.
inline bool check_ev_condition(unsigned long lambda_m, unsigned long lambda_n, const QuadInt& mu, unsigned long ell) {
    const QuadInt one = QuadInt::integer(1, mu.D);
    for (const QuadInt& v : {mu, mu.conj()}) {
        const unsigned long a = quad_mod_prime(v, ell);
        const unsigned long b = quad_mod_prime(v + one, ell);
        if (lambda_n % ell == a && lambda_m % ell == b) return true;
    }
    return false;
}

}  // namespace cide
