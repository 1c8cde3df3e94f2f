#pragma once

// Elliptic curves y^2 = x^3 + Ax + B over Z/nZ with partial addition,
// division polynomials and torsion algebras.

#include <map>
#include <optional>
#include <variant>

#include "cide/ring.hpp"

namespace cide {

struct CurveParams {
    Int A, B;
    Modulus modulus;

    const Int& n() const { return modulus.value(); }
    Int f(const Int& x) const { return mod(x * x * x + A * x + B, n()); }
    Int discriminant() const { return mod(4 * A * A * A + 27 * B * B, n()); }
    bool operator==(const CurveParams& o) const { return A == o.A && B == o.B && modulus == o.modulus; }
};

/// Validated curve. A zero discriminant is a contract violation; a
/// discriminant sharing a factor with n is reported as that factor.
inline std::variant<CurveParams, FactorFound> make_curve(const Int& A, const Int& B, const Int& n) {
    CurveParams E{mod(A, n), mod(B, n), Modulus(n)};
    auto inv = try_invert(E.discriminant(), n);
    if (holds<ZeroElement>(inv)) throw PreconditionError("make_curve: singular curve");
    if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
    return E;
}

inline CurveParams curve_or_throw(const Int& A, const Int& B, const Int& n) {
    auto r = make_curve(A, B, n);
    if (auto* f = std::get_if<FactorFound>(&r)) throw PreconditionError("curve discriminant shares factor " + to_dec(f->factor));
    return std::get<CurveParams>(r);
}

/// Affine point or the point at infinity, over a ring R.
template <class Elt>
struct PointT {
    bool infinity = true;
    Elt x{}, y{};

    static PointT at_infinity() { return {}; }
    static PointT affine(Elt x, Elt y) { return {false, std::move(x), std::move(y)}; }
};

using CurvePoint = PointT<Int>;

inline bool operator==(const CurvePoint& p, const CurvePoint& q) {
    if (p.infinity || q.infinity) return p.infinity == q.infinity;
    return p.x == q.x && p.y == q.y;
}

inline bool on_curve(const CurvePoint& P, const CurveParams& E) {
    return P.infinity || mod(P.y * P.y, E.n()) == E.f(P.x);
}

inline CurvePoint make_point(const Int& x, const Int& y, const CurveParams& E) {
    CurvePoint P = CurvePoint::affine(mod(x, E.n()), mod(y, E.n()));
    if (!on_curve(P, E)) throw PreconditionError("point not on curve");
    return P;
}

/// The add step hit a denominator that is neither a unit nor a detectable
/// zero; only possible over a composite modulus.
struct NonUnitDenominator {};

template <class Elt>
using AddOutcomeT = std::variant<PointT<Elt>, FactorFound, NonUnitDenominator>;
using AddOutcome = AddOutcomeT<Int>;

/// Partial addition on d*y^2 = x^3 + Ax + B over the ring R. d = 1 is the
/// curve itself; other d model points (x, y*Omega) with Omega^2 = d.
template <Ring R>
AddOutcomeT<typename R::Elt> partial_add_on(const R& r, const typename R::Elt& A, const typename R::Elt& d,
                                            const PointT<typename R::Elt>& P, const PointT<typename R::Elt>& Q) {
    using Elt = typename R::Elt;
    if (P.infinity) return Q;
    if (Q.infinity) return P;
    Elt num, den;
    const bool same_x = r.equal(P.x, Q.x);
    if (same_x) {
        if (r.is_zero(r.add(P.y, Q.y))) return PointT<Elt>::at_infinity();
        if (!r.equal(P.y, Q.y)) {
            // Same abscissa, ordinates neither equal nor opposite: y1 - y2 is a zero divisor.
            auto t = r.try_invert(r.sub(P.y, Q.y));
            if (auto* f = std::get_if<FactorFound>(&t)) return *f;
            return NonUnitDenominator{};
        }
        num = r.add(r.scale(r.mul(P.x, P.x), 3), A);
        den = r.mul(r.scale(P.y, 2), d);
    } else {
        num = r.sub(Q.y, P.y);
        den = r.sub(Q.x, P.x);
    }
    auto inv = r.try_invert(den);
    if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
    if (holds<NotInvertible>(inv)) {
        if (!same_x) {
            // x1 - x2 is a nonzero zero divisor; surface its gcd with n when possible.
            return NonUnitDenominator{};
        }
        // 2y = 0 (times d): a 2-torsion point doubles to infinity.
        if (r.is_zero(P.y)) return PointT<Elt>::at_infinity();
        return NonUnitDenominator{};
    }
    const Elt lambda = r.mul(num, std::get<Elt>(inv));
    const Elt x3 = r.sub(r.sub(r.mul(d, r.mul(lambda, lambda)), P.x), Q.x);
    const Elt y3 = r.sub(r.mul(lambda, r.sub(P.x, x3)), P.y);
    return PointT<Elt>::affine(x3, y3);
}

/// Partial addition over Z/nZ. Any non-invertible denominator yields a
/// nontrivial factor of n.
inline AddOutcome partial_add(const CurvePoint& P, const CurvePoint& Q, const CurveParams& E) {
    const ZnRing r(E.modulus);
    if (!P.infinity && !Q.infinity) {
        // Over Z/nZ every non-unit nonzero denominator has a proper gcd with n.
        const Int den = P.x == Q.x ? (P.y == Q.y ? mod(2 * P.y, E.n()) : mod(P.y - Q.y, E.n())) : mod(Q.x - P.x, E.n());
        if (den != 0) {
            if (Int g = gcd(den, E.n()); g != 1) return FactorFound{g};
        }
    }
    return partial_add_on(r, E.A, Int(1), P, Q);
}

template <Ring R>
AddOutcomeT<typename R::Elt> scalar_mul_on(const R& r, const typename R::Elt& A, const typename R::Elt& d,
                                           const Int& k, const PointT<typename R::Elt>& P) {
    using Pt = PointT<typename R::Elt>;
    if (k < 0) throw PreconditionError("scalar_mul: negative multiplier");
    Pt acc = Pt::at_infinity();
    for (long i = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        auto dbl = partial_add_on(r, A, d, acc, acc);
        if (!holds<Pt>(dbl)) return dbl;
        acc = std::get<Pt>(dbl);
        if (mpz_tstbit(k.get_mpz_t(), i)) {
            auto s = partial_add_on(r, A, d, acc, P);
            if (!holds<Pt>(s)) return s;
            acc = std::get<Pt>(s);
        }
    }
    return acc;
}

inline AddOutcome scalar_mul(const Int& k, const CurvePoint& P, const CurveParams& E) {
    if (k < 0) throw PreconditionError("scalar_mul: negative multiplier");
    CurvePoint acc = CurvePoint::at_infinity();
    for (long i = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        auto dbl = partial_add(acc, acc, E);
        if (!holds<CurvePoint>(dbl)) return dbl;
        acc = std::get<CurvePoint>(dbl);
        if (mpz_tstbit(k.get_mpz_t(), i)) {
            auto s = partial_add(acc, P, E);
            if (!holds<CurvePoint>(s)) return s;
            acc = std::get<CurvePoint>(s);
        }
    }
    return acc;
}

/// Reduced division polynomials Psi_k evaluated at a ring element x: the
/// true psi_k is Psi_k for odd k and 2y*Psi_k for even k. Memoized.
template <Ring R>
class DivisionValues {
public:
    using Elt = typename R::Elt;

    DivisionValues(R ring, const CurveParams& E, Elt x) : r_(std::move(ring)), x_(std::move(x)) {
        A_ = r_.from_int(E.A);
        B_ = r_.from_int(E.B);
        const Elt x2 = r_.mul(x_, x_);
        f_ = r_.add(r_.add(r_.mul(x2, x_), r_.mul(A_, x_)), B_);
        f2x16_ = r_.scale(r_.mul(f_, f_), 16);
        const Int& a = E.A;
        const Int& b = E.B;
        const Elt x3 = r_.mul(x2, x_), x4 = r_.mul(x2, x2), x6 = r_.mul(x4, x2);
        memo_[Int(0)] = r_.zero();
        memo_[Int(1)] = r_.one();
        memo_[Int(2)] = r_.one();
        // 3x^4 + 6Ax^2 + 12Bx - A^2
        memo_[Int(3)] = r_.add(r_.add(r_.add(r_.scale(x4, 3), r_.scale(x2, 6 * a)), r_.scale(x_, 12 * b)),
                               r_.from_int(-a * a));
        // 2(x^6 + 5Ax^4 + 20Bx^3 - 5A^2x^2 - 4ABx - 8B^2 - A^3)
        Elt p4 = r_.add(x6, r_.scale(x4, 5 * a));
        p4 = r_.add(p4, r_.scale(x3, 20 * b));
        p4 = r_.add(p4, r_.scale(x2, -5 * a * a));
        p4 = r_.add(p4, r_.scale(x_, -4 * a * b));
        p4 = r_.add(p4, r_.from_int(-8 * b * b - a * a * a));
        memo_[Int(4)] = r_.scale(p4, 2);
    }

    const R& ring() const { return r_; }
    const Elt& x() const { return x_; }
    const Elt& f() const { return f_; }

    /// Psi_k(x).
    const Elt& reduced(const Int& k) {
        if (k < 0) throw PreconditionError("division polynomial index must be >= 0");
        if (auto it = memo_.find(k); it != memo_.end()) return it->second;
        const Int m = k / 2;
        Elt v;
        if (mpz_even_p(k.get_mpz_t())) {
            const Elt a = r_.mul(reduced(m + 2), sq(reduced(m - 1)));
            const Elt b = r_.mul(reduced(m - 2), sq(reduced(m + 1)));
            v = r_.mul(reduced(m), r_.sub(a, b));
        } else {
            Elt a = r_.mul(reduced(m + 2), cube(reduced(m)));
            Elt b = r_.mul(reduced(m - 1), cube(reduced(m + 1)));
            if (mpz_even_p(m.get_mpz_t()))
                a = r_.mul(a, f2x16_);
            else
                b = r_.mul(b, f2x16_);
            v = r_.sub(a, b);
        }
        return memo_.emplace(k, std::move(v)).first->second;
    }

    /// psi_k(x)^2 with y^2 replaced by f(x).
    Elt psi_sq(const Int& k) {
        Elt s = sq(reduced(k));
        if (mpz_even_p(k.get_mpz_t())) s = r_.scale(r_.mul(s, f_), 4);
        return s;
    }

    /// phi_k(x) = x psi_k^2 - psi_{k+1} psi_{k-1}.
    Elt phi(const Int& k) {
        Elt pp = r_.mul(reduced(k + 1), reduced(k - 1));
        if (mpz_odd_p(k.get_mpz_t())) pp = r_.scale(r_.mul(pp, f_), 4);
        return r_.sub(r_.mul(x_, psi_sq(k)), pp);
    }

    /// A value whose vanishing characterises k-torsion abscissae:
    /// Psi_k for odd k, 2f*Psi_k for even k.
    Elt torsion_value(const Int& k) {
        if (mpz_odd_p(k.get_mpz_t())) return reduced(k);
        return r_.scale(r_.mul(f_, reduced(k)), 2);
    }

private:
    Elt sq(const Elt& a) const { return r_.mul(a, a); }
    Elt cube(const Elt& a) const { return r_.mul(a, r_.mul(a, a)); }

    R r_;
    Elt x_, A_, B_, f_, f2x16_;
    std::map<Int, Elt> memo_;
};

/// psi_k(X) as a polynomial: Psi_k for odd k, 2f*Psi_k for even k, so the
/// roots are exactly the abscissae of nonzero k-torsion points.
inline Poly division_poly(const Int& k, const CurveParams& E) {
    if (k < 1) throw PreconditionError("division_poly: k must be >= 1");
    PolyRing pr(E.modulus);
    DivisionValues<PolyRing> dv(pr, E, pr.theta());
    return dv.torsion_value(k);
}

/// phi_k(X) as a polynomial.
inline Poly phi_poly(const Int& k, const CurveParams& E) {
    PolyRing pr(E.modulus);
    DivisionValues<PolyRing> dv(pr, E, pr.theta());
    return dv.phi(k);
}

inline Poly curve_rhs(const CurveParams& E) { return Poly({E.B, E.A, 0, 1}, E.modulus); }

struct NotADivisor {};

/// Z/nZ[X]/(rho) with Theta = X mod rho, rho | psi_k. The two-point layer
/// adjoins Omega with Omega^2 = f(Theta); it is represented by the square
/// f(Theta) itself and points (x, w*Omega) are stored as (x, w).
struct TorsionAlgebra {
    Poly rho;
    QuotientRing ring;
    RingElt theta;
    Int k;
    CurveParams curve;
    bool two_point = false;
    RingElt omega_sq;
};

inline std::variant<TorsionAlgebra, NotADivisor, FactorFound, CompositeWitness> build_torsion_algebra(
    const Poly& rho, const Int& k, const CurveParams& E, bool two_point) {
    if (!rho.is_monic() || rho.deg() < 1) throw PreconditionError("build_torsion_algebra: rho must be monic");
    QuotientRing R(rho);
    const RingElt th = R.theta();
    DivisionValues<QuotientRing> dv(R, E, th);
    if (!R.is_zero(dv.torsion_value(k))) return NotADivisor{};
    // gcd(rho, psi_2) must be a unit: f(Theta) invertible.
    const RingElt fth = dv.f();
    if (mpz_odd_p(k.get_mpz_t())) {
        auto inv = R.try_invert(fth);
        if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
        if (holds<NotInvertible>(inv)) return CompositeWitness{"torsion modulus shares a root with psi_2"};
    }
    return TorsionAlgebra{rho, R, th, k, E, two_point, fth};
}

/// g_i(Theta) = phi_i(Theta) / psi_i(Theta)^2, the abscissa of [i]P.
inline std::variant<RingElt, FactorFound, CompositeWitness> mult_poly_g(const Int& i, const TorsionAlgebra& alg) {
    if (i < 1 || i >= alg.k) throw PreconditionError("mult_poly_g: need 1 <= i < k");
    DivisionValues<QuotientRing> dv(alg.ring, alg.curve, alg.theta);
    auto inv = alg.ring.try_invert(dv.psi_sq(i));
    if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
    if (holds<NotInvertible>(inv)) return CompositeWitness{"psi_i(Theta) is not a unit"};
    return alg.ring.mul(dv.phi(i), std::get<RingElt>(inv));
}

/// Multiples [x]P, x = 1..count, of the formal point P = (Theta, Omega), as
/// pairs (g_x(Theta), w_x(Theta)) with ([x]P)_Y = w_x * Omega.
inline std::variant<std::vector<std::pair<RingElt, RingElt>>, FactorFound, CompositeWitness> torsion_multiples(
    const TorsionAlgebra& alg, long count) {
    using Pt = PointT<RingElt>;
    const QuotientRing& R = alg.ring;
    const RingElt A = R.from_int(alg.curve.A);
    const Pt P = Pt::affine(alg.theta, R.one());
    std::vector<std::pair<RingElt, RingElt>> out;
    Pt cur = P;
    for (long x = 1; x <= count; ++x) {
        if (cur.infinity) return CompositeWitness{"formal torsion point has small order"};
        out.emplace_back(cur.x, cur.y);
        if (x == count) break;
        auto nx = partial_add_on(R, A, alg.omega_sq, cur, P);
        if (auto* f = std::get_if<FactorFound>(&nx)) return *f;
        if (holds<NonUnitDenominator>(nx)) return CompositeWitness{"non-unit denominator in torsion algebra"};
        cur = std::get<Pt>(nx);
    }
    return out;
}

struct Pass {
    bool degenerate = false;
};

using EllTestOutcome = std::variant<Pass, CompositeWitness, FactorFound>;

inline EllTestOutcome elliptic_fermat_test(const CurveParams& E, const CurvePoint& P, const Int& m) {
    if (P.infinity) return Pass{true};
    if (!on_curve(P, E)) throw PreconditionError("elliptic_fermat_test: point not on curve");
    auto r = scalar_mul(m, P, E);
    if (auto* f = std::get_if<FactorFound>(&r)) return *f;
    if (!std::get<CurvePoint>(r).infinity) return CompositeWitness{"[m]P is not the point at infinity"};
    return Pass{};
}

inline EllTestOutcome elliptic_lucas_lehmer_test(const CurveParams& E, const CurvePoint& P, const Int& q,
                                                 const Int& m) {
    if (q < 2 || m % q != 0) throw PreconditionError("elliptic_lucas_lehmer_test: q must divide m");
    auto r = scalar_mul(m / q, P, E);
    if (auto* f = std::get_if<FactorFound>(&r)) return *f;
    const CurvePoint Q = std::get<CurvePoint>(r);
    if (Q.infinity) return CompositeWitness{"[m/q]P is the point at infinity"};
    auto s = scalar_mul(q, Q, E);
    if (auto* f = std::get_if<FactorFound>(&s)) return *f;
    if (!std::get<CurvePoint>(s).infinity) return CompositeWitness{"[m]P is not the point at infinity"};
    DivisionValues<ZnRing> dv(ZnRing(E.modulus), E, Q.x);
    const Int v = dv.torsion_value(q);
    if (v != 0) {
        if (Int g = gcd(v, E.n()); g != 1) return FactorFound{g};
        return CompositeWitness{"psi_q does not vanish at the torsion abscissa"};
    }
    return Pass{};
}

}  // namespace cide
