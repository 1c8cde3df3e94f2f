#pragma once

// Small ring layer shared by curve arithmetic, division polynomials and the
// Gauss-sum tests. A ring is a value type with an Elt type and the methods
// checked by the Ring concept below.

#include <concepts>
#include <memory>
#include <variant>
#include <vector>

#include "cide/poly.hpp"

namespace cide {

template <class R>
concept Ring = requires(const R& r, const typename R::Elt& a, const Int& k) {
    { r.zero() } -> std::convertible_to<typename R::Elt>;
    { r.one() } -> std::convertible_to<typename R::Elt>;
    { r.from_int(k) } -> std::convertible_to<typename R::Elt>;
    { r.add(a, a) } -> std::convertible_to<typename R::Elt>;
    { r.sub(a, a) } -> std::convertible_to<typename R::Elt>;
    { r.mul(a, a) } -> std::convertible_to<typename R::Elt>;
    { r.scale(a, k) } -> std::convertible_to<typename R::Elt>;
    { r.neg(a) } -> std::convertible_to<typename R::Elt>;
    { r.is_zero(a) } -> std::convertible_to<bool>;
    { r.equal(a, a) } -> std::convertible_to<bool>;
    { r.n() } -> std::convertible_to<const Int&>;
};

template <Ring R>
typename R::Elt ring_pow(const R& r, const typename R::Elt& b, const Int& e) {
    if (e < 0) throw PreconditionError("ring_pow: negative exponent");
    typename R::Elt acc = r.one();
    for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        acc = r.mul(acc, acc);
        if (mpz_tstbit(e.get_mpz_t(), i)) acc = r.mul(acc, b);
    }
    return acc;
}

/// Z/nZ itself.
class ZnRing {
public:
    using Elt = Int;
    explicit ZnRing(Modulus m) : m_(std::move(m)) {}
    explicit ZnRing(const Int& n) : m_(n) {}

    const Int& n() const { return m_.value(); }
    const Modulus& base() const { return m_; }
    Elt zero() const { return 0; }
    Elt one() const { return 1; }
    Elt from_int(const Int& v) const { return mod(v, n()); }
    Elt add(const Elt& a, const Elt& b) const {
        Int r = a + b;
        if (r >= n()) r -= n();
        return r;
    }
    Elt sub(const Elt& a, const Elt& b) const {
        Int r = a - b;
        if (r < 0) r += n();
        return r;
    }
    Elt neg(const Elt& a) const { return a == 0 ? Int(0) : Int(n() - a); }
    Elt mul(const Elt& a, const Elt& b) const { return mulmod(a, b, n()); }
    Elt scale(const Elt& a, const Int& k) const { return mulmod(a, mod(k, n()), n()); }
    bool is_zero(const Elt& a) const { return a == 0; }
    bool equal(const Elt& a, const Elt& b) const { return a == b; }

    std::variant<Elt, FactorFound, NotInvertible> try_invert(const Elt& a) const {
        auto r = cide::try_invert(a, n());
        if (auto* u = std::get_if<Unit>(&r)) return u->inverse;
        if (auto* f = std::get_if<FactorFound>(&r)) return *f;
        return NotInvertible{Poly(m_)};
    }

private:
    Modulus m_;
};

/// Z/nZ[X] without reduction; used to produce division polynomials as polynomials.
class PolyRing {
public:
    using Elt = Poly;
    explicit PolyRing(Modulus m) : m_(std::move(m)) {}

    const Int& n() const { return m_.value(); }
    const Modulus& base() const { return m_; }
    Elt zero() const { return Poly(m_); }
    Elt one() const { return Poly::constant(1, m_); }
    Elt from_int(const Int& v) const { return Poly::constant(v, m_); }
    Elt theta() const { return Poly::x(m_); }
    Elt add(const Elt& a, const Elt& b) const { return a + b; }
    Elt sub(const Elt& a, const Elt& b) const { return a - b; }
    Elt neg(const Elt& a) const { return -a; }
    Elt mul(const Elt& a, const Elt& b) const { return a * b; }
    Elt scale(const Elt& a, const Int& k) const { return a * k; }
    bool is_zero(const Elt& a) const { return a.is_zero(); }
    bool equal(const Elt& a, const Elt& b) const { return a == b; }

private:
    Modulus m_;
};

static_assert(Ring<ZnRing>);
static_assert(Ring<PolyRing>);
static_assert(Ring<QuotientRing>);

/// Base[Z]/(Psi(Z)) for a monic Psi with coefficients in Z/nZ.
template <Ring Base>
class SimpleExt {
public:
    using BaseElt = typename Base::Elt;
    using Elt = std::vector<BaseElt>;

    SimpleExt(Base base, Poly psi) : base_(std::move(base)), psi_(std::make_shared<const Poly>(std::move(psi))) {
        if (!psi_->is_monic() || psi_->deg() < 1) throw PreconditionError("SimpleExt: modulus must be monic");
    }

    const Base& base_ring() const { return base_; }
    const Poly& psi() const { return *psi_; }
    int degree() const { return psi_->deg(); }
    const Int& n() const { return base_.n(); }

    Elt zero() const { return Elt(degree(), base_.zero()); }
    Elt one() const { return from_base(base_.one()); }
    Elt from_int(const Int& v) const { return from_base(base_.from_int(v)); }
    Elt from_base(const BaseElt& b) const {
        Elt r = zero();
        r[0] = b;
        return r;
    }
    /// The adjoined root Z.
    Elt gen() const {
        if (degree() == 1) return from_int(-psi_->coeff(0));
        Elt r = zero();
        r[1] = base_.one();
        return r;
    }
    /// Element sum_i c_i Z^i for scalar coefficients.
    Elt from_scalars(const Poly& p) const {
        Poly q = divrem_monic(p, *psi_).second;
        Elt r = zero();
        for (std::size_t i = 0; i < q.size(); ++i) r[i] = base_.from_int(q.coeffs()[i]);
        return r;
    }

    Elt add(const Elt& a, const Elt& b) const {
        Elt r(a.size(), base_.zero());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = base_.add(a[i], b[i]);
        return r;
    }
    Elt sub(const Elt& a, const Elt& b) const {
        Elt r(a.size(), base_.zero());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = base_.sub(a[i], b[i]);
        return r;
    }
    Elt neg(const Elt& a) const {
        Elt r(a.size(), base_.zero());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = base_.neg(a[i]);
        return r;
    }
    Elt scale(const Elt& a, const Int& k) const {
        Elt r(a.size(), base_.zero());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = base_.scale(a[i], k);
        return r;
    }
    Elt scale_base(const Elt& a, const BaseElt& b) const {
        Elt r(a.size(), base_.zero());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = base_.mul(a[i], b);
        return r;
    }
    Elt mul(const Elt& a, const Elt& b) const {
        const int d = degree();
        std::vector<BaseElt> t(2 * d - 1, base_.zero());
        for (int i = 0; i < d; ++i) {
            if (base_.is_zero(a[i])) continue;
            for (int j = 0; j < d; ++j) {
                if (base_.is_zero(b[j])) continue;
                t[i + j] = base_.add(t[i + j], base_.mul(a[i], b[j]));
            }
        }
        for (int i = 2 * d - 2; i >= d; --i) {
            if (base_.is_zero(t[i])) continue;
            for (int j = 0; j < d; ++j) {
                const Int& c = psi_->coeffs()[j];
                if (c != 0) t[i - d + j] = base_.sub(t[i - d + j], base_.scale(t[i], c));
            }
        }
        t.resize(d);
        return t;
    }
    bool is_zero(const Elt& a) const {
        for (auto& x : a)
            if (!base_.is_zero(x)) return false;
        return true;
    }
    bool equal(const Elt& a, const Elt& b) const {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!base_.equal(a[i], b[i])) return false;
        return true;
    }
    /// True when a lies in the image of the base ring.
    bool in_base(const Elt& a) const {
        for (std::size_t i = 1; i < a.size(); ++i)
            if (!base_.is_zero(a[i])) return false;
        return true;
    }

    /// Image of a under Z -> Z^k, given z_k = gen()^k.
    Elt substitute(const Elt& a, const Elt& z_k) const {
        Elt acc = zero(), pw = one();
        for (int i = 0; i < degree(); ++i) {
            if (!base_.is_zero(a[i])) acc = add(acc, scale_base(pw, a[i]));
            if (i + 1 < degree()) pw = mul(pw, z_k);
        }
        return acc;
    }

private:
    Base base_;
    std::shared_ptr<const Poly> psi_;
};

static_assert(Ring<SimpleExt<QuotientRing>>);

}  // namespace cide
