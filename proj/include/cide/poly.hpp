#pragma once

// Dense polynomials over Z/nZ and quotient rings Z/nZ[X]/(f).

#include <algorithm>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "cide/zn.hpp"

namespace cide {

struct PolyConfig {
    std::size_t karatsuba_threshold = 32;
    std::size_t barrett_threshold = 48;
};

inline PolyConfig& poly_config() {
    static PolyConfig cfg;
    return cfg;
}

class Poly {
public:
    Poly() = default;
    explicit Poly(Modulus m) : m_(std::move(m)) {}
    Poly(std::vector<Int> c, Modulus m) : c_(std::move(c)), m_(std::move(m)) { canonicalize(); }

    static Poly constant(const Int& v, Modulus m) { return Poly({v}, std::move(m)); }
    static Poly x(Modulus m) { return Poly({0, 1}, std::move(m)); }
    static Poly monomial(const Int& v, std::size_t k, Modulus m) {
        std::vector<Int> c(k + 1, 0);
        c[k] = v;
        return Poly(std::move(c), std::move(m));
    }

    /// Builds from raw coefficients that are already reduced; skips the mod pass.
    static Poly from_reduced(std::vector<Int> c, Modulus m) {
        Poly p(std::move(m));
        p.c_ = std::move(c);
        p.trim();
        return p;
    }

    int deg() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    std::size_t size() const { return c_.size(); }
    const std::vector<Int>& coeffs() const { return c_; }
    Int coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Int(0); }
    const Int& lead() const { return c_.back(); }
    bool is_monic() const { return !c_.empty() && c_.back() == 1; }
    const Modulus& modulus() const { return m_; }
    const Int& n() const { return m_.value(); }

    Int operator()(const Int& x) const {
        Int acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = mod(acc * x + *it, n());
        count_ops(c_.size());
        return acc;
    }

    bool operator==(const Poly& o) const { return c_ == o.c_ && m_ == o.m_; }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<Int> c(std::max(a.size(), b.size()));
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] = a.coeff(i) + b.coeff(i);
            if (c[i] >= a.n()) c[i] -= a.n();
        }
        return from_reduced(std::move(c), a.m_);
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        std::vector<Int> c(std::max(a.size(), b.size()));
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] = a.coeff(i) - b.coeff(i);
            if (c[i] < 0) c[i] += a.n();
        }
        return from_reduced(std::move(c), a.m_);
    }
    Poly operator-() const { return Poly(m_) - *this; }
    friend Poly operator*(const Poly& a, const Int& s) {
        std::vector<Int> c(a.c_);
        for (auto& x : c) x *= s;
        count_ops(c.size());
        return Poly(std::move(c), a.m_);
    }
    friend Poly operator*(const Poly& a, const Poly& b);

    Poly shifted(std::size_t k) const {
        if (is_zero()) return *this;
        std::vector<Int> c(k, 0);
        c.insert(c.end(), c_.begin(), c_.end());
        return from_reduced(std::move(c), m_);
    }
    Poly truncated(std::size_t k) const {
        std::vector<Int> c(c_.begin(), c_.begin() + std::min(k, c_.size()));
        return from_reduced(std::move(c), m_);
    }
    /// Coefficient reversal with respect to degree d.
    Poly reversed(std::size_t d) const {
        std::vector<Int> c(d + 1, 0);
        for (std::size_t i = 0; i < c_.size() && i <= d; ++i) c[d - i] = c_[i];
        return from_reduced(std::move(c), m_);
    }

    Poly derivative() const {
        std::vector<Int> c;
        for (std::size_t i = 1; i < c_.size(); ++i) c.push_back(c_[i] * static_cast<unsigned long>(i));
        return Poly(std::move(c), m_);
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    void canonicalize() {
        for (auto& x : c_) mpz_mod(x.get_mpz_t(), x.get_mpz_t(), n().get_mpz_t());
        trim();
    }

    std::vector<Int> c_;
    Modulus m_;
};

namespace detail {

// Unreduced integer convolution: out[i+j] += a[i]*b[j].
inline void school_mul(const Int* a, std::size_t na, const Int* b, std::size_t nb, Int* out) {
    count_ops(na * nb);
    for (std::size_t i = 0; i < na; ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < nb; ++j) mpz_addmul(out[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
    }
}

// out (size 2k-1) += a*b with both operands of length k.
inline void kara_mul(const Int* a, const Int* b, std::size_t k, Int* out) {
    if (k <= poly_config().karatsuba_threshold) {
        school_mul(a, k, b, k, out);
        return;
    }
    const std::size_t h = k / 2, hi = k - h;
    std::vector<Int> z0(2 * h - 1, 0), z2(2 * hi - 1, 0), z1(2 * hi - 1, 0);
    kara_mul(a, b, h, z0.data());
    kara_mul(a + h, b + h, hi, z2.data());
    std::vector<Int> sa(hi), sb(hi);
    for (std::size_t i = 0; i < hi; ++i) {
        sa[i] = a[h + i] + (i < h ? a[i] : Int(0));
        sb[i] = b[h + i] + (i < h ? b[i] : Int(0));
    }
    kara_mul(sa.data(), sb.data(), hi, z1.data());
    for (std::size_t i = 0; i < z0.size(); ++i) z1[i] -= z0[i];
    for (std::size_t i = 0; i < z2.size(); ++i) z1[i] -= z2[i];
    for (std::size_t i = 0; i < z0.size(); ++i) out[i] += z0[i];
    for (std::size_t i = 0; i < z1.size(); ++i) out[h + i] += z1[i];
    for (std::size_t i = 0; i < z2.size(); ++i) out[2 * h + i] += z2[i];
}

inline std::vector<Int> raw_mul(const std::vector<Int>& a, const std::vector<Int>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<Int> out(a.size() + b.size() - 1, 0);
    const std::size_t lo = std::min(a.size(), b.size());
    if (lo <= poly_config().karatsuba_threshold) {
        school_mul(a.data(), a.size(), b.data(), b.size(), out.data());
        return out;
    }
    // Split the longer operand into blocks of the shorter length.
    const auto& s = a.size() <= b.size() ? a : b;
    const auto& l = a.size() <= b.size() ? b : a;
    std::vector<Int> blk(lo), tmp(2 * lo - 1);
    for (std::size_t off = 0; off < l.size(); off += lo) {
        std::fill(blk.begin(), blk.end(), Int(0));
        std::copy(l.begin() + off, l.begin() + std::min(off + lo, l.size()), blk.begin());
        std::fill(tmp.begin(), tmp.end(), Int(0));
        kara_mul(s.data(), blk.data(), lo, tmp.data());
        for (std::size_t i = 0; i < tmp.size() && off + i < out.size(); ++i) out[off + i] += tmp[i];
    }
    return out;
}

}  // namespace detail

inline Poly operator*(const Poly& a, const Poly& b) {
    return Poly(detail::raw_mul(a.coeffs(), b.coeffs()), a.modulus());
}

struct NotInvertible {
    Poly gcd;
};

/// (q, r) with a = q*f + r for monic f.
inline std::pair<Poly, Poly> divrem_monic(const Poly& a, const Poly& f) {
    if (!f.is_monic()) throw PreconditionError("divrem_monic: divisor must be monic");
    const int d = f.deg();
    if (a.deg() < d) return {Poly(a.modulus()), a};
    std::vector<Int> r(a.coeffs());
    std::vector<Int> q(a.deg() - d + 1, 0);
    const Int& n = a.n();
    for (int i = a.deg(); i >= d; --i) {
        mpz_mod(r[i].get_mpz_t(), r[i].get_mpz_t(), n.get_mpz_t());
        if (r[i] == 0) continue;
        const Int c = r[i];
        q[i - d] = c;
        count_ops(d);
        for (int j = 0; j < d; ++j) mpz_submul(r[i - d + j].get_mpz_t(), c.get_mpz_t(), f.coeffs()[j].get_mpz_t());
        r[i] = 0;
    }
    r.resize(d);
    return {Poly(std::move(q), a.modulus()), Poly(std::move(r), a.modulus())};
}

/// Division by an arbitrary nonzero divisor; the leading coefficient must be a unit.
inline std::variant<std::pair<Poly, Poly>, FactorFound> try_divrem(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw PreconditionError("try_divrem: division by zero polynomial");
    auto inv = try_invert(b.lead(), b.n());
    if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
    const Int li = std::get<Unit>(inv).inverse;
    auto [q, r] = divrem_monic(a, b * li);
    return std::pair{q * li, r};
}

inline std::variant<Poly, FactorFound> try_make_monic(const Poly& a) {
    if (a.is_zero()) return a;
    auto inv = try_invert(a.lead(), a.n());
    if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
    return a * std::get<Unit>(inv).inverse;
}

/// Remainder modulo a fixed monic f, switching to a precomputed
/// reciprocal (Barrett/Newton) once deg f is large.
class Reducer {
public:
    explicit Reducer(Poly f) : f_(std::move(f)) {
        if (!f_.is_monic() || f_.deg() < 1) throw PreconditionError("Reducer: modulus must be monic of degree >= 1");
        const std::size_t d = static_cast<std::size_t>(f_.deg());
        if (d >= poly_config().barrett_threshold) inv_ = reciprocal(f_.reversed(d), d);
    }

    const Poly& modulus() const { return f_; }
    int deg() const { return f_.deg(); }

    Poly reduce(const Poly& a) const {
        const int d = f_.deg();
        if (a.deg() < d) return a;
        if (!inv_ || a.deg() > 2 * d - 2) return divrem_monic(a, f_).second;
        const std::size_t m = a.deg();
        const std::size_t k = m - d + 1;
        Poly qr = (a.reversed(m).truncated(k) * inv_->truncated(k)).truncated(k);
        Poly q = qr.reversed(k - 1);
        return (a - (q * f_).truncated(d)).truncated(d);
    }

private:
    // Inverse of g (g(0) = 1) modulo X^k by Newton iteration.
    static Poly reciprocal(const Poly& g, std::size_t k) {
        const Modulus& m = g.modulus();
        Poly h = Poly::constant(1, m);
        const Poly two = Poly::constant(2, m);
        for (std::size_t prec = 1; prec < k;) {
            prec = std::min(2 * prec, k);
            h = (h * (two - (g.truncated(prec) * h).truncated(prec))).truncated(prec);
        }
        return h;
    }

    Poly f_;
    std::optional<Poly> inv_;
};

inline Poly poly_mul_rem(const Poly& a, const Poly& b, const Poly& f) { return Reducer(f).reduce(a * b); }

/// Monic gcd by Euclid; any non-invertible leading coefficient becomes a factor of n.
inline std::variant<Poly, FactorFound> try_gcd(Poly a, Poly b) {
    if (a.is_zero() && b.is_zero()) throw PreconditionError("try_gcd: both arguments zero");
    while (!b.is_zero()) {
        auto dr = try_divrem(a, b);
        if (auto* f = std::get_if<FactorFound>(&dr)) return *f;
        a = std::move(b);
        b = std::move(std::get<0>(dr).second);
    }
    return try_make_monic(a);
}

/// Extended Euclid: (g, s) with s*a ≡ g mod f, g monic.
inline std::variant<std::pair<Poly, Poly>, FactorFound> try_gcdext(const Poly& a, const Poly& f) {
    const Modulus& m = f.modulus();
    Poly r0 = f, r1 = divrem_monic(a, f).second;
    Poly s0(m), s1 = Poly::constant(1, m);
    while (!r1.is_zero()) {
        auto dr = try_divrem(r0, r1);
        if (auto* e = std::get_if<FactorFound>(&dr)) return *e;
        auto& [q, r] = std::get<0>(dr);
        Poly s2 = s0 - q * s1;
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s2);
    }
    auto inv = try_invert(r0.lead(), r0.n());
    if (auto* e = std::get_if<FactorFound>(&inv)) return *e;
    const Int li = std::get<Unit>(inv).inverse;
    return std::pair{r0 * li, s0 * li};
}

/// Resultant Res(f, g) over Z/nZ for monic f, via Euclid on g mod f.
/// Any failed inversion is a factor of n.
inline std::variant<Int, FactorFound> try_resultant(const Poly& f_in, const Poly& g_in) {
    if (!f_in.is_monic()) throw PreconditionError("try_resultant: first argument must be monic");
    const Int& n = f_in.n();
    Poly f = f_in;
    Poly g = divrem_monic(g_in, f).second;
    Int acc = 1;
    // Res(f, g) for monic f equals Res(f, g mod f); swap and normalize as we go.
    while (true) {
        if (f.deg() == 0) return acc;
        if (g.is_zero()) return Int(0);
        if (g.deg() == 0) return mulmod(acc, powmod(g.lead(), f.deg(), n), n);
        const int df = f.deg(), dg = g.deg();
        auto mon = try_make_monic(g);
        if (auto* e = std::get_if<FactorFound>(&mon)) return *e;
        // Res(f, g) = lc(g)^df * Res(f, g/lc) and Res(f, h) = (-1)^{df*dh} Res(h, f).
        acc = mulmod(acc, powmod(g.lead(), df, n), n);
        if ((df * dg) % 2) acc = mod(-acc, n);
        Poly h = std::get<Poly>(mon);
        Poly r = divrem_monic(f, h).second;
        f = std::move(h);
        g = std::move(r);
    }
}

/// Quotient ring Z/nZ[X]/(f), f monic of degree >= 1. Elements are reduced residues.
class QuotientRing {
public:
    using Elt = Poly;

    explicit QuotientRing(Poly f) : red_(std::make_shared<const Reducer>(std::move(f))) {}

    const Poly& modulus_poly() const { return red_->modulus(); }
    const Modulus& base() const { return modulus_poly().modulus(); }
    const Int& n() const { return base().value(); }
    int degree() const { return red_->deg(); }

    Elt zero() const { return Poly(base()); }
    Elt one() const { return from_int(1); }
    Elt from_int(const Int& v) const { return Poly::constant(v, base()); }
    Elt theta() const { return reduce(Poly::x(base())); }
    Elt reduce(const Poly& p) const { return red_->reduce(p); }

    Elt add(const Elt& a, const Elt& b) const { return a + b; }
    Elt sub(const Elt& a, const Elt& b) const { return a - b; }
    Elt neg(const Elt& a) const { return -a; }
    Elt mul(const Elt& a, const Elt& b) const { return red_->reduce(a * b); }
    Elt scale(const Elt& a, const Int& s) const { return a * s; }
    bool is_zero(const Elt& a) const { return a.is_zero(); }
    bool equal(const Elt& a, const Elt& b) const { return a == b; }

    Elt pow(const Elt& b, const Int& e) const {
        if (e < 0) throw PreconditionError("QuotientRing::pow: negative exponent");
        Elt r = one();
        for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
            r = mul(r, r);
            if (mpz_tstbit(e.get_mpz_t(), i)) r = mul(r, b);
        }
        return r;
    }

    /// Inverse of a, a factor of n, or the non-unit gcd(a, f).
    std::variant<Elt, FactorFound, NotInvertible> try_invert(const Elt& a) const {
        if (a.is_zero()) return NotInvertible{modulus_poly()};
        auto res = try_gcdext(a, modulus_poly());
        if (auto* e = std::get_if<FactorFound>(&res)) return *e;
        auto& [g, s] = std::get<0>(res);
        if (g.deg() > 0) return NotInvertible{g};
        return reduce(s);
    }

    /// Coordinates of a in the power basis, padded to degree().
    std::vector<Int> coords(const Elt& a) const {
        std::vector<Int> c(a.coeffs());
        c.resize(degree(), 0);
        return c;
    }

    bool operator==(const QuotientRing& o) const { return modulus_poly() == o.modulus_poly(); }

private:
    std::shared_ptr<const Reducer> red_;
};

using RingElt = QuotientRing::Elt;

/// base^e in Z/nZ[X]/(f).
inline Poly powmod(const Poly& base, const Int& e, const Poly& f) {
    QuotientRing R(f);
    return R.pow(R.reduce(base), e);
}

/// X^e mod f using shifts instead of general multiplications.
inline Poly x_pow_mod(const Int& e, const QuotientRing& R) {
    Poly r = R.one();
    for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        r = R.mul(r, r);
        if (mpz_tstbit(e.get_mpz_t(), i)) r = R.reduce(r.shifted(1));
    }
    return r;
}

/// p(y) for y in R, by Horner.
inline Poly eval_in(const Poly& p, const Poly& y, const QuotientRing& R) {
    Poly acc = R.zero();
    for (auto it = p.coeffs().rbegin(); it != p.coeffs().rend(); ++it) acc = R.mul(acc, y) + Poly::constant(*it, R.base());
    return acc;
}

/// Splits a squarefree monic f, all of whose irreducible factors (over a
/// prime n) have degree d, into its factors by Cantor-Zassenhaus. n odd.
/// A factor of n may surface from any gcd.
inline std::variant<std::vector<Poly>, FactorFound, CompositeWitness> equal_degree_factor(const Poly& f, int d,
                                                                                          CounterRng& rng,
                                                                                          int max_tries = 200) {
    if (f.deg() % d) return CompositeWitness{"degree not a multiple of the factor degree"};
    std::vector<Poly> done, todo{f};
    const Int& n = f.n();
    Int nd;
    mpz_pow_ui(nd.get_mpz_t(), n.get_mpz_t(), d);
    const Int e = (nd - 1) / 2;
    int tries = 0;
    while (!todo.empty()) {
        Poly g = todo.back();
        todo.pop_back();
        if (g.deg() == d) {
            done.push_back(g);
            continue;
        }
        bool split = false;
        while (!split) {
            if (++tries > max_tries) return CompositeWitness{"equal-degree splitting did not terminate"};
            QuotientRing R(g);
            std::vector<Int> c(g.deg());
            for (auto& x : c) x = rng.below(n);
            Poly a = R.reduce(Poly(c, g.modulus()));
            if (a.deg() < 1) continue;
            Poly b = R.pow(a, e) - R.one();
            auto h = try_gcd(g, b);
            if (auto* ff = std::get_if<FactorFound>(&h)) return *ff;
            Poly hp = std::get<Poly>(h);
            if (hp.deg() <= 0 || hp.deg() == g.deg()) continue;
            if (hp.deg() % d) return CompositeWitness{"splitting produced a factor of unexpected degree"};
            auto q = divrem_monic(g, hp);
            if (!q.second.is_zero()) return CompositeWitness{"gcd does not divide"};
            todo.push_back(hp);
            todo.push_back(q.first);
            split = true;
        }
    }
    return done;
}

}  // namespace cide
