#pragma once

// Imaginary quadratic orders, Cornacchia splitting, Hilbert class
// polynomials and CM curve construction.

#include <boost/multiprecision/mpfr.hpp>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <mutex>
#include <sstream>
#include <string>

#include "cide/ec.hpp"

namespace cide {

/// Maximal order of discriminant D < 0 (conductor kept for completeness, always 1).
struct QuadOrder {
    long D;
    long f = 1;

    long abs_d() const { return -D; }
    /// Number of units: 6 for D=-3, 4 for D=-4, else 2.
    int unit_count() const { return D == -3 ? 6 : D == -4 ? 4 : 2; }
    bool operator==(const QuadOrder&) const = default;
};

inline bool is_fundamental_discriminant(long D) {
    if (D >= 0) return false;
    auto squarefree = [](long x) {
        for (long p = 2; p * p <= x; ++p)
            if (x % (p * p) == 0) return false;
        return true;
    };
    const long r = ((D % 4) + 4) % 4;
    if (r == 1) return squarefree(-D);
    if (r != 0) return false;
    const long m = D / 4;
    const long rm = ((m % 4) + 4) % 4;
    return (rm == 2 || rm == 3) && squarefree(-m);
}

inline QuadOrder make_order(long D) {
    if (!is_fundamental_discriminant(D)) throw PreconditionError("make_order: D must be a fundamental discriminant");
    return QuadOrder{D, 1};
}

/// (a + b*sqrt(D))/2 in the maximal order of discriminant D.
struct QuadInt {
    Int a, b;
    long D;

    Int norm() const { return (a * a - Int(D) * b * b) / 4; }
    const Int& trace() const { return a; }
    QuadInt conj() const { return {a, -b, D}; }
    bool valid() const { return mod(a * a - Int(D) * b * b, Int(4)) == 0; }
    bool operator==(const QuadInt& o) const { return a == o.a && b == o.b && D == o.D; }

    friend QuadInt operator*(const QuadInt& x, const QuadInt& y) {
        return {(x.a * y.a + Int(x.D) * x.b * y.b) / 2, (x.a * y.b + x.b * y.a) / 2, x.D};
    }
    friend QuadInt operator+(const QuadInt& x, const QuadInt& y) { return {x.a + y.a, x.b + y.b, x.D}; }
    friend QuadInt operator-(const QuadInt& x, const QuadInt& y) { return {x.a - y.a, x.b - y.b, x.D}; }
    QuadInt operator-() const { return {-a, -b, D}; }
    static QuadInt integer(const Int& k, long D) { return {2 * k, 0, D}; }
};

inline std::string to_string(const QuadInt& x) {
    return "(" + to_dec(x.a) + (x.b < 0 ? " - " : " + ") + to_dec(abs(x.b)) + "*sqrt(" + std::to_string(x.D) + "))/2";
}

/// Units of the maximal order, in the order 1, -1, then (for D=-3, -4) the
/// remaining ones by successive multiplication with a generator.
inline std::vector<QuadInt> units(const QuadOrder& O) {
    const long D = O.D;
    if (D == -4) return {{2, 0, D}, {-2, 0, D}, {0, 1, D}, {0, -1, D}};
    if (D == -3) return {{2, 0, D}, {-2, 0, D}, {-1, 1, D}, {1, -1, D}, {-1, -1, D}, {1, 1, D}};
    return {{2, 0, D}, {-2, 0, D}};
}

struct NoSplit {};

/// nu with nu*conj(nu) = n, by square root of D mod n and Cornacchia's descent.
inline std::variant<QuadInt, NoSplit, FactorFound, CompositeWitness> cornacchia_split(const Int& n, const QuadOrder& O) {
    if (n < 3 || mpz_even_p(n.get_mpz_t())) throw PreconditionError("cornacchia_split: n must be odd >= 3");
    const Int D(O.D);
    if (Int g = gcd(D, n); g != 1) {
        if (g == n) return NoSplit{};
        return FactorFound{g};
    }
    auto sq = sqrt_mod(D, n);
    if (holds<NotSquare>(sq)) return NoSplit{};
    if (auto* f = std::get_if<FactorFound>(&sq)) return *f;
    if (auto* w = std::get_if<CompositeWitness>(&sq)) return *w;
    Int x0 = std::get<SqrtRoot>(sq).root;
    if (mod(x0 - D, Int(2)) != 0) x0 = n - x0;
    const Int four_n = 4 * n;
    Int a = 2 * n, b = x0;
    const Int lim = sqrt(four_n);
    while (b > lim) {
        Int r = a % b;
        a = b;
        b = r;
    }
    const Int rest = four_n - b * b;
    const Int ad = -D;
    if (rest % ad != 0) return NoSplit{};
    const Int c = rest / ad;
    if (!mpz_perfect_square_p(c.get_mpz_t())) return NoSplit{};
    QuadInt nu{b, sqrt(c), O.D};
    if (nu.norm() != n) return CompositeWitness{"Cornacchia descent produced a wrong norm"};
    return nu;
}

/// N(nu - u) = n + 1 - Tr(u*nu) for every unit u.
inline std::vector<Int> atkin_sizes(const QuadInt& nu, const QuadOrder& O) {
    std::vector<Int> out;
    const Int n = nu.norm();
    for (const auto& u : units(O)) out.push_back(n + 1 - (u * nu).trace());
    return out;
}

struct ReducedForm {
    long a, b, c;
};

/// Reduced positive definite forms (a, b, c) of discriminant D.
inline std::vector<ReducedForm> reduced_forms(long D) {
    std::vector<ReducedForm> out;
    const long ad = -D;
    for (long a = 1; 3 * a * a <= ad; ++a) {
        for (long b = -a + 1; b <= a; ++b) {
            const long num = b * b - D;
            if (num % (4 * a)) continue;
            const long c = num / (4 * a);
            if (c < a) continue;
            if (b < 0 && a == c) continue;
            if (std::gcd(std::gcd(a, std::labs(b)), c) != 1) continue;
            out.push_back({a, b, c});
        }
    }
    return out;
}

inline long class_number(long D) { return static_cast<long>(reduced_forms(D).size()); }

struct PrecisionExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Monic class polynomial with integer coefficients, ascending.
struct ClassPolynomial {
    QuadOrder order;
    std::vector<Int> coeffs;
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    Poly mod_n(const Modulus& m) const { return Poly(coeffs, m); }
};

namespace detail {

using Real = boost::multiprecision::mpfr_float;

struct Cx {
    Real re, im;
};

inline Cx cmul(const Cx& x, const Cx& y) { return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re}; }
inline Cx cadd(const Cx& x, const Cx& y) { return {x.re + y.re, x.im + y.im}; }
inline Cx csub(const Cx& x, const Cx& y) { return {x.re - y.re, x.im - y.im}; }
inline Cx cdiv(const Cx& x, const Cx& y) {
    const Real d = y.re * y.re + y.im * y.im;
    return {(x.re * y.re + x.im * y.im) / d, (x.im * y.re - x.re * y.im) / d};
}

// j at the root of the form: j = (256h + 1)^3 / h with h = q * prod (1 + q^n)^24.
inline Cx j_of_form(const ReducedForm& f, long D, long bits) {
    const Real pi = boost::multiprecision::mpfr_float(boost::math::constants::pi<Real>());
    const Real mag = exp(-pi * sqrt(Real(-D)) / f.a);
    const Real ang = -pi * f.b / f.a;
    const Cx q{mag * cos(ang), mag * sin(ang)};
    Cx prod{Real(1), Real(0)}, qn = q;
    const Real eps = pow(Real(2), -bits - 16);
    while (abs(qn.re) + abs(qn.im) > eps) {
        prod = cmul(prod, Cx{Real(1) + qn.re, qn.im});
        qn = cmul(qn, q);
    }
    Cx p24{Real(1), Real(0)}, base = prod;
    for (int e = 24; e; e >>= 1) {
        if (e & 1) p24 = cmul(p24, base);
        base = cmul(base, base);
    }
    const Cx h = cmul(q, p24);
    const Cx t = cadd(Cx{h.re * 256, h.im * 256}, Cx{Real(1), Real(0)});
    return cdiv(cmul(t, cmul(t, t)), h);
}

inline std::mutex& mpfr_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

/// Hilbert class polynomial by floating-point evaluation of j at the reduced
/// forms, with precision escalated until every coefficient rounds within 1/4.
inline ClassPolynomial compute_class_polynomial(const QuadOrder& O, long max_abs_d = 1000000) {
    using detail::Cx;
    using detail::Real;
    if (O.abs_d() > max_abs_d) throw PreconditionError("class_polynomial: |D| above configured bound");
    const auto forms = reduced_forms(O.D);
    double est = 0;
    for (const auto& f : forms) est += M_PI * std::sqrt(static_cast<double>(-O.D)) / f.a / std::log(2.0);
    long bits = static_cast<long>(est) + 64 + 8 * static_cast<long>(forms.size());
    std::lock_guard<std::mutex> lock(detail::mpfr_mutex());
    for (int attempt = 0; attempt < 4; ++attempt, bits *= 2) {
        const unsigned digits = static_cast<unsigned>(bits * 0.30103) + 10;
        Real::default_precision(digits);
        std::vector<Cx> poly{Cx{Real(1), Real(0)}};
        for (const auto& f : forms) {
            const Cx j = detail::j_of_form(f, O.D, bits);
            std::vector<Cx> next(poly.size() + 1, Cx{Real(0), Real(0)});
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i + 1] = cadd(next[i + 1], poly[i]);
                next[i] = csub(next[i], cmul(poly[i], j));
            }
            poly = std::move(next);
        }
        std::vector<Int> coeffs;
        bool ok = true;
        for (const auto& c : poly) {
            const Real r = round(c.re);
            if (abs(c.re - r) >= Real(0.25) || abs(c.im) >= Real(0.25)) {
                ok = false;
                break;
            }
            coeffs.emplace_back(r.str(0, std::ios_base::fixed).substr(0, r.str(0, std::ios_base::fixed).find('.')));
        }
        if (ok) return ClassPolynomial{O, coeffs};
    }
    throw PrecisionExhausted("class_polynomial: precision exhausted");
}

/// Class-number-one polynomials X - j.
inline const std::map<long, Int>& class_number_one_j() {
    static const std::map<long, Int> table = {
        {-3, Int(0)},
        {-4, Int(1728)},
        {-7, Int(-3375)},
        {-8, Int(8000)},
        {-11, Int(-32768)},
        {-12, Int(54000)},
        {-16, Int(287496)},
        {-19, Int(-884736)},
        {-27, Int(-12288000)},
        {-28, Int(16581375)},
        {-43, Int(-884736000)},
        {-67, Int("-147197952000")},
        {-163, Int("-262537412640768000")},
    };
    return table;
}

/// Cache of class polynomials: built-in class-number-one table, an optional
/// table file (lines "D h c_0 ... c_h"), then computation on demand.
class ClassPolyCache {
public:
    static ClassPolyCache& instance() {
        static ClassPolyCache c;
        return c;
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw PreconditionError("cannot open class polynomial table " + path);
        std::string line;
        std::lock_guard<std::mutex> lock(m_);
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            long D, h;
            ls >> D >> h;
            std::vector<Int> c;
            std::string tok;
            while (ls >> tok) c.emplace_back(tok);
            if (static_cast<long>(c.size()) != h + 1 || c.back() != 1)
                throw PreconditionError("malformed class polynomial table line: " + line);
            cache_[D] = ClassPolynomial{QuadOrder{D, 1}, c};
        }
    }

    ClassPolynomial get(const QuadOrder& O) {
        {
            std::lock_guard<std::mutex> lock(m_);
            if (auto it = cache_.find(O.D); it != cache_.end()) return it->second;
        }
        ClassPolynomial H = compute(O);
        std::lock_guard<std::mutex> lock(m_);
        return cache_.emplace(O.D, H).first->second;
    }

private:
    ClassPolyCache() {
        for (const auto& [D, j] : class_number_one_j()) cache_[D] = ClassPolynomial{QuadOrder{D, 1}, {-j, Int(1)}};
        if (const char* p = std::getenv("CIDE_CLASSPOLY_TABLE")) load_file(p);
    }
    static ClassPolynomial compute(const QuadOrder& O) { return compute_class_polynomial(O); }

    std::mutex m_;
    std::map<long, ClassPolynomial> cache_;
};

inline ClassPolynomial class_polynomial(const QuadOrder& O) { return ClassPolyCache::instance().get(O); }

/// Roots in Z/nZ of a polynomial, treating n as prime: gcd with X^n - X,
/// then equal-degree splitting. Returned sorted ascending.
inline std::variant<std::vector<Int>, FactorFound, CompositeWitness> roots_mod(const Poly& H, std::uint64_t seed) {
    const Modulus& m = H.modulus();
    auto mon = try_make_monic(H);
    if (auto* f = std::get_if<FactorFound>(&mon)) return *f;
    const Poly h = std::get<Poly>(mon);
    if (h.deg() < 1) return std::vector<Int>{};
    if (h.deg() == 1) return std::vector<Int>{mod(-h.coeff(0), H.n())};
    QuotientRing R(h);
    Poly xn = x_pow_mod(H.n(), R);
    auto g = try_gcd(h, xn - Poly::x(m));
    if (auto* f = std::get_if<FactorFound>(&g)) return *f;
    const Poly lin = std::get<Poly>(g);
    std::vector<Int> out;
    if (lin.deg() < 1) return out;
    // Zero root handled separately: equal-degree splitting needs X coprime to the product.
    Poly work = lin;
    if (work.coeff(0) == 0) {
        out.push_back(0);
        work = divrem_monic(work, Poly::x(m)).first;
    }
    if (work.deg() >= 1) {
        CounterRng rng(seed);
        auto split = equal_degree_factor(work, 1, rng);
        if (auto* f = std::get_if<FactorFound>(&split)) return *f;
        if (auto* w = std::get_if<CompositeWitness>(&split)) return *w;
        for (const auto& p : std::get<std::vector<Poly>>(split)) out.push_back(mod(-p.coeff(0), H.n()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Curve with j-invariant j0, scaled by the twist selector c.
inline std::variant<CurveParams, FactorFound> curve_from_j(const Int& j0_in, const Int& c, const Int& n) {
    const Int j0 = mod(j0_in, n);
    if (j0 == 0) return make_curve(0, c, n);
    if (j0 == mod(Int(1728), n)) return make_curve(c, 0, n);
    auto inv = try_invert(1728 - j0, n);
    if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
    const Int k = mulmod(j0, std::get<Unit>(inv).inverse, n);
    const Int c2 = mulmod(c, c, n);
    return make_curve(mulmod(3 * k, c2, n), mulmod(2 * k, mulmod(c2, c, n), n), n);
}

/// 1728 * 4A^3 / (4A^3 + 27B^2).
inline std::variant<Int, FactorFound> j_invariant(const CurveParams& E) {
    const Int& n = E.n();
    const Int a3 = mod(4 * E.A * E.A * E.A, n);
    auto inv = try_invert(E.discriminant(), n);
    if (auto* f = std::get_if<FactorFound>(&inv)) return *f;
    if (holds<ZeroElement>(inv)) throw PreconditionError("j_invariant: singular curve");
    return mulmod(mulmod(1728, a3, n), std::get<Unit>(inv).inverse, n);
}

struct Associated {};
struct Violation {
    std::string clause;
};

/// Decidable parts of the association between a curve and a CM order.
inline std::variant<Associated, Violation> check_association(const CurveParams& E, const QuadOrder& O,
                                                             const QuadInt& nu, const Int& j0) {
    const Int& n = E.n();
    if (nu.D != O.D || !nu.valid()) return Violation{"order"};
    if (nu.norm() != n) return Violation{"norm"};
    if (gcd(n, nu.trace()) != 1) return Violation{"coprim"};
    const ClassPolynomial H = class_polynomial(O);
    if (H.mod_n(E.modulus)(j0) != 0) return Violation{"root"};
    auto j = j_invariant(E);
    if (holds<FactorFound>(j) || std::get<Int>(j) != mod(j0, n)) return Violation{"j-invariant"};
    return Associated{};
}

}  // namespace cide
