#pragma once

// Proving pipeline for a dual pair (m, n) and the search-free verifier.

#include <future>
#include <mutex>
#include <set>

#include "cide/certificate.hpp"

namespace cide {

struct Config {
    long disc_bound = 100000;
    std::uint64_t seed = 1;
    long budget = 400;  // point attempts in the dual search
    AceConfig ace;
    int exceptional_cap = 8;
    unsigned long aux_bound = 2000;  // largest auxiliary conductor
    std::vector<long> discriminants;  // explicit order list; empty means proving_orders(disc_bound)
    int max_pairs = 6;                // dual pairs compared when the first plan is expensive
    bool mr_gate = true;              // off only to push composites through the later stages
};

/// Orders with |D| <= bound, D = 5 mod 8 and class number <= max_h, by
/// class number then |D|. Other discriminants force tr(nu) even for odd n,
/// so every partner N(+-nu - 1) is even. D = -3 goes last: its elliptic
/// Gauss sums vanish for most conductors.
inline std::vector<QuadOrder> proving_orders(long bound, long max_h = 100) {
    static std::mutex mu;
    static std::map<std::pair<long, long>, std::vector<QuadOrder>> cache;
    std::lock_guard lock(mu);
    auto& out = cache[{bound, max_h}];
    if (!out.empty()) return out;
    std::vector<std::pair<long, long>> keyed;  // (h, |D|)
    for (long D = -11; D >= -bound; D -= 8)
        if (is_fundamental_discriminant(D))
            if (const long h = class_number(D); h <= max_h) keyed.emplace_back(h, -D);
    std::sort(keyed.begin(), keyed.end());
    for (auto [h, d] : keyed) out.push_back(make_order(-d));
    if (bound >= 3) out.push_back(make_order(-3));
    return out;
}

/// Operation counts by stage: I dual search, ACE and parameters, II
/// cyclotomy (extensions and Jacobi sums), III elliptic extensions.
struct StageOps {
    std::uint64_t dual = 0, ace = 0, cpp = 0, elliptic = 0;
    std::uint64_t total() const { return dual + ace + cpp + elliptic; }
};

struct Composite {
    std::string evidence;
    std::optional<Int> factor;
    std::optional<Int> mr_witness;
};

struct Inconclusive {
    std::string reason;
};

using ProveOutcome = std::variant<Certificate, Composite, Inconclusive>;

struct ProveReport {
    ProveOutcome outcome;
    StageOps ops;
};

/// (m rem S - n rem S)^4 > 16 max(m, n), i.e. the residues differ by more
/// than 2 max(m, n)^(1/4).
inline bool size_bound_holds(const Int& m, const Int& n, const Int& S) {
    Int d = mod(m, S) - mod(n, S);
    Int d4 = d * d;
    d4 *= d4;
    return d4 > 16 * (m > n ? m : n);
}

/// Odd prime conductors dividing S = L s'.
inline std::vector<unsigned long> conductors(unsigned long s_prime, const std::vector<unsigned long>& L_primes) {
    std::set<unsigned long> qs(L_primes.begin(), L_primes.end());
    for (auto [q, e] : factor_small(s_prime)) {
        (void)e;
        if (q > 2) qs.insert(q);
    }
    return {qs.begin(), qs.end()};
}

/// (q, p, p^a) for every p^a exactly dividing q - 1.
struct CharSlot {
    unsigned long q, p, pa;
    auto operator<=>(const CharSlot&) const = default;
};

inline std::vector<CharSlot> char_slots(const std::vector<unsigned long>& qs) {
    std::vector<CharSlot> out;
    for (unsigned long q : qs)
        for (auto [p, a] : factor_small(q - 1)) out.push_back({q, p, powul(p, a)});
    return out;
}

/// J_{p^k}^b J_r = zeta_{p^k}^eta with n = b p^k + r.
inline bool cpp_check(const Int& n, const CharacterData& chi, const CycloExt& e, unsigned long eta) {
    const unsigned long pk = chi.order;
    auto J = multiple_jacobi_sums(chi, e);
    RingElt lhs = e.ring.pow(J[pk - 1], n / pk);
    if (const unsigned long r = mod_ul(n, pk); r > 0) lhs = e.ring.mul(lhs, J[r - 1]);
    return eta < pk && e.ring.equal(lhs, e.root_pow(pk, static_cast<long>(eta)));
}

namespace detail {

struct SideSpec {
    std::string side;
    Int N;
    CurveParams E;
    Int trace;
    std::vector<unsigned long> x_eig;  // per L prime
};

struct SideOutput {
    std::vector<ExtRecord> exts;
    std::vector<CharRecord> chars;
    std::vector<ElkiesRecord> elkies;
    std::uint64_t cpp_ops = 0, ell_ops = 0;
};

using SideOutcome = std::variant<SideOutput, FactorFound, CompositeWitness, ExceptionalConductor, Inconclusive>;

using ExtCache = std::map<std::pair<unsigned long, unsigned long>, CycloExt>;

inline std::vector<Int> coeffs_of(const Poly& f) {
    std::vector<Int> c;
    for (int i = 0; i <= f.deg(); ++i) c.push_back(f.coeff(i));
    return c;
}

inline SideOutcome run_side(const SideSpec& sp, const std::vector<unsigned long>& qs, const std::vector<unsigned long>& L_primes,
                            const Int& avoid, const Config& cfg, ExtCache& cache) {
    SideOutput out;
    const Int& N = sp.N;
    std::uint64_t mark = op_counter();
    const auto slots = char_slots(qs);
    std::map<unsigned long, unsigned long> need;
    for (const auto& c : slots) need[c.p] = std::max(need[c.p], valuation(Int(c.pa), c.p));
    std::map<unsigned long, CycloExt> exts;
    std::map<unsigned long, unsigned long> Ks;
    for (auto [p, a] : need) {
        if (mpz_divisible_ui_p(N.get_mpz_t(), p)) return FactorFound{Int(p)};
        const unsigned long K = std::max(saturation_exponent(p, N), a);
        Ks[p] = K;
        auto it = cache.find({p, K});
        if (it == cache.end()) {
            std::optional<std::variant<CycloExt, CompositeWitness, FactorFound>> bo;
            try {
                bo = build_working_extension(N, p, K, cfg.seed);
            } catch (const PreconditionError& e) {
                return Inconclusive{std::string("working extension: ") + e.what()};
            }
            const auto& b = *bo;
            if (auto* f = std::get_if<FactorFound>(&b)) return *f;
            if (auto* w = std::get_if<CompositeWitness>(&b)) return *w;
            it = cache.emplace(std::pair{p, K}, std::get<CycloExt>(b)).first;
        }
        exts.emplace(p, it->second);
        out.exts.push_back({sp.side, p, K, coeffs_of(it->second.psi())});
    }

    std::map<unsigned long, bool> primitive;
    for (const auto& c : slots) {
        auto rec = cpp_character(N, make_character(c.q, c.pa), exts.at(c.p));
        if (auto* w = std::get_if<CompositeWitness>(&rec)) return *w;
        const auto& r = std::get<CppRecord>(rec);
        out.chars.push_back({sp.side, c.q, c.pa, r.eta, false});
        primitive[c.p] = primitive[c.p] || r.eta % c.p != 0;
    }
    for (auto [p, ok] : primitive) {
        if (ok) continue;
        bool found = false;
        for (unsigned long q = p + 1; q <= cfg.aux_bound && !found; q += p) {
            if (!is_small_prime(q) || mpz_divisible_ui_p(avoid.get_mpz_t(), q)) continue;
            const unsigned long v = valuation(Int(q - 1), p);
            if (v > Ks[p]) continue;
            const unsigned long pv = powul(p, static_cast<unsigned>(v));
            auto rec = cpp_character(N, make_character(q, pv), exts.at(p));
            if (auto* w = std::get_if<CompositeWitness>(&rec)) return *w;
            const auto& r = std::get<CppRecord>(rec);
            if (r.eta % p == 0) continue;
            out.chars.push_back({sp.side, q, pv, r.eta, true});
            found = true;
        }
        if (!found) return Inconclusive{"no auxiliary conductor gives a primitive root of unity for p = " + std::to_string(p)};
    }
    out.cpp_ops = op_counter() - mark;
    mark = op_counter();

    for (std::size_t i = 0; i < L_primes.size(); ++i) {
        const unsigned long ell = L_primes[i];
        auto F = elkies_factor(sp.E, ell, sp.x_eig[i]);
        if (auto* f = std::get_if<FactorFound>(&F)) return *f;
        if (auto* w = std::get_if<CompositeWitness>(&F)) return *w;
        auto er = make_elkies_ring(sp.E, ell, std::get<Poly>(F));
        if (auto* f = std::get_if<FactorFound>(&er)) return *f;
        if (auto* w = std::get_if<CompositeWitness>(&er)) return *w;
        auto res = elliptic_extension_test(N, std::get<ElkiesRing>(er), exts, sp.trace);
        if (auto* f = std::get_if<FactorFound>(&res)) return *f;
        if (auto* w = std::get_if<CompositeWitness>(&res)) return *w;
        if (auto* x = std::get_if<ExceptionalConductor>(&res)) return *x;
        const auto& wit = std::get<EllipticExtensionWitness>(res);
        if (wit.lambda != sp.x_eig[i])
            return CompositeWitness{"Frobenius eigenvalue on the Elkies factor differs from the one it was built for (l=" +
                                    std::to_string(ell) + ")"};
        out.elkies.push_back({sp.side, ell, coeffs_of(std::get<Poly>(F)), wit.lambda, wit.etas});
    }
    out.ell_ops = op_counter() - mark;
    return out;
}

inline std::string describe(const SideOutcome& o) {
    if (auto* f = std::get_if<FactorFound>(&o)) return "factor " + to_dec(f->factor);
    if (auto* w = std::get_if<CompositeWitness>(&o)) return w->reason;
    if (auto* i = std::get_if<Inconclusive>(&o)) return i->reason;
    return {};
}

inline Int perfect_power_root(const Int& n) {
    for (unsigned long k = mpz_sizeinbase(n.get_mpz_t(), 2); k >= 2; --k) {
        const Int r = iroot(n, k);
        Int rk;
        mpz_pow_ui(rk.get_mpz_t(), r.get_mpz_t(), k);
        if (rk == n) return r;
    }
    return n;
}

}  // namespace detail

/// Cyclotomy parameters, a good L and the least s' meeting the size bound.
struct Plan {
    Parameters params;
    GoodL good;
    unsigned long s_prime = 1;
};

/// Rough Elkies-stage cost of L: the factor search at l works modulo a
/// polynomial of degree ~l^2/2, and each elliptic Gauss sum of order q^a in
/// a ring of dimension ~(l/2) phi(q^a). The factor 14 was measured.
inline Int plan_cost(const GoodL& g) {
    Int cost = 0;
    for (unsigned long ell : g.primes) {
        const Int l2 = Int(ell) * ell;
        cost += l2 * l2;
        for (auto [q, a] : factor_small(ell - 1)) {
            const unsigned long phi = powul(q, a - 1) * (q - 1);
            cost += 14 * l2 * phi * phi;
        }
    }
    return cost;
}

/// Tries every even t | 5040 and keeps the plan whose L is cheapest for the
/// Elkies stage. Ties go to the smaller t.
inline std::optional<Plan> plan_parameters(const DualPair& pair, const AceConfig& ace) {
    const Int& m = pair.m;
    const Int& n = pair.n;
    const Int floor = iroot(16 * (m > n ? m : n), 4);
    std::optional<Plan> best;
    Int best_cost;
    std::set<unsigned long> tried;
    for (unsigned long t = 2; t <= 5040; t += 2) {
        if (5040 % t) continue;
        auto P = parameters_for(t, floor, m * n);
        if (!P || !tried.insert(P->s).second) continue;
        auto gl = find_good_L(pair.mu, P->t, m * n * Int(P->s), ace);
        if (!holds<GoodL>(gl)) continue;
        GoodL g = std::get<GoodL>(std::move(gl));
        std::optional<unsigned long> sp;
        for (unsigned long d = 1; d <= P->s && !sp; ++d)
            if (P->s % d == 0 && size_bound_holds(m, n, g.L * Int(d))) sp = d;
        if (!sp) continue;
        const Int cost = plan_cost(g);
        if (!best || cost < best_cost) {
            best = Plan{*P, std::move(g), *sp};
            best_cost = cost;
        }
    }
    return best;
}

/// Proves n prime together with a dual partner m, or reports why not.
inline ProveReport prove(const Int& n, const Config& cfg = {}) {
    if (n < 5 || mpz_even_p(n.get_mpz_t())) throw PreconditionError("prove: n must be odd and at least 5");
    StageOps ops;
    std::uint64_t mark = op_counter();
    auto done = [&](ProveOutcome o) {
        // Give bare composite verdicts something checkable when one is cheap to find.
        if (auto* c = std::get_if<Composite>(&o); c && !c->factor && !c->mr_witness) {
            Int w;
            if (!strong_pseudoprime(n, kDefaultRounds, cfg.seed, &w)) c->mr_witness = w;
        }
        return ProveReport{std::move(o), ops};
    };

    Int witness;
    if (cfg.mr_gate && !strong_pseudoprime(n, kDefaultRounds, cfg.seed, &witness)) {
        ops.dual = op_counter() - mark;
        return done(Composite{"Miller-Rabin witness " + to_dec(witness), std::nullopt, witness});
    }
    if (is_perfect_power(n)) return done(Composite{"perfect power", detail::perfect_power_root(n), std::nullopt});
    if (mpz_divisible_ui_p(n.get_mpz_t(), 3)) return done(Composite{"divisible by 3", Int(3), std::nullopt});

    std::vector<QuadOrder> orders;
    for (long D : cfg.discriminants) orders.push_back(make_order(D));
    if (orders.empty()) orders = proving_orders(cfg.disc_bound);
    // Compare plans over a few dual pairs; stop once every l is small.
    std::optional<DualPair> chosen;
    std::optional<Plan> first_plan;
    Int best_cost;
    const Int cheap = 2 * Int(41 * 41) * (41 * 41);
    std::size_t start = 0;
    for (int tries = 0; tries < cfg.max_pairs && start < orders.size(); ++tries) {
        mark = op_counter();
        auto dual = search_dual(n, std::vector<QuadOrder>(orders.begin() + static_cast<long>(start), orders.end()),
                                cfg.budget, cfg.seed);
        ops.dual += op_counter() - mark;
        if (auto* f = std::get_if<FactorFound>(&dual)) return done(Composite{"factor found in the dual search", f->factor, std::nullopt});
        if (auto* w = std::get_if<CompositeWitness>(&dual)) return done(Composite{w->reason, std::nullopt, std::nullopt});
        if (auto* nf = std::get_if<NotFound>(&dual)) {
            if (chosen) break;
            return done(Inconclusive{"dual search: " + nf->reason});
        }
        DualPair cand = std::get<DualPair>(std::move(dual));
        start = static_cast<std::size_t>(std::find(orders.begin(), orders.end(), cand.order) - orders.begin()) + 1;
        mark = op_counter();
        auto plan = plan_parameters(cand, cfg.ace);
        ops.ace += op_counter() - mark;
        if (!plan) {
            if (!chosen) chosen = cand;
            continue;
        }
        const Int cost = plan_cost(plan->good);
        if (!first_plan || cost < best_cost) {
            chosen = cand;
            first_plan = plan;
            best_cost = cost;
        }
        if (best_cost <= cheap) break;
    }
    const DualPair pair = *chosen;
    const Int& m = pair.m;
    const QuadInt one = QuadInt::integer(1, pair.mu.D);

    AceConfig ace = cfg.ace;
    detail::ExtCache cache_m, cache_n;
    for (int round = 0; round <= cfg.exceptional_cap; ++round) {
        mark = op_counter();
        auto plan = round == 0 ? first_plan : plan_parameters(pair, ace);
        ops.ace += op_counter() - mark;
        if (!plan) return done(Inconclusive{"no cyclotomy parameters with a good L and the size bound"});
        const Parameters& P = plan->params;
        const GoodL& g = plan->good;
        const std::optional<unsigned long> s_prime = plan->s_prime;
        const Int S = g.L * Int(*s_prime);
        const auto qs = conductors(*s_prime, g.primes);
        const Int avoid = m * n * S;

        detail::SideSpec sn{"n", n, pair.curve_n, n + 1 - m, {}};
        detail::SideSpec sm{"m", m, pair.curve_m, m + 1 - n, {}};
        for (unsigned long ell : g.primes) {
            sn.x_eig.push_back(quad_mod_prime(pair.mu + one, ell));
            sm.x_eig.push_back((ell - quad_mod_prime(pair.mu, ell)) % ell);
        }
        // Each side counts its own thread's operations.
        auto counted = [&](const detail::SideSpec& sp, detail::ExtCache& cache) {
            const std::uint64_t before = op_counter();
            auto r = detail::run_side(sp, qs, g.primes, avoid, cfg, cache);
            return std::pair{std::move(r), op_counter() - before};
        };
        auto fm = std::async(std::launch::async, [&] { return counted(sm, cache_m); });
        auto fn = std::async(std::launch::async, [&] { return counted(sn, cache_n); });
        const auto [on, ops_n] = fn.get();
        const auto [om, ops_m] = fm.get();
        for (const auto& [o, used] : {std::pair{&on, ops_n}, std::pair{&om, ops_m}}) {
            if (auto* so = std::get_if<detail::SideOutput>(o)) {
                ops.cpp += so->cpp_ops;
                ops.elliptic += used - so->cpp_ops;
            } else {
                ops.elliptic += used;
            }
        }

        if (auto* f = std::get_if<FactorFound>(&on)) return done(Composite{"factor found while proving n", f->factor, std::nullopt});
        if (auto* w = std::get_if<CompositeWitness>(&on)) return done(Composite{w->reason, std::nullopt, std::nullopt});
        if (holds<Inconclusive>(on)) return done(std::get<Inconclusive>(on));
        if (holds<FactorFound>(om) || holds<CompositeWitness>(om) || holds<Inconclusive>(om))
            return done(Inconclusive{"partner m: " + detail::describe(om)});
        bool exceptional = false;
        for (const auto* o : {&on, &om})
            if (auto* x = std::get_if<ExceptionalConductor>(o)) {
                ace.excluded.insert(x->ell);
                exceptional = true;
            }
        if (exceptional) continue;

        const auto& rn = std::get<detail::SideOutput>(on);
        const auto& rm = std::get<detail::SideOutput>(om);
        Certificate c;
        c.pair = pair;
        c.s = P.s;
        c.t = P.t;
        c.s_prime = *s_prime;
        c.L = g.L;
        c.S = S;
        c.L_primes = g.primes;
        c.excluded.assign(ace.excluded.begin(), ace.excluded.end());
        c.phi_L = g.phi_L;
        c.M = g.joint.M;
        c.joint = g.joint.sols;
        for (const auto* r : {&rm, &rn}) {
            c.exts.insert(c.exts.end(), r->exts.begin(), r->exts.end());
            c.chars.insert(c.chars.end(), r->chars.begin(), r->chars.end());
            c.elkies.insert(c.elkies.end(), r->elkies.begin(), r->elkies.end());
        }
        for (std::size_t i = 0; i < g.primes.size(); ++i) {
            const unsigned long ell = g.primes[i];
            const EvRecord ev{ell, rn.elkies[i].lambda, (ell - rm.elkies[i].lambda) % ell};
            if (!check_ev_condition(ev.lambda_m, ev.lambda_n, pair.mu, ell))
                return done(Composite{"eigenvalues do not come from mu at l = " + std::to_string(ell), std::nullopt, std::nullopt});
            c.ev.push_back(ev);
        }
        return done(std::move(c));
    }
    return done(Inconclusive{"too many exceptional conductors"});
}

struct Valid {};

struct Invalid {
    std::string clause;
    std::string detail;
};

using VerifyOutcome = std::variant<Valid, Invalid>;

struct VerifyReport {
    VerifyOutcome outcome;
    std::uint64_t ops = 0;
};

namespace detail {

inline std::optional<Invalid> verify_body(const Certificate& c) {
    auto bad = [](std::string clause, std::string d = {}) { return std::optional<Invalid>(Invalid{std::move(clause), std::move(d)}); };
    if (c.version != 1) return bad("Version");
    if (c.verdict != "prime") return bad("Verdict");
    const DualPair& p = c.pair;
    if (auto clause = check_dual_pair(p)) return bad("DualPair", *clause);
    const Int &m = p.m, &n = p.n;

    // Parameters and the good L.
    if (c.s == 0 || c.s_prime == 0 || c.t != carmichael_lambda(c.s)) return bad("Params", "t is not lambda(s)");
    if (c.s % c.s_prime != 0) return bad("Params", "s' does not divide s");
    if (c.L_primes.empty()) return bad("Params", "empty L");
    Int L = 1;
    unsigned long phi = 1;
    std::set<unsigned long> seen;
    for (unsigned long ell : c.L_primes) {
        if (!seen.insert(ell).second) return bad("Params", "repeated prime in L");
        if (std::find(c.excluded.begin(), c.excluded.end(), ell) != c.excluded.end()) return bad("Params", "excluded prime in L");
        if (ell > 100000 || !ace_candidate(p.mu, ell, m * n * Int(c.s))) return bad("Params", "unsuitable prime " + std::to_string(ell));
        L *= ell;
        phi *= ell - 1;
    }
    if (L != c.L || phi != c.phi_L) return bad("Params", "L or phi(L) mismatch");
    if (c.S != L * Int(c.s_prime)) return bad("Params", "S != L s'");
    if (!size_bound_holds(m, n, c.S)) return bad("SizeBound");

    const JointSolutions J = joint_solutions(p.mu, c.L_primes);
    if (J.M != c.M || J.sols != c.joint) return bad("AceConditions", "solution log mismatch");
    GoodL g;
    g.primes = c.L_primes;
    g.L = L;
    g.phi_L = phi;
    g.joint = J;
    if (!good_L_conditions(g, c.t)) return bad("AceConditions");

    // Coverage of characters, extensions and Elkies data.
    const auto qs = conductors(c.s_prime, c.L_primes);
    const auto slots = char_slots(qs);
    const Int avoid = m * n * c.S;
    for (const std::string side : {"m", "n"}) {
        const Int& N = side == "m" ? m : n;
        std::set<CharSlot> want(slots.begin(), slots.end()), have;
        std::map<unsigned long, std::vector<unsigned long>> orders;  // p -> orders used
        for (const auto& s : slots) orders[s.p].push_back(s.pa);
        for (const auto& ch : c.chars) {
            if (ch.side != side) continue;
            if (ch.q < 3 || ch.q > 1000000 || !is_small_prime(ch.q) || ch.order < 2 || (ch.q - 1) % ch.order)
                return bad("UnexpectedRecord", "character " + std::to_string(ch.q) + ":" + std::to_string(ch.order));
            const unsigned long pp = factor_small(ch.order).front().first;
            if (factor_small(ch.order).size() != 1) return bad("UnexpectedRecord", "character order is not a prime power");
            if (ch.aux) {
                if (mpz_divisible_ui_p(avoid.get_mpz_t(), ch.q) || (ch.q - 1) / ch.order % pp == 0)
                    return bad("AuxConductor", std::to_string(ch.q));
                if (!orders.count(pp)) return bad("UnexpectedRecord", "auxiliary character for an unused prime");
                orders[pp].push_back(ch.order);
            } else {
                const CharSlot s{ch.q, pp, ch.order};
                if (!want.count(s) || !have.insert(s).second)
                    return bad("UnexpectedRecord", "character " + std::to_string(ch.q) + ":" + std::to_string(ch.order));
            }
        }
        if (have != want) return bad("MissingCoverage", "character transcript on side " + side);

        std::map<unsigned long, CycloExt> exts;
        for (const auto& e : c.exts) {
            if (e.side != side) continue;
            if (!orders.count(e.p) || exts.count(e.p)) return bad("UnexpectedRecord", "extension for p = " + std::to_string(e.p));
            if (mpz_divisible_ui_p(N.get_mpz_t(), e.p)) return bad("Extension", "p divides the modulus");
            if (e.K < saturation_exponent(e.p, N)) return bad("Extension", "exponent below saturation");
            if (e.K * std::log2(static_cast<double>(e.p)) > 60) return bad("Extension", "p^K too large");
            const unsigned long pK = powul(e.p, static_cast<unsigned>(e.K));
            for (unsigned long o : orders.at(e.p))
                if (pK % o) return bad("Extension", "p^K not divisible by a character order");
            const Modulus mod_N(N);
            const Poly psi(e.psi, mod_N);
            if (psi.deg() < 1 || psi.coeff(psi.deg()) != 1 || static_cast<std::size_t>(psi.deg()) + 1 != e.psi.size())
                return bad("Extension", "Psi must be monic");
            QuotientRing R(psi);
            CycloExt ext{R, R.theta(), pK};
            if (!holds<std::monostate>(verify_extension(ext))) return bad("Extension", "F1/F2 fail for p = " + std::to_string(e.p));
            exts.emplace(e.p, std::move(ext));
        }
        if (exts.size() != orders.size()) return bad("MissingCoverage", "working extension on side " + side);

        // Cyclotomy.
        std::map<unsigned long, bool> primitive;
        for (const auto& ch : c.chars) {
            if (ch.side != side) continue;
            const unsigned long pp = factor_small(ch.order).front().first;
            if (!cpp_check(N, make_character(ch.q, ch.order), exts.at(pp), ch.eta))
                return bad("CppEta", "q=" + std::to_string(ch.q) + " order " + std::to_string(ch.order));
            primitive[pp] = primitive[pp] || ch.eta % pp != 0;
        }
        for (const auto& [pp, ok] : primitive)
            if (!ok) return bad("CppPrimitivity", "p = " + std::to_string(pp));

        // Elliptic extensions.
        const CurveParams& E = side == "m" ? p.curve_m : p.curve_n;
        const Int trace = N + 1 - (side == "m" ? n : m);
        std::set<unsigned long> ells;
        for (const auto& r : c.elkies) {
            if (r.side != side) continue;
            const unsigned long ell = r.ell;
            if (!seen.count(ell) || !ells.insert(ell).second) return bad("UnexpectedRecord", "Elkies record for l = " + std::to_string(ell));
            const unsigned long nl = mod_ul(N, ell), lam = r.lambda;
            if (lam == 0 || lam >= ell || lam * lam % ell == nl || (lam * lam + nl) % ell == 0)
                return bad("FrobeqConsistency", "eigenvalue out of range at l = " + std::to_string(ell));
            const Poly F(r.F, Modulus(N));
            if (F.deg() != static_cast<int>((ell - 1) / 2) || F.coeff(F.deg()) != 1 || r.F.size() != (ell + 1) / 2)
                return bad("ElkiesFactor", "degree at l = " + std::to_string(ell));
            auto er = make_elkies_ring(E, ell, F);
            if (!holds<ElkiesRing>(er)) return bad("ElkiesFactor", "l = " + std::to_string(ell));
            const auto& ring = std::get<ElkiesRing>(er);
            if (!ring.ring().equal(x_pow_mod(N, ring.ring()), ring.g[lam - 1]))
                return bad("ElkiesFrobenius", "l = " + std::to_string(ell));
            if (r.etas.size() != eta_orders(ell).size()) return bad("EllipticGaussSum", "eta count at l = " + std::to_string(ell));
            auto res = elliptic_extension_test(N, ring, exts, trace, &r.etas);
            if (!holds<EllipticExtensionWitness>(res)) return bad("EllipticGaussSum", "l = " + std::to_string(ell));
            if (std::get<EllipticExtensionWitness>(res).lambda != lam) return bad("FrobeqConsistency", "l = " + std::to_string(ell));
        }
        if (ells.size() != seen.size()) return bad("MissingCoverage", "Elkies transcript on side " + side);
    }

    // Eigenvalue linkage between the two sides.
    std::set<unsigned long> ev_seen;
    for (const auto& ev : c.ev) {
        if (!seen.count(ev.ell) || !ev_seen.insert(ev.ell).second) return bad("UnexpectedRecord", "ev record");
        const ElkiesRecord *en = nullptr, *em = nullptr;
        for (const auto& r : c.elkies)
            if (r.ell == ev.ell) (r.side == "n" ? en : em) = &r;
        if (ev.lambda_m != en->lambda || ev.lambda_n != (ev.ell - em->lambda) % ev.ell)
            return bad("FrobeqConsistency", "ev record at l = " + std::to_string(ev.ell));
        if (!check_ev_condition(ev.lambda_m, ev.lambda_n, p.mu, ev.ell)) return bad("EvCondition", "l = " + std::to_string(ev.ell));
    }
    if (ev_seen.size() != seen.size()) return bad("MissingCoverage", "ev records");
    return std::nullopt;
}

}  // namespace detail

inline VerifyReport verify(const Certificate& c) {
    const std::uint64_t mark = op_counter();
    std::optional<Invalid> r;
    try {
        r = detail::verify_body(c);
    } catch (const std::exception& e) {
        r = Invalid{"Malformed", e.what()};
    }
    VerifyReport out{Valid{}, op_counter() - mark};
    if (r) out.outcome = *r;
    return out;
}

/// Parses and verifies canonical text (or its JSON mirror).
inline VerifyReport verify_text(const std::string& text) {
    try {
        return verify(parse_certificate(text));
    } catch (const std::exception& e) {
        return {Invalid{"Malformed", e.what()}, 0};
    }
}

}  // namespace cide
