#pragma once

// Search for a squarefree L on which (mu+1)^k' - mu^k = delta has only the
// trivial solution and t | phi(L).

#include <set>
#include <tuple>

#include "cide/dual.hpp"
#include "cide/elkies.hpp"

namespace cide {

struct EllkSolution {
    unsigned long k = 0, kp = 0;
    int delta = 1;
    auto operator<=>(const EllkSolution&) const = default;
};

struct DegenerateResidue {};

/// mu and conj(mu) reduced mod the fixed prime above l.
inline std::pair<unsigned long, unsigned long> embeddings(const QuadInt& mu, unsigned long ell) {
    return {quad_mod_prime(mu, ell), quad_mod_prime(mu.conj(), ell)};
}

/// All (k, k', delta), k, k' in [0, l-2], with x^k + delta = (x+1)^k' and
/// y^k + delta = (y+1)^k' mod l.
inline std::variant<std::vector<EllkSolution>, DegenerateResidue> solve_ellk_mod_prime(const QuadInt& mu,
                                                                                      unsigned long ell) {
    const auto [x, y] = embeddings(mu, ell);
    if (x == 0 || y == 0 || x + 1 == ell || y + 1 == ell) return DegenerateResidue{};
    const unsigned long e = ell - 1;
    auto table = [&](unsigned long b) {
        std::vector<unsigned long> t(e);
        unsigned long v = 1;
        for (auto& z : t) z = v, v = v * b % ell;
        return t;
    };
    const auto px = table(x), py = table(y), px1 = table(x + 1), py1 = table(y + 1);
    std::vector<EllkSolution> out;
    for (unsigned long k = 0; k < e; ++k)
        for (unsigned long kp = 0; kp < e; ++kp)
            for (int d : {1, -1}) {
                const unsigned long dd = d == 1 ? 1 : ell - 1;
                if ((px[k] + dd) % ell == px1[kp] && (py[k] + dd) % ell == py1[kp]) out.push_back({k, kp, d});
            }
    return out;
}

/// Joint solutions modulo M = lcm of the l_i - 1 seen so far.
struct JointSolutions {
    unsigned long M = 1;
    std::vector<EllkSolution> sols{{0, 0, 1}, {0, 0, -1}};
};

inline std::optional<unsigned long> crt_pair(unsigned long a, unsigned long m1, unsigned long b, unsigned long m2) {
    const unsigned long g = std::gcd(m1, m2);
    if (a % g != b % g) return std::nullopt;
    const unsigned long l = m1 / g * m2;
    for (unsigned long v = a % m1; v < l; v += m1)
        if (v % m2 == b % m2) return v;
    return std::nullopt;
}

/// Adds one prime's solutions (modulo l - 1), keeping only jointly consistent pairs.
inline JointSolutions combine(const JointSolutions& J, const std::vector<EllkSolution>& s, unsigned long ell) {
    const unsigned long e = ell - 1;
    JointSolutions out;
    out.M = std::lcm(J.M, e);
    out.sols.clear();
    for (const auto& a : J.sols)
        for (const auto& b : s) {
            if (a.delta != b.delta) continue;
            auto k = crt_pair(a.k, J.M, b.k, e);
            auto kp = crt_pair(a.kp, J.M, b.kp, e);
            if (k && kp) out.sols.push_back({*k, *kp, a.delta});
        }
    std::sort(out.sols.begin(), out.sols.end());
    return out;
}

struct GoodL {
    std::vector<unsigned long> primes;
    Int L = 1;
    unsigned long phi_L = 1;
    JointSolutions joint;
    std::vector<std::size_t> per_prime_counts;
};

struct AceConfig {
    unsigned long max_prime = 200;
    int prime_budget = 8;
    std::set<unsigned long> excluded;  // exceptional conductors
};

/// Candidate l: prime >= 5, split, coprime to `avoid`, non-degenerate, and
/// with eigenvalues mu+1, conj(mu)+1 (and mu, conj(mu)) neither equal nor opposite.
inline bool ace_candidate(const QuadInt& mu, unsigned long ell, const Int& avoid) {
    if (ell < 5 || !is_small_prime(ell)) return false;
    if (mpz_divisible_ui_p(avoid.get_mpz_t(), ell)) return false;
    const long D = mu.D;
    const unsigned long Dl = static_cast<unsigned long>(((D % static_cast<long>(ell)) + static_cast<long>(ell)) % static_cast<long>(ell));
    if (Dl == 0 || powmod_ul(Dl, (ell - 1) / 2, ell) != 1) return false;
    const auto [x, y] = embeddings(mu, ell);
    if (x == 0 || y == 0 || x + 1 == ell || y + 1 == ell) return false;
    if (x == y || (x + y) % ell == 0) return false;
    if ((x + y + 2) % ell == 0) return false;
    // Extra automorphisms scale the eigenspace abscissae by a root of unity,
    // which kills every elliptic Gauss sum of order prime to the unit group.
    if (D == -3 || D == -4)
        for (auto [q, a] : factor_small(ell - 1))
            if (q != 2 && !(D == -3 && q == 3)) return false;
    return true;
}

inline bool good_L_conditions(const GoodL& g, unsigned long t) {
    return g.phi_L % t == 0 && g.joint.sols.size() == 1 && g.joint.sols[0] == EllkSolution{1 % g.joint.M, 1 % g.joint.M, 1};
}

/// Grows L greedily, keeping l small since the Elkies work grows like l^4:
/// each step appends the candidate that leaves the least of t uncovered,
/// then the smallest l that removes a joint solution (the fewest solutions
/// when none does). Once t is covered only primes sharing a factor with
/// phi(L) qualify.
/// `avoid` collects m * n * s.
inline std::variant<GoodL, NotFound> find_good_L(const QuadInt& mu, unsigned long t, const Int& avoid,
                                                 const AceConfig& cfg = {}) {
    GoodL g;
    std::vector<unsigned long> cands;
    std::vector<std::vector<EllkSolution>> sols;
    for (unsigned long ell = 5; ell <= cfg.max_prime; ++ell) {
        if (cfg.excluded.count(ell) || !ace_candidate(mu, ell, avoid)) continue;
        auto s = solve_ellk_mod_prime(mu, ell);
        if (holds<DegenerateResidue>(s)) continue;
        cands.push_back(ell);
        sols.push_back(std::get<std::vector<EllkSolution>>(std::move(s)));
    }
    std::vector<bool> used(cands.size(), false);
    for (int step = 0; step < cfg.prime_budget; ++step) {
        if (!g.primes.empty() && good_L_conditions(g, t)) return g;
        const unsigned long missing = t / std::gcd(t, g.phi_L);
        std::optional<std::size_t> pick;
        std::tuple<unsigned long, std::size_t, unsigned long> best{};
        JointSolutions best_joint;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const unsigned long e = cands[i] - 1;
            if (used[i] || (missing == 1 && !g.primes.empty() && std::gcd(e, g.phi_L) == 1)) continue;
            JointSolutions j = combine(g.joint, sols[i], cands[i]);
            const std::size_t left = j.sols.size() < g.joint.sols.size() ? 0 : j.sols.size();
            std::tuple<unsigned long, std::size_t, unsigned long> key{missing / std::gcd(missing, e), left, cands[i]};
            if (!pick || key < best) {
                pick = i;
                best = key;
                best_joint = std::move(j);
            }
        }
        if (!pick) break;
        used[*pick] = true;
        const unsigned long ell = cands[*pick];
        g.primes.push_back(ell);
        g.L *= ell;
        g.phi_L *= ell - 1;
        g.per_prime_counts.push_back(sols[*pick].size());
        g.joint = std::move(best_joint);
    }
    if (!g.primes.empty() && good_L_conditions(g, t)) return g;
    return NotFound{"no good L within the prime budget"};
}

/// Recomputes the joint solutions for a given prime list from scratch.
inline JointSolutions joint_solutions(const QuadInt& mu, const std::vector<unsigned long>& primes) {
    JointSolutions J;
    for (unsigned long ell : primes) {
        auto s = solve_ellk_mod_prime(mu, ell);
        if (holds<DegenerateResidue>(s)) throw PreconditionError("joint_solutions: degenerate prime");
        J = combine(J, std::get<std::vector<EllkSolution>>(s), ell);
    }
    return J;
}

}  // namespace cide
