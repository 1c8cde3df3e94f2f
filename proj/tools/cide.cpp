#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cide/cide.hpp"
#include "ec_oracle.hpp"

using namespace cide;

namespace {

constexpr int kUsage = 64;

struct Options {
    std::string input;
    long disc_bound = Config{}.disc_bound;
    std::uint64_t seed = Config{}.seed;
    long budget = Config{}.budget;
    std::string out;
    bool json = false;
};

Config to_config(const Options& o) {
    Config cfg;
    cfg.disc_bound = o.disc_bound;
    cfg.seed = o.seed;
    cfg.budget = o.budget;
    return cfg;
}

Int parse_int(const std::string& s) {
    Int n;
    if (s.empty() || n.set_str(s, 10) != 0) throw CLI::ValidationError("N", "not a decimal integer: " + s);
    return n;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

int cmd_prove(const Options& o) {
    const Int n = parse_int(o.input);
    ProveReport r;
    try {
        r = prove(n, to_config(o));
    } catch (const PreconditionError& e) {
        std::cerr << "prove: " << e.what() << "\n";
        return kUsage;
    }
    std::cerr << "ops: dual " << r.ops.dual << " ace " << r.ops.ace << " cpp " << r.ops.cpp << " elliptic "
              << r.ops.elliptic << "\n";
    if (auto* c = std::get_if<Certificate>(&r.outcome)) {
        emit(o.json ? to_json(*c).dump(2) + "\n" : to_text(*c), o.out);
        std::cerr << "prime\n";
        return 0;
    }
    if (auto* c = std::get_if<Composite>(&r.outcome)) {
        std::cout << "composite: " << c->evidence << "\n";
        if (c->factor) std::cout << "factor " << *c->factor << "\n";
        if (c->mr_witness) std::cout << "miller-rabin witness " << *c->mr_witness << "\n";
        return 1;
    }
    std::cout << "inconclusive: " << std::get<Inconclusive>(r.outcome).reason << "\n";
    return 2;
}

int cmd_verify(const Options& o) {
    std::ifstream f(o.input, std::ios::binary);
    if (!f) {
        std::cerr << "verify: cannot read " << o.input << "\n";
        return kUsage;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    const auto r = verify_text(ss.str());
    if (auto* i = std::get_if<Invalid>(&r.outcome)) {
        std::cout << "invalid: " << i->clause << ": " << i->detail << "\n";
        return 1;
    }
    std::cout << "valid (ops " << r.ops << ")\n";
    return 0;
}

int cmd_search_dual(const Options& o) {
    const Int n = parse_int(o.input);
    if (n < 5 || mpz_even_p(n.get_mpz_t())) {
        std::cerr << "search-dual: n must be odd and >= 5\n";
        return kUsage;
    }
    auto d = search_dual(n, proving_orders(o.disc_bound), o.budget, o.seed);
    if (auto* nf = std::get_if<NotFound>(&d)) {
        std::cout << "not found: " << nf->reason << "\n";
        return 2;
    }
    if (auto* ff = std::get_if<FactorFound>(&d)) {
        std::cout << "factor " << ff->factor << "\n";
        return 1;
    }
    const auto& p = std::get<DualPair>(d);
    std::cout << "D = " << p.order.D << "\nn = " << p.n << "\nm = " << p.m << "\nmu = (" << p.mu.a << " + " << p.mu.b << " sqrt(" << p.order.D << "))/2"
              << "\nE_n: A = " << p.curve_n.A << " B = " << p.curve_n.B << " P = (" << p.point_n.x << ", "
              << p.point_n.y << ")\nE_m: A = " << p.curve_m.A << " B = " << p.curve_m.B << " P = (" << p.point_m.x
              << ", " << p.point_m.y << ")\n";
    return 0;
}

bool selftest_group_law() {
    for (long p : {5L, 7L, 11L, 13L})
        for (long A = 0; A < p; ++A)
            for (long B = 0; B < p; ++B) {
                oracle::SmallCurve c{p, A, B};
                if (c.singular()) continue;
                const auto E = curve_or_throw(A, B, p);
                const auto pts = oracle::points(c);
                auto add = [&](const CurvePoint& P, const CurvePoint& Q) {
                    return std::get<CurvePoint>(partial_add(P, Q, E));
                };
                for (const auto& P : pts)
                    for (const auto& Q : pts)
                        if (!(add(P, Q) == oracle::geometric_sum(c, pts, P, Q))) return false;
                for (const auto& P : pts)
                    for (const auto& Q : pts)
                        for (const auto& S : pts)
                            if (!(add(add(P, Q), S) == add(P, add(Q, S)))) return false;
            }
    return true;
}

bool selftest_division_polys() {
    for (long p = 5; p <= 31; p += 2) {
        if (!is_small_prime(p)) continue;
        for (long A = 0; A < p; ++A)
            for (long B = 0; B < p; ++B) {
                oracle::SmallCurve c{p, A, B};
                if (c.singular()) continue;
                const auto E = curve_or_throw(A, B, p);
                for (long k : {2L, 3L, 5L, 7L}) {
                    const Poly psi = division_poly(k, E);
                    std::vector<long> roots;
                    for (long x = 0; x < p; ++x)
                        if (psi(Int(x)) == 0) roots.push_back(x);
                    if (roots != oracle::torsion_abscissae(c, k)) return false;
                }
            }
    }
    return true;
}

bool selftest_end_to_end() {
    Config cfg;
    cfg.discriminants = {-3};
    auto r = prove(Int(43), cfg);
    auto* c = std::get_if<Certificate>(&r.outcome);
    return c && holds<Valid>(verify_text(to_text(*c)).outcome) && holds<Composite>(prove(Int(561)).outcome);
}

int cmd_selftest() {
    bool all = true;
    auto run = [&](const char* name, bool (*f)()) {
        const bool ok = f();
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
        all = all && ok;
    };
    run("group law vs exhaustive tables, p in {5,7,11,13}", selftest_group_law);
    run("division polynomial roots vs brute-force torsion, p <= 31", selftest_division_polys);
    run("prove and verify 43, reject 561", selftest_end_to_end);
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Primality proving by elliptic Gauss sums over a dual pair"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* s) {
        s->add_option("--disc-bound", o.disc_bound, "largest |D| searched")->check(CLI::PositiveNumber);
        s->add_option("--seed", o.seed, "seed for every randomized choice");
        s->add_option("--budget", o.budget, "tries per order in the dual search")->check(CLI::PositiveNumber);
    };
    auto* prove_cmd = app.add_subcommand("prove", "prove n prime and write a certificate");
    prove_cmd->add_option("n", o.input, "odd integer >= 5")->required();
    common(prove_cmd);
    prove_cmd->add_option("--out", o.out, "certificate path (stdout if omitted)");
    prove_cmd->add_flag("--json", o.json, "write the JSON form");
    auto* verify_cmd = app.add_subcommand("verify", "check a certificate file");
    verify_cmd->add_option("file", o.input)->required();
    auto* dual_cmd = app.add_subcommand("search-dual", "find a dual pair for n");
    dual_cmd->add_option("n", o.input)->required();
    common(dual_cmd);
    auto* self_cmd = app.add_subcommand("selftest", "run the small-field oracle checks");

    try {
        app.parse(argc, argv);
        if (prove_cmd->parsed()) return cmd_prove(o);
        if (verify_cmd->parsed()) return cmd_verify(o);
        if (dual_cmd->parsed()) return cmd_search_dual(o);
        if (self_cmd->parsed()) return cmd_selftest();
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return kUsage;
}
