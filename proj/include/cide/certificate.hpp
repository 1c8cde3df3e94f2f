#pragma once

// Certificate data, canonical text form with a SHA-256 binding line, and a
// JSON mirror.

#include <openssl/evp.h>

#include <iomanip>
#include <sstream>

#include "cide/ace.hpp"
#include "json.hpp"

namespace cide {

struct ExtRecord {
    std::string side;  // "m" or "n"
    unsigned long p = 0, K = 0;
    std::vector<Int> psi;
};

struct CharRecord {
    std::string side;
    unsigned long q = 0, order = 0, eta = 0;
    bool aux = false;
};

struct ElkiesRecord {
    std::string side;
    unsigned long ell = 0;
    std::vector<Int> F;
    unsigned long lambda = 0;
    std::vector<EtaRecord> etas;
};

struct EvRecord {
    unsigned long ell = 0, lambda_m = 0, lambda_n = 0;
};

struct Certificate {
    int version = 1;
    DualPair pair;
    unsigned long s = 1, t = 1, s_prime = 1;
    Int L = 1, S = 1;
    std::vector<unsigned long> L_primes, excluded;
    unsigned long phi_L = 1, M = 1;
    std::vector<EllkSolution> joint;
    std::vector<ExtRecord> exts;
    std::vector<CharRecord> chars;
    std::vector<ElkiesRecord> elkies;
    std::vector<EvRecord> ev;
    std::string verdict = "prime";
};

/// Ordered sections of key = value lines.
struct Document {
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> fields;
        const std::string* get(const std::string& k) const {
            for (const auto& [a, b] : fields)
                if (a == k) return &b;
            return nullptr;
        }
    };
    std::vector<Section> sections;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
std::string join(const std::vector<T>& v, const char* sep = ",") {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
    return os.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline Int parse_int(const std::string& s) {
    if (s.empty()) throw ParseError("empty integer");
    Int v;
    if (v.set_str(s, 10) != 0) throw ParseError("bad integer: " + s);
    return v;
}

inline unsigned long parse_ul(const std::string& s) {
    const Int v = parse_int(s);
    if (v < 0 || !v.fits_ulong_p()) throw ParseError("integer out of range: " + s);
    return v.get_ui();
}

inline std::vector<Int> parse_ints(const std::string& s) {
    std::vector<Int> out;
    for (const auto& x : split(s, ',')) out.push_back(parse_int(x));
    return out;
}

inline std::vector<unsigned long> parse_uls(const std::string& s) {
    std::vector<unsigned long> out;
    for (const auto& x : split(s, ',')) out.push_back(parse_ul(x));
    return out;
}

inline std::string etas_str(const std::vector<EtaRecord>& v) {
    std::vector<std::string> parts;
    for (const auto& e : v) parts.push_back(std::to_string(e.q) + ":" + std::to_string(e.order) + ":" + std::to_string(e.eta));
    return join(parts, ";");
}

inline std::vector<EtaRecord> parse_etas(const std::string& s) {
    std::vector<EtaRecord> out;
    for (const auto& x : split(s, ';')) {
        auto f = split(x, ':');
        if (f.size() != 3) throw ParseError("bad eta record: " + x);
        out.push_back({parse_ul(f[0]), parse_ul(f[1]), parse_ul(f[2])});
    }
    return out;
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

}  // namespace detail

inline Document to_document(const Certificate& c) {
    using detail::join;
    Document d;
    auto sec = [&](std::string name) -> Document::Section& {
        d.sections.push_back({std::move(name), {}});
        return d.sections.back();
    };
    auto& h = sec("certificate");
    h.fields = {{"version", std::to_string(c.version)}};
    const DualPair& p = c.pair;
    auto& pr = sec("pair");
    pr.fields = {{"n", to_dec(p.n)},
                 {"m", to_dec(p.m)},
                 {"D", std::to_string(p.order.D)},
                 {"mu", to_dec(p.mu.a) + "," + to_dec(p.mu.b)},
                 {"epsilon", std::to_string(p.epsilon)},
                 {"curve_m", to_dec(p.curve_m.A) + "," + to_dec(p.curve_m.B)},
                 {"point_m", to_dec(p.point_m.x) + "," + to_dec(p.point_m.y)},
                 {"j_m", to_dec(p.j_m)},
                 {"curve_n", to_dec(p.curve_n.A) + "," + to_dec(p.curve_n.B)},
                 {"point_n", to_dec(p.point_n.x) + "," + to_dec(p.point_n.y)},
                 {"j_n", to_dec(p.j_n)}};
    auto& pa = sec("params");
    pa.fields = {{"s", std::to_string(c.s)},         {"t", std::to_string(c.t)}, {"s_prime", std::to_string(c.s_prime)},
                 {"L", to_dec(c.L)},                 {"S", to_dec(c.S)}};
    auto& ace = sec("ace");
    std::vector<std::string> sols;
    for (const auto& s : c.joint) sols.push_back(std::to_string(s.k) + ":" + std::to_string(s.kp) + ":" + std::to_string(s.delta));
    ace.fields = {{"primes", join(c.L_primes)},      {"excluded", join(c.excluded)},
                  {"phi_L", std::to_string(c.phi_L)}, {"M", std::to_string(c.M)},
                  {"solutions", join(sols, ";")}};
    for (const auto& e : c.exts) {
        auto& s = sec("ext " + std::to_string(powul(e.p, static_cast<unsigned>(e.K))) + " " + e.side);
        s.fields = {{"p", std::to_string(e.p)}, {"K", std::to_string(e.K)}, {"psi", join(e.psi)}};
    }
    for (const std::string side : {"m", "n"}) {
        std::vector<std::string> main, aux;
        for (const auto& ch : c.chars)
            if (ch.side == side)
                (ch.aux ? aux : main).push_back(std::to_string(ch.q) + ":" + std::to_string(ch.order) + ":" + std::to_string(ch.eta));
        auto& s = sec("cpp " + side);
        s.fields = {{"chars", join(main, ";")}, {"aux", join(aux, ";")}};
    }
    for (const auto& e : c.elkies) {
        auto& s = sec("elkies " + e.side + " " + std::to_string(e.ell));
        s.fields = {{"F", join(e.F)}, {"lambda", std::to_string(e.lambda)}, {"etas", detail::etas_str(e.etas)}};
    }
    for (const auto& e : c.ev) {
        auto& s = sec("ev " + std::to_string(e.ell));
        s.fields = {{"lambda_m", std::to_string(e.lambda_m)}, {"lambda_n", std::to_string(e.lambda_n)}};
    }
    auto& v = sec("verdict");
    v.fields = {{"result", c.verdict}};
    return d;
}

inline std::string render_body(const Document& d) {
    std::ostringstream os;
    for (const auto& s : d.sections) {
        os << "[" << s.name << "]\n";
        for (const auto& [k, v] : s.fields) os << k << " = " << v << "\n";
    }
    return os.str();
}

/// Canonical text; the last line binds everything above it.
inline std::string to_text(const Certificate& c) {
    const std::string body = render_body(to_document(c));
    return body + "hash = " + detail::sha256_hex(body) + "\n";
}

inline nlohmann::ordered_json to_json(const Certificate& c) {
    const Document d = to_document(c);
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& s : d.sections) {
        nlohmann::ordered_json f = nlohmann::ordered_json::object();
        for (const auto& [k, v] : s.fields) f[k] = v;
        j.push_back({{"section", s.name}, {"fields", f}});
    }
    return {{"certificate", j}, {"hash", detail::sha256_hex(render_body(d))}};
}

/// Parses canonical text; the hash line must match the body.
inline Document parse_document(const std::string& text) {
    Document d;
    std::istringstream is(text);
    std::string line, body;
    bool hashed = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (hashed) throw ParseError("content after hash line");
        if (line.rfind("hash = ", 0) == 0) {
            if (detail::sha256_hex(body) != line.substr(7)) throw ParseError("hash mismatch");
            hashed = true;
            continue;
        }
        body += line + "\n";
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("bad section header: " + line);
            d.sections.push_back({line.substr(1, line.size() - 2), {}});
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos || d.sections.empty()) throw ParseError("bad line: " + line);
        d.sections.back().fields.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    if (!hashed) throw ParseError("missing hash line");
    return d;
}

inline Document parse_json_document(const std::string& text) {
    const auto j = nlohmann::ordered_json::parse(text);
    Document d;
    for (const auto& s : j.at("certificate")) {
        Document::Section sec{s.at("section").get<std::string>(), {}};
        for (const auto& [k, v] : s.at("fields").items()) sec.fields.emplace_back(k, v.get<std::string>());
        d.sections.push_back(std::move(sec));
    }
    if (detail::sha256_hex(render_body(d)) != j.at("hash").get<std::string>()) throw ParseError("hash mismatch");
    return d;
}

inline Certificate from_document(const Document& d) {
    using namespace detail;
    Certificate c;
    auto need = [](const Document::Section& s, const std::string& k) -> const std::string& {
        if (auto* v = s.get(k)) return *v;
        throw ParseError("missing field " + k + " in [" + s.name + "]");
    };
    auto pair2 = [](const std::string& v) {
        auto x = parse_ints(v);
        if (x.size() != 2) throw ParseError("expected two integers: " + v);
        return x;
    };
    bool have_pair = false, have_params = false, have_ace = false;
    for (const auto& s : d.sections) {
        auto words = split(s.name, ' ');
        const std::string& kind = words.at(0);
        if (kind == "certificate") {
            c.version = static_cast<int>(parse_ul(need(s, "version")));
        } else if (kind == "pair") {
            DualPair& p = c.pair;
            p.n = parse_int(need(s, "n"));
            p.m = parse_int(need(s, "m"));
            const long D = std::stol(need(s, "D"));
            if (!is_fundamental_discriminant(D)) throw ParseError("bad discriminant");
            p.order = make_order(D);
            auto mu = pair2(need(s, "mu"));
            p.mu = {mu[0], mu[1], D};
            p.epsilon = std::stoi(need(s, "epsilon"));
            if (p.m < 5 || p.n < 5) throw ParseError("pair too small");
            auto cm = pair2(need(s, "curve_m"));
            auto cn = pair2(need(s, "curve_n"));
            auto em = make_curve(cm[0], cm[1], p.m);
            auto en = make_curve(cn[0], cn[1], p.n);
            if (!holds<CurveParams>(em) || !holds<CurveParams>(en)) throw ParseError("curve modulus has a factor");
            p.curve_m = std::get<CurveParams>(em);
            p.curve_n = std::get<CurveParams>(en);
            auto pm = pair2(need(s, "point_m"));
            auto pn = pair2(need(s, "point_n"));
            p.point_m = CurvePoint::affine(pm[0], pm[1]);
            p.point_n = CurvePoint::affine(pn[0], pn[1]);
            p.j_m = parse_int(need(s, "j_m"));
            p.j_n = parse_int(need(s, "j_n"));
            have_pair = true;
        } else if (kind == "params") {
            c.s = parse_ul(need(s, "s"));
            c.t = parse_ul(need(s, "t"));
            c.s_prime = parse_ul(need(s, "s_prime"));
            c.L = parse_int(need(s, "L"));
            c.S = parse_int(need(s, "S"));
            have_params = true;
        } else if (kind == "ace") {
            c.L_primes = parse_uls(need(s, "primes"));
            c.excluded = parse_uls(need(s, "excluded"));
            c.phi_L = parse_ul(need(s, "phi_L"));
            c.M = parse_ul(need(s, "M"));
            for (const auto& x : split(need(s, "solutions"), ';')) {
                auto f = split(x, ':');
                if (f.size() != 3) throw ParseError("bad solution: " + x);
                c.joint.push_back({parse_ul(f[0]), parse_ul(f[1]), std::stoi(f[2])});
            }
            have_ace = true;
        } else if (kind == "ext" && words.size() == 3) {
            c.exts.push_back({words[2], parse_ul(need(s, "p")), parse_ul(need(s, "K")), parse_ints(need(s, "psi"))});
        } else if (kind == "cpp" && words.size() == 2) {
            for (const auto* key : {"chars", "aux"})
                for (const auto& e : parse_etas(need(s, key))) c.chars.push_back({words[1], e.q, e.order, e.eta, std::string(key) == "aux"});
        } else if (kind == "elkies" && words.size() == 3) {
            c.elkies.push_back({words[1], parse_ul(words[2]), parse_ints(need(s, "F")), parse_ul(need(s, "lambda")),
                                parse_etas(need(s, "etas"))});
        } else if (kind == "ev" && words.size() == 2) {
            c.ev.push_back({parse_ul(words[1]), parse_ul(need(s, "lambda_m")), parse_ul(need(s, "lambda_n"))});
        } else if (kind == "verdict") {
            c.verdict = need(s, "result");
        } else {
            throw ParseError("unknown section [" + s.name + "]");
        }
    }
    if (!have_pair || !have_params || !have_ace) throw ParseError("missing required section");
    return c;
}

inline Certificate parse_certificate(const std::string& text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return from_document(parse_json_document(text));
    return from_document(parse_document(text));
}

}  // namespace cide
