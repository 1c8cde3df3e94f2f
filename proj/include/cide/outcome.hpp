#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include <gmpxx.h>

namespace cide {

using Int = mpz_class;

/// A nontrivial divisor of the modulus, surfaced by a failed inversion.
struct FactorFound {
    Int factor;
};

/// Deterministic evidence that the modulus is composite, without a factor.
struct CompositeWitness {
    std::string reason;
};

/// Contract violation by the caller (bad arguments, broken preconditions).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <class T, class V>
constexpr bool holds(const V& v) noexcept {
    return std::holds_alternative<T>(v);
}

/// Per-thread count of modular multiplications. Used to compare the cost of
/// proving against verifying; not a timer.
inline std::uint64_t& op_counter() {
    thread_local std::uint64_t count = 0;
    return count;
}

inline void count_ops(std::uint64_t k) { op_counter() += k; }

/// Counter-based 64-bit mixer (SplitMix64 finalizer). Stateless so that the
/// i-th draw for a given seed is reproducible in isolation.
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Sequential wrapper around mix64.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next() { return mix64(seed_, counter_++); }

    /// Uniform-ish integer in [0, bound). bound > 0.
    Int below(const Int& bound) {
        Int acc = 0;
        const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2) + 64;
        for (std::size_t got = 0; got < bits; got += 64) {
            acc <<= 64;
            const std::uint64_t w = next();
            acc += Int(static_cast<unsigned long>(w >> 32)) * Int(4294967296UL) +
                   Int(static_cast<unsigned long>(w & 0xFFFFFFFFULL));
        }
        return acc % bound;
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

inline std::string to_dec(const Int& x) { return x.get_str(10); }

}  // namespace cide
