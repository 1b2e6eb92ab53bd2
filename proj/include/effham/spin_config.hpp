#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <string>

#include "effham/errors.hpp"

namespace effham {

/// A classical spin configuration of up to 128 qubits, packed two bits-per-word.
/// Bit b_i = 0 maps to z_i = +1 and b_i = 1 to z_i = -1 (sigma^z eigenvalues);
/// this convention is fixed project-wide. The configuration does not know its
/// own length; the owning problem or basis carries the qubit count.
class SpinConfig {
public:
    static constexpr int max_qubits = 128;

    constexpr SpinConfig() = default;

    /// Low 64 qubits from an integer, bit i of `v` giving qubit i.
    static constexpr SpinConfig from_bits(std::uint64_t v) {
        SpinConfig c;
        c.words_[0] = v;
        return c;
    }

    static SpinConfig from_string(const std::string& s) {
        if (s.size() > max_qubits)
            throw ContractViolation("spin string longer than " + std::to_string(max_qubits));
        SpinConfig c;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1')
                c.set(static_cast<int>(i), true);
            else if (s[i] != '0')
                throw ParseError("spin string must contain only '0'/'1', got: " + s);
        }
        return c;
    }

    constexpr bool bit(int i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    /// sigma^z eigenvalue of qubit i: +1 for bit 0, -1 for bit 1.
    constexpr int spin(int i) const { return bit(i) ? -1 : +1; }

    constexpr void set(int i, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    constexpr void flip(int i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    constexpr SpinConfig flipped(int i) const {
        SpinConfig c = *this;
        c.flip(i);
        return c;
    }

    constexpr int hamming(const SpinConfig& o) const {
        return std::popcount(words_[0] ^ o.words_[0]) + std::popcount(words_[1] ^ o.words_[1]);
    }

    constexpr SpinConfig operator|(const SpinConfig& o) const {
        SpinConfig c;
        c.words_[0] = words_[0] | o.words_[0];
        c.words_[1] = words_[1] | o.words_[1];
        return c;
    }

    constexpr bool operator==(const SpinConfig&) const = default;

    /// Lexicographic order of the bit strings, qubit 0 being the first (most
    /// significant) character. Used as the deterministic tie-break everywhere.
    static constexpr bool lex_less(const SpinConfig& a, const SpinConfig& b) {
        for (int w = 0; w < 2; ++w) {
            const std::uint64_t x = a.words_[w] ^ b.words_[w];
            if (x != 0) {
                const int i = std::countr_zero(x);
                return ((a.words_[w] >> i) & 1u) == 0;
            }
        }
        return false;
    }

    std::string str(int n) const {
        std::string s(static_cast<std::size_t>(n), '0');
        for (int i = 0; i < n; ++i)
            if (bit(i)) s[static_cast<std::size_t>(i)] = '1';
        return s;
    }

    struct Hash {
        std::size_t operator()(const SpinConfig& c) const {
            return mix(c.words_[0] + 0x9e3779b97f4a7c15ull) ^ (mix(c.words_[1]) << 1);
        }

    private:
        static std::uint64_t mix(std::uint64_t x) {
            x ^= x >> 30;
            x *= 0xbf58476d1ce4e5b9ull;
            x ^= x >> 27;
            x *= 0x94d049bb133111ebull;
            x ^= x >> 31;
            return x;
        }
    };

private:
    std::array<std::uint64_t, 2> words_{0, 0};
};

/// A spin configuration together with its qubit count.
struct SpinState {
    SpinConfig config;
    int n = 0;

    static SpinState from_string(const std::string& s) {
        return SpinState{SpinConfig::from_string(s), static_cast<int>(s.size())};
    }

    std::string str() const { return config.str(n); }
};

}  // namespace effham
