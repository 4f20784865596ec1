#pragma once

// Exact modular arithmetic over Z_p for an odd prime p: canonical
// representatives in [0, p), square-and-multiply exponentiation, Fermat
// inverses, Euler-criterion classification, and residue-class tagging of
// primes (3 mod 4 / 5 mod 8 / 9 mod 16 / 1 mod 16).
//
// Public entry points take and return arbitrary-precision values; the
// generic algorithms are templated over a modular context so the same code
// runs on native 64-bit words (p < 2^63) and on cpp_int.

#include <boost/multiprecision/cpp_int.hpp>

#include <bit>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qcroots {

using Nat = boost::multiprecision::cpp_int;

/// Thrown when an operation would exceed a configured work budget.
struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PrimeClass { c3mod4, c5mod8, c9mod16, c1mod16 };

inline const char* to_string(PrimeClass c) {
    switch (c) {
        case PrimeClass::c3mod4: return "3mod4";
        case PrimeClass::c5mod8: return "5mod8";
        case PrimeClass::c9mod16: return "9mod16";
        case PrimeClass::c1mod16: return "1mod16";
    }
    return "?";
}

/// Multiplication/squaring tally of a fixed evaluation schedule.
struct OpCount {
    std::uint64_t multiplications = 0;
    std::uint64_t squarings = 0;
    bool operator==(const OpCount&) const = default;
};

namespace detail {

inline unsigned bit_length(std::uint64_t v) { return static_cast<unsigned>(std::bit_width(v)); }
inline unsigned bit_length(const Nat& v) {
    return v == 0 ? 0u : static_cast<unsigned>(boost::multiprecision::msb(v)) + 1u;
}
inline bool bit_at(std::uint64_t v, unsigned i) { return (v >> i) & 1u; }
inline bool bit_at(const Nat& v, unsigned i) { return boost::multiprecision::bit_test(v, i); }

/// Modular context on native words; valid for p < 2^63.
struct Mod64 {
    std::uint64_t p;
    using uint = std::uint64_t;
    uint zero() const { return 0; }
    uint one() const { return 1 % p; }
    uint add(uint a, uint b) const {
        uint s = a + b;
        return s >= p ? s - p : s;
    }
    uint sub(uint a, uint b) const { return a >= b ? a - b : a + p - b; }
    uint mul(uint a, uint b) const {
        return static_cast<uint>(static_cast<unsigned __int128>(a) * b % p);
    }
    uint reduce(const Nat& v) const { return (v % p).convert_to<std::uint64_t>(); }
    Nat lift(uint v) const { return Nat(v); }
};

/// Modular context on cpp_int; valid for any odd modulus.
struct ModBig {
    Nat p;
    using uint = Nat;
    uint zero() const { return 0; }
    uint one() const { return 1; }
    uint add(const uint& a, const uint& b) const {
        Nat s = a + b;
        if (s >= p) s -= p;
        return s;
    }
    uint sub(const uint& a, const uint& b) const { return a >= b ? Nat(a - b) : Nat(a + p - b); }
    uint mul(const uint& a, const uint& b) const { return a * b % p; }
    uint reduce(const Nat& v) const { return v % p; }
    const Nat& lift(const uint& v) const { return v; }
};

inline bool fits_mod64(const Nat& p) { return p < (Nat(1) << 63); }

/// Arithmetic wrapper that optionally tallies multiplications/squarings.
/// pow() is left-to-right square-and-multiply, so its cost is exactly
/// (bit_length(e) - 1) squarings + (popcount(e) - 1) multiplications.
template <class Ctx>
struct Ops {
    const Ctx& f;
    OpCount* tally = nullptr;
    using uint = typename Ctx::uint;

    uint mul(const uint& a, const uint& b) {
        if (tally) ++tally->multiplications;
        return f.mul(a, b);
    }
    uint sqr(const uint& a) {
        if (tally) ++tally->squarings;
        return f.mul(a, a);
    }
    uint add(const uint& a, const uint& b) { return f.add(a, b); }

    template <class E>
    uint pow(const uint& base, const E& e) {
        if (e == 0) return f.one();
        uint acc = base;
        for (int i = static_cast<int>(bit_length(e)) - 2; i >= 0; --i) {
            acc = sqr(acc);
            if (bit_at(e, static_cast<unsigned>(i))) acc = mul(acc, base);
        }
        return acc;
    }
};

template <class Ctx, class E>
typename Ctx::uint pow_mod(const Ctx& f, const typename Ctx::uint& base, const E& e) {
    Ops<Ctx> ops{f};
    return ops.pow(base, e);
}

inline bool miller_rabin_witness_u64(std::uint64_t n, std::uint64_t d, unsigned s, std::uint64_t a) {
    Mod64 f{n};
    std::uint64_t x = pow_mod(f, a % n, d);
    if (x == 1 || x == n - 1) return false;
    for (unsigned i = 1; i < s; ++i) {
        x = f.mul(x, x);
        if (x == n - 1) return false;
    }
    return true;  // a witnesses compositeness
}

/// Deterministic Miller-Rabin for 64-bit inputs. The witness set
/// {2,...,37} decides primality for all n < 3.3 * 10^24.
inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == q) return true;
        if (n % q == 0) return false;
    }
    std::uint64_t d = n - 1;
    unsigned s = static_cast<unsigned>(std::countr_zero(d));
    d >>= s;
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (miller_rabin_witness_u64(n, d, s, a)) return false;
    }
    return true;
}

/// Probabilistic Miller-Rabin for n >= 2^64, with a fixed base stream for
/// run-to-run reproducibility.
inline bool is_probable_prime_big(const Nat& n, unsigned rounds = 40) {
    if (n % 2 == 0) return false;
    Nat d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    ModBig f{n};
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    unsigned words = bit_length(n) / 64 + 2;
    for (unsigned round = 0; round < rounds; ++round) {
        Nat a = 0;
        for (unsigned w = 0; w < words; ++w) a = (a << 64) | Nat(rng());
        a = a % (n - 3) + 2;
        Nat x = pow_mod(f, a, d);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned i = 1; i < s; ++i) {
            x = f.mul(x, x);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

}  // namespace detail

/// Primality check: deterministic below 2^64, 40-round Miller-Rabin above.
inline bool is_prime(const Nat& n) {
    if (n <= std::numeric_limits<std::uint64_t>::max()) {
        return detail::is_prime_u64(n.convert_to<std::uint64_t>());
    }
    return detail::is_probable_prime_big(n);
}

class FpElement;

/// A validated odd prime together with its residue-class tag. Exactly one
/// of the four classes holds for every odd prime.
class OddPrime {
  public:
    /// Validates and classifies. Throws std::invalid_argument naming the
    /// failed check (p < 3, even, composite).
    static OddPrime from(const Nat& p);

    const Nat& value() const { return p_; }
    PrimeClass cls() const { return cls_; }
    bool fits_u64() const { return p_ <= std::numeric_limits<std::uint64_t>::max(); }
    std::uint64_t as_u64() const { return p_.convert_to<std::uint64_t>(); }

    /// The canonical element v mod p.
    FpElement element(const Nat& v) const;

    bool operator==(const OddPrime& o) const { return p_ == o.p_; }
    bool operator!=(const OddPrime& o) const { return p_ != o.p_; }

  private:
    OddPrime(Nat p, PrimeClass c) : p_(std::move(p)), cls_(c) {}
    Nat p_;
    PrimeClass cls_;
};

/// Canonical representative in [0, p) of an element of Z_p.
class FpElement {
  public:
    FpElement(const Nat& v, const OddPrime& modulus) : v_(v % modulus.value()), p_(modulus.value()) {}

    /// Wraps an already-reduced value; v must lie in [0, p) for a valid
    /// odd prime p. Used on internal paths that have validated p once.
    static FpElement from_reduced(Nat v, Nat p) { return FpElement(std::move(v), std::move(p), 0); }

    const Nat& value() const { return v_; }
    const Nat& modulus() const { return p_; }
    bool is_zero() const { return v_ == 0; }

    bool operator==(const FpElement& o) const { return v_ == o.v_ && p_ == o.p_; }
    bool operator!=(const FpElement& o) const { return !(*this == o); }

  private:
    FpElement(Nat v, Nat p, int) : v_(std::move(v)), p_(std::move(p)) {}
    Nat v_;
    Nat p_;
};

inline FpElement OddPrime::element(const Nat& v) const { return FpElement(v, *this); }

enum class ResidueKind { zero, residue, non_residue };

inline const char* to_string(ResidueKind k) {
    switch (k) {
        case ResidueKind::zero: return "zero";
        case ResidueKind::residue: return "residue";
        case ResidueKind::non_residue: return "nonresidue";
    }
    return "?";
}

/// Residue-class classification of an odd prime, following the neighbor
/// cascade: p = 3 mod 4, else (p-1)/4 odd => 5 mod 8, else (p-1)/8 odd
/// => 9 mod 16, else 1 mod 16.
inline OddPrime classify_prime(const Nat& p) { return OddPrime::from(p); }

inline OddPrime OddPrime::from(const Nat& p) {
    if (p < 3) throw std::invalid_argument("p must be an odd prime >= 3 (got " + p.str() + ")");
    if (p % 2 == 0) throw std::invalid_argument("p must be odd (got " + p.str() + ")");
    if (!is_prime(p)) throw std::invalid_argument("p must be prime (" + p.str() + " is composite)");
    PrimeClass cls;
    if (p % 4 == 3) {
        cls = PrimeClass::c3mod4;
    } else if ((p - 1) / 4 % 2 == 1) {
        cls = PrimeClass::c5mod8;
    } else if ((p - 1) / 8 % 2 == 1) {
        cls = PrimeClass::c9mod16;
    } else {
        cls = PrimeClass::c1mod16;
    }
    return OddPrime(p, cls);
}

/// base^exponent mod p by square-and-multiply. 0^0 = 1 by convention.
inline FpElement mod_pow(const FpElement& base, const Nat& exponent) {
    if (detail::fits_mod64(base.modulus())) {
        detail::Mod64 f{base.modulus().convert_to<std::uint64_t>()};
        std::uint64_t r = detail::pow_mod(f, f.reduce(base.value()), exponent);
        return FpElement::from_reduced(Nat(r), base.modulus());
    }
    detail::ModBig f{base.modulus()};
    return FpElement::from_reduced(detail::pow_mod(f, base.value(), exponent), base.modulus());
}

/// Fermat inverse a^(p-2) mod p. Throws std::domain_error for a = 0.
inline FpElement mod_inv(const FpElement& a) {
    if (a.is_zero()) throw std::domain_error("modular inverse of zero");
    return mod_pow(a, a.modulus() - 2);
}

/// Euler's criterion: y^((p-1)/2) is 1 for residues and -1 for nonresidues.
inline ResidueKind euler_kind(const FpElement& y) {
    if (y.is_zero()) return ResidueKind::zero;
    Nat e = mod_pow(y, (y.modulus() - 1) / 2).value();
    if (e == 1) return ResidueKind::residue;
    if (e == y.modulus() - 1) return ResidueKind::non_residue;
    throw std::logic_error("euler criterion produced a non-unit value; modulus is not prime");
}

namespace detail {

template <class Ctx>
ResidueKind euler_kind_ctx(const Ctx& f, const typename Ctx::uint& y) {
    if (y == 0) return ResidueKind::zero;
    auto e = pow_mod(f, y, (f.p - 1) / 2);
    return e == 1 ? ResidueKind::residue : ResidueKind::non_residue;
}

}  // namespace detail

/// Odd primes <= n in ascending order (simple sieve).
inline std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    if (n < 3) return out;
    std::vector<bool> composite(n + 1, false);
    for (std::uint64_t i = 3; i <= n; i += 2) {
        if (!composite[i]) {
            out.push_back(i);
            for (std::uint64_t j = i * i; j <= n; j += 2 * i) composite[j] = true;
        }
    }
    return out;
}

}  // namespace qcroots
