#pragma once

// Dense polynomials over Z_p and the interpolation construction of the
// general square-root polynomial: the unique f of degree <= p-1 through
// (0,0), (y, chosen root) for every residue y, and (y, 0) for every
// nonresidue. Dense representations are only intended for small p; the
// interpolation guard enforces that.

#include <algorithm>
#include <set>
#include <vector>

#include "qcroots/oracle.hpp"

namespace qcroots {

inline constexpr std::uint64_t kInterpolationMaxP = 4096;
inline constexpr std::uint64_t kCountEnumerationMaxP = 13;

/// coeffs[i] is the coefficient of y^i. Normalized: the highest stored
/// coefficient is nonzero; the zero polynomial has no coefficients.
struct DensePolynomial {
    OddPrime modulus;
    std::vector<Nat> coeffs;

    static DensePolynomial from_coeffs(const OddPrime& p, std::vector<Nat> cs) {
        for (auto& c : cs) c %= p.value();
        while (!cs.empty() && cs.back() == 0) cs.pop_back();
        return {p, std::move(cs)};
    }

    bool is_zero() const { return coeffs.empty(); }
    /// -1 for the zero polynomial.
    std::ptrdiff_t degree() const { return static_cast<std::ptrdiff_t>(coeffs.size()) - 1; }

    bool operator==(const DensePolynomial& o) const {
        return modulus == o.modulus && coeffs == o.coeffs;
    }
};

/// Horner evaluation.
inline FpElement poly_eval(const DensePolynomial& f, const FpElement& y) {
    if (y.modulus() != f.modulus.value()) {
        throw std::invalid_argument("poly_eval: y is not an element of Z_" + f.modulus.value().str());
    }
    detail::ModBig ctx{f.modulus.value()};
    Nat acc = 0;
    for (auto it = f.coeffs.rbegin(); it != f.coeffs.rend(); ++it) {
        acc = ctx.add(ctx.mul(acc, y.value()), *it);
    }
    return FpElement::from_reduced(std::move(acc), f.modulus.value());
}

/// Schoolbook product.
inline DensePolynomial poly_mul(const DensePolynomial& f, const DensePolynomial& g) {
    if (f.modulus != g.modulus) throw std::invalid_argument("poly_mul: mismatched moduli");
    if (f.is_zero() || g.is_zero()) return {f.modulus, {}};
    const Nat& p = f.modulus.value();
    std::vector<Nat> out(f.coeffs.size() + g.coeffs.size() - 1, Nat(0));
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        if (f.coeffs[i] == 0) continue;
        for (std::size_t j = 0; j < g.coeffs.size(); ++j) {
            out[i + j] = (out[i + j] + f.coeffs[i] * g.coeffs[j]) % p;
        }
    }
    return DensePolynomial::from_coeffs(f.modulus, std::move(out));
}

/// Expands a factored closed-form formula into dense coefficients. No
/// reduction mod y^p - y is applied, so the degree can exceed p-1 (the
/// 9mod16 variant with the larger outer exponent does); as a function on
/// Z_p the expansion agrees with eval_formula everywhere.
inline DensePolynomial poly_from_formula(const ClosedFormFormula& f) {
    const OddPrime& p = f.prime;
    auto mono = [&](const Nat& k, const Nat& e) {
        std::vector<Nat> cs(e.convert_to<std::size_t>() + 1, Nat(0));
        cs.back() = k;
        return DensePolynomial::from_coeffs(p, std::move(cs));
    };
    auto sparse = [&](std::initializer_list<std::pair<Nat, Nat>> terms) {
        std::size_t n = 0;
        for (const auto& [k, e] : terms) n = std::max(n, e.convert_to<std::size_t>() + 1);
        std::vector<Nat> cs(n, Nat(0));
        for (const auto& [k, e] : terms) cs[e.convert_to<std::size_t>()] = k % p.value();
        return DensePolynomial::from_coeffs(p, std::move(cs));
    };
    DensePolynomial out = mono(f.coeff, f.outer_exp);
    if (f.variant == FormulaVariant::naive) return out;
    out = poly_mul(out, sparse({{1, 0}, {1, f.annihilator_exp}}));
    if (f.variant == FormulaVariant::c5mod8) {
        out = poly_mul(out, sparse({{*f.a, 0}, {1, f.quarter_exp}}));
    } else if (f.variant != FormulaVariant::c3mod4) {
        out = poly_mul(out, sparse({{*f.a, 0}, {1, f.eighth_exp}}));
        out = poly_mul(out, sparse({{*f.b_inner, 0}, {*f.c, f.eighth_exp}, {1, f.quarter_exp}}));
    }
    return out;
}

namespace detail {

/// Interpolation through the full grid {0, ..., p-1}. The grid product is
/// prod_m (x - m) = x^p - x over Z_p, whose derivative at every grid point
/// is -1, so the Lagrange basis at j is -(x^p - x)/(x - j) and each basis
/// numerator comes from one synthetic division.
inline DensePolynomial interpolate_full_grid(const OddPrime& p,
                                             const std::vector<std::pair<std::uint64_t, std::uint64_t>>& nonzero_points) {
    const std::uint64_t pv = p.as_u64();
    Mod64 f{pv};
    std::vector<std::uint64_t> acc(pv, 0), q(pv, 0);
    for (const auto& [j, v] : nonzero_points) {
        q[pv - 1] = 1;
        for (std::uint64_t i = pv - 1; i-- > 0;) {
            q[i] = f.mul(j, q[i + 1]);
            if (i == 0) q[i] = f.add(q[i], pv - 1);  // the -x term of x^p - x
        }
        std::uint64_t w = pv - v;  // -(v) from the basis sign
        for (std::uint64_t i = 0; i < pv; ++i) acc[i] = f.add(acc[i], f.mul(w, q[i]));
    }
    std::vector<Nat> cs(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) cs[i] = Nat(acc[i]);
    return DensePolynomial::from_coeffs(p, std::move(cs));
}

inline std::vector<std::uint64_t> residues_ascending(std::uint64_t pv) {
    auto root_of = sqrt_table(pv);
    std::vector<std::uint64_t> rs;
    for (std::uint64_t y = 1; y < pv; ++y) {
        if (root_of[y] >= 0) rs.push_back(y);
    }
    return rs;
}

}  // namespace detail

/// Interpolates the square-root polynomial with an explicit sign choice:
/// negate_root[k] selects the larger root p - min(r, p-r) for the k-th
/// smallest residue. Throws on a malformed mask.
inline DensePolynomial interpolate_sqrt(const OddPrime& p, const std::vector<bool>& negate_root) {
    if (p.value() > kInterpolationMaxP) {
        throw budget_error("interpolate_sqrt: p=" + p.value().str() + " exceeds the dense bound " +
                           std::to_string(kInterpolationMaxP));
    }
    const std::uint64_t pv = p.as_u64();
    auto residues = detail::residues_ascending(pv);
    if (negate_root.size() != residues.size()) {
        throw std::invalid_argument("interpolate_sqrt: sign mask has " + std::to_string(negate_root.size()) +
                                    " entries, expected one per residue (" + std::to_string(residues.size()) + ")");
    }
    auto root_of = detail::sqrt_table(pv);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pts;
    pts.reserve(residues.size());
    for (std::size_t k = 0; k < residues.size(); ++k) {
        std::uint64_t y = residues[k];
        std::uint64_t lo = static_cast<std::uint64_t>(root_of[y]);
        pts.emplace_back(y, negate_root[k] ? pv - lo : lo);
    }
    return detail::interpolate_full_grid(p, pts);
}

/// Canonical interpolation: the smaller root min(r, p-r) at every residue.
inline DensePolynomial interpolate_sqrt(const OddPrime& p) {
    std::vector<bool> canonical(detail::residues_ascending(p.as_u64()).size(), false);
    return interpolate_sqrt(p, canonical);
}

/// Exhaustive audit of a dense polynomial against the square-root contract.
inline VerificationReport verify_poly(const DensePolynomial& f,
                                      std::uint64_t scan_budget = kScanBudgetDefault) {
    if (!f.modulus.fits_u64() || f.modulus.value() >= scan_budget) {
        throw budget_error("verify_poly: p=" + f.modulus.value().str() + " exceeds scan budget " +
                           std::to_string(scan_budget));
    }
    detail::Mod64 ctx{f.modulus.as_u64()};
    std::vector<std::uint64_t> cs(f.coeffs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = ctx.reduce(f.coeffs[i]);
    std::string subject = "polynomial of degree " + std::to_string(f.degree());
    return detail::verify_pointwise_u64(
        f.modulus,
        [&](std::uint64_t y) {
            std::uint64_t acc = 0;
            for (auto it = cs.rbegin(); it != cs.rend(); ++it) acc = ctx.add(ctx.mul(acc, y), *it);
            return acc;
        },
        std::move(subject), scan_budget);
}

/// Interpolates every one of the 2^((p-1)/2) sign assignments and counts
/// distinct coefficient vectors. Enumeration is only feasible for tiny p;
/// enforced at p <= 13.
inline std::uint64_t count_distinct_sqrt_polys(const OddPrime& p) {
    if (p.value() > kCountEnumerationMaxP) {
        throw budget_error("count_distinct_sqrt_polys: p=" + p.value().str() +
                           " exceeds the enumeration bound " + std::to_string(kCountEnumerationMaxP));
    }
    std::size_t m = detail::residues_ascending(p.as_u64()).size();
    std::set<std::vector<Nat>> seen;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<bool> negate(m);
        for (std::size_t k = 0; k < m; ++k) negate[k] = (mask >> k) & 1;
        seen.insert(interpolate_sqrt(p, negate).coeffs);
    }
    return seen.size();
}

}  // namespace qcroots
