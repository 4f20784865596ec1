#pragma once

// Residue-class dispatch: pick the closed-form formula matching p's class,
// evaluate it, and fall back to Tonelli-Shanks when no (derivable) closed
// form exists. The 1 mod 16 class has no closed form at all; 9 mod 16
// primes beyond the derivation search budget fall back as well. Fallback
// outcomes are flagged so callers can tell the difference.

#include "qcroots/derivation.hpp"

namespace qcroots {

struct SolveOptions {
    SearchBudget search{};
};

inline SolveOutcome solve(const OddPrime& p, const FpElement& y, const SolveOptions& opts = {}) {
    if (y.modulus() != p.value()) {
        throw std::invalid_argument("solve: y is not an element of Z_" + p.value().str());
    }
    if (y.is_zero()) return detail::outcome_from_raw(p.value(), 0, 0, SolveMethod::closed_form);

    std::optional<ClosedFormFormula> formula;
    switch (p.cls()) {
        case PrimeClass::c3mod4:
            formula = derive_3mod4(p);
            break;
        case PrimeClass::c5mod8: {
            DerivationResult d = derive_5mod8(p);
            formula = canonical_formula(d);
            break;
        }
        case PrimeClass::c9mod16:
            if (p.value() <= opts.search.tier1_max_p || p.value() <= opts.search.tier2_max_p) {
                formula = canonical_formula(derive_9mod16(p, opts.search));
            }
            break;
        case PrimeClass::c1mod16:
            break;  // no closed form exists for this class
    }

    if (formula) {
        Nat raw = eval_formula(*formula, y).value();
        return detail::outcome_from_raw(p.value(), y.value(), std::move(raw), SolveMethod::closed_form,
                                        std::move(formula));
    }
    SolveOutcome out = tonelli_shanks(p, y);
    out.fallback = true;
    return out;
}

/// Convenience overload: validates and classifies p, reduces y.
inline SolveOutcome solve(const Nat& p, const Nat& y, const SolveOptions& opts = {}) {
    OddPrime prime = classify_prime(p);
    return solve(prime, prime.element(y), opts);
}

}  // namespace qcroots
