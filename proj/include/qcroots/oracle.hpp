#pragma once

// Ground truth for everything else in the library: brute-force root
// scanning, a standard Tonelli-Shanks solver, and the exhaustive
// point-by-point verification engine that audits formulas and polynomials
// against the brute-force answer. Mismatches are data, not failures: the
// harness exists to audit published constant tables as much as our own
// derivations.

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qcroots/closed_form.hpp"
#include "qcroots/core_arith.hpp"

namespace qcroots {

inline constexpr std::uint64_t kScanBudgetDefault = 1'000'000;
inline constexpr std::uint64_t kExhaustiveRangeDefault = 10'000;

namespace detail {

/// Tonelli-Shanks over a modular context. Returns a root of y, or nullopt
/// when y is a nonresidue. The nonresidue needed internally is the
/// smallest one, for reproducibility.
template <class Ctx>
std::optional<typename Ctx::uint> tonelli_ctx(const Ctx& f, const typename Ctx::uint& y) {
    using U = typename Ctx::uint;
    if (y == 0) return f.zero();
    U half_exp = (f.p - 1) / 2;
    if (pow_mod(f, y, half_exp) != 1) return std::nullopt;
    if (f.p % 4 == 3) return pow_mod(f, y, (f.p + 1) / 4);

    U q = f.p - 1;
    unsigned s = 0;
    while (q % 2 == 0) {
        q /= 2;
        ++s;
    }
    U z = 2;
    while (pow_mod(f, z, half_exp) == 1) z = f.add(z, f.one());
    U c = pow_mod(f, z, q);
    U t = pow_mod(f, y, q);
    U r = pow_mod(f, y, (q + 1) / 2);
    unsigned m = s;
    while (t != 1) {
        U t2 = f.mul(t, t);
        unsigned i = 1;
        while (t2 != 1) {
            t2 = f.mul(t2, t2);
            ++i;
        }
        U b = c;
        for (unsigned k = 0; k + i + 1 < m; ++k) b = f.mul(b, b);
        r = f.mul(r, b);
        c = f.mul(b, b);
        t = f.mul(t, c);
        m = i;
    }
    return r;
}

/// sqrt_table(p)[v] is the smaller square root of v, or -1 when v has
/// none. One O(p) pass; the independent oracle behind exhaustive checks.
inline std::vector<std::int64_t> sqrt_table(std::uint64_t p) {
    std::vector<std::int64_t> root_of(p, -1);
    Mod64 f{p};
    for (std::uint64_t x = 0; x <= (p - 1) / 2; ++x) {
        std::uint64_t sq = f.mul(x, x);
        if (root_of[sq] < 0) root_of[sq] = static_cast<std::int64_t>(x);
    }
    return root_of;
}

}  // namespace detail

/// Linear scan for x with x^2 = y (mod p). Requires p below the scan
/// budget (default 10^6).
inline SolveOutcome brute_force_roots(const OddPrime& p, const FpElement& y,
                                      std::uint64_t scan_budget = kScanBudgetDefault) {
    if (p.value() >= scan_budget) {
        throw budget_error("brute_force_roots: p=" + p.value().str() + " exceeds scan budget " +
                           std::to_string(scan_budget));
    }
    if (y.modulus() != p.value()) {
        throw std::invalid_argument("brute_force_roots: y is not an element of Z_" + p.value().str());
    }
    if (y.is_zero()) return detail::outcome_from_raw(p.value(), 0, 0, SolveMethod::brute_force);
    detail::Mod64 f{p.as_u64()};
    std::uint64_t target = f.reduce(y.value());
    for (std::uint64_t x = 1; x <= (f.p - 1) / 2; ++x) {
        if (f.mul(x, x) == target) {
            return detail::outcome_from_raw(p.value(), y.value(), Nat(x), SolveMethod::brute_force);
        }
    }
    SolveOutcome out = detail::outcome_from_raw(p.value(), y.value(), 0, SolveMethod::brute_force);
    return out;
}

/// Standard Tonelli-Shanks. Agrees with brute_force_roots everywhere both
/// run; works for any odd prime.
inline SolveOutcome tonelli_shanks(const OddPrime& p, const FpElement& y) {
    if (y.modulus() != p.value()) {
        throw std::invalid_argument("tonelli_shanks: y is not an element of Z_" + p.value().str());
    }
    std::optional<Nat> root;
    if (detail::fits_mod64(p.value())) {
        detail::Mod64 f{p.as_u64()};
        auto r = detail::tonelli_ctx(f, f.reduce(y.value()));
        if (r) root = Nat(*r);
    } else {
        detail::ModBig f{p.value()};
        auto r = detail::tonelli_ctx(f, y.value());
        if (r) root = *r;
    }
    if (!root) return detail::outcome_from_raw(p.value(), y.value(), 0, SolveMethod::tonelli_shanks);
    return detail::outcome_from_raw(p.value(), y.value(), *root, SolveMethod::tonelli_shanks);
}

struct Mismatch {
    Nat y;
    ResidueKind expected;
    Nat got;
};

/// Per-prime, per-subject tally of an exhaustive check. For every report:
/// residues_correct + nonresidues_zeroed + mismatch_count + 1 = p when the
/// subject is correct at y = 0 (zero_input_ok).
struct VerificationReport {
    VerificationReport(OddPrime p, std::string subj) : prime(std::move(p)), subject(std::move(subj)) {}

    OddPrime prime;
    std::string subject;
    std::uint64_t residues_correct = 0;
    std::uint64_t nonresidues_zeroed = 0;
    std::uint64_t mismatch_count = 0;
    bool zero_input_ok = true;
    std::vector<Mismatch> mismatches;  // first kMismatchSampleCap only
    std::chrono::duration<double> elapsed{};
    std::string note;

    bool passed() const { return mismatch_count == 0 && zero_input_ok; }
};

inline constexpr std::size_t kMismatchSampleCap = 1024;

namespace detail {

/// Evaluates `eval` at every y in [0, p) and scores it against the square
/// table: a root for every residue, zero for every nonresidue and for 0.
inline VerificationReport verify_pointwise_u64(const OddPrime& p,
                                               const std::function<std::uint64_t(std::uint64_t)>& eval,
                                               std::string subject, std::uint64_t scan_budget) {
    if (p.value() >= scan_budget) {
        throw budget_error("exhaustive verification: p=" + p.value().str() + " exceeds scan budget " +
                           std::to_string(scan_budget));
    }
    VerificationReport rep{p, std::move(subject)};
    auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t pv = p.as_u64();
    Mod64 f{pv};
    auto root_of = sqrt_table(pv);
    for (std::uint64_t y = 0; y < pv; ++y) {
        std::uint64_t v = eval(y);
        if (y == 0) {
            if (v != 0) {
                rep.zero_input_ok = false;
                rep.mismatches.push_back({Nat(y), ResidueKind::zero, Nat(v)});
            }
            continue;
        }
        if (root_of[y] >= 0) {
            if (v != 0 && f.mul(v, v) == y) {
                ++rep.residues_correct;
            } else {
                ++rep.mismatch_count;
                if (rep.mismatches.size() < kMismatchSampleCap) {
                    rep.mismatches.push_back({Nat(y), ResidueKind::residue, Nat(v)});
                }
            }
        } else {
            if (v == 0) {
                ++rep.nonresidues_zeroed;
            } else {
                ++rep.mismatch_count;
                if (rep.mismatches.size() < kMismatchSampleCap) {
                    rep.mismatches.push_back({Nat(y), ResidueKind::non_residue, Nat(v)});
                }
            }
        }
    }
    rep.elapsed = std::chrono::steady_clock::now() - t0;
    return rep;
}

/// Early-exit variant used to screen derivation candidates.
inline bool all_points_correct_u64(std::uint64_t p, const std::vector<std::int64_t>& root_of,
                                   const std::function<std::uint64_t(std::uint64_t)>& eval) {
    Mod64 f{p};
    for (std::uint64_t y = 0; y < p; ++y) {
        std::uint64_t v = eval(y);
        if (y == 0 || root_of[y] < 0) {
            if (v != 0) return false;
        } else if (v == 0 || f.mul(v, v) != y) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

/// Exhaustively audits a closed-form formula over all of Z_p.
inline VerificationReport verify_formula_exhaustive(const ClosedFormFormula& f,
                                                    std::uint64_t scan_budget = kScanBudgetDefault) {
    detail::Mod64 ctx{0};
    if (!f.prime.fits_u64() || f.prime.value() >= scan_budget) {
        throw budget_error("verify_formula_exhaustive: p=" + f.prime.value().str() +
                           " exceeds scan budget " + std::to_string(scan_budget));
    }
    ctx.p = f.prime.as_u64();
    auto consts = detail::lower_consts(ctx, f);
    std::string subject = std::string(to_string(f.variant)) + " " + render_formula(f, RenderStyle::text);
    return detail::verify_pointwise_u64(
        f.prime,
        [&](std::uint64_t y) {
            detail::Ops<detail::Mod64> ops{ctx};
            return detail::eval_schedule(ops, f.variant, consts, y);
        },
        std::move(subject), scan_budget);
}

}  // namespace qcroots
