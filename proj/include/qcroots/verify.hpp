#pragma once

// Range verification: derive constants for every prime of a class up to a
// bound and audit each resulting formula exhaustively. Primes are
// independent jobs, fanned out over a small thread pool with an
// order-preserving merge.

#include <future>
#include <thread>

#include "qcroots/derivation.hpp"
#include "qcroots/oracle.hpp"

namespace qcroots {

enum class ClassFilter { c3mod4, c5mod8, c9mod16, c1mod16, all };

inline bool matches(ClassFilter filter, PrimeClass cls) {
    switch (filter) {
        case ClassFilter::c3mod4: return cls == PrimeClass::c3mod4;
        case ClassFilter::c5mod8: return cls == PrimeClass::c5mod8;
        case ClassFilter::c9mod16: return cls == PrimeClass::c9mod16;
        case ClassFilter::c1mod16: return cls == PrimeClass::c1mod16;
        case ClassFilter::all: return true;
    }
    return false;
}

struct VerifyRangeOptions {
    std::uint64_t exhaustive_budget = kExhaustiveRangeDefault;  // bound on p_max
    std::uint64_t scan_budget = kScanBudgetDefault;             // bound on any single p
    SearchBudget search{};
    bool audit_reference_rows = false;
};

namespace detail {

inline std::vector<VerificationReport> verify_one_prime(std::uint64_t pv, const VerifyRangeOptions& opts) {
    OddPrime p = OddPrime::from(Nat(pv));
    std::vector<VerificationReport> reports;
    switch (p.cls()) {
        case PrimeClass::c3mod4:
            reports.push_back(verify_formula_exhaustive(derive_3mod4(p), opts.scan_budget));
            break;
        case PrimeClass::c5mod8:
            for (const auto& vf : derive_5mod8(p).formulas) {
                reports.push_back(verify_formula_exhaustive(vf.formula, opts.scan_budget));
            }
            break;
        case PrimeClass::c9mod16: {
            DerivationResult d = derive_9mod16(p, opts.search);
            bool emitted = false;
            for (FormulaVariant v : {FormulaVariant::c9mod16a, FormulaVariant::c9mod16b}) {
                if (auto f = canonical_formula(d, v)) {
                    reports.push_back(verify_formula_exhaustive(*f, opts.scan_budget));
                    emitted = true;
                }
            }
            if (!emitted) {
                VerificationReport rep{p, "9mod16 derivation"};
                rep.note = d.note.empty() ? "no verified formula" : d.note;
                reports.push_back(std::move(rep));
            }
            if (opts.audit_reference_rows) {
                for (const auto& vf : d.reference_rows) {
                    VerificationReport rep = verify_formula_exhaustive(vf.formula, opts.scan_budget);
                    rep.note = "published row audit";
                    reports.push_back(std::move(rep));
                }
            }
            break;
        }
        case PrimeClass::c1mod16: {
            // No closed form for this class: cross-check the fallback
            // algorithm itself against the square table.
            detail::Mod64 f{pv};
            VerificationReport rep = detail::verify_pointwise_u64(
                p,
                [&](std::uint64_t y) {
                    auto r = detail::tonelli_ctx(f, y);
                    return r ? *r : 0;
                },
                "tonelli-shanks", opts.scan_budget);
            rep.note = "no closed form; fallback-only";
            reports.push_back(std::move(rep));
            break;
        }
    }
    return reports;
}

}  // namespace detail

/// Reports for every odd prime p <= p_max in the filtered class, in
/// ascending prime order. p_max is capped by the exhaustive-range budget
/// (default 10^4).
inline std::vector<VerificationReport> verify_range(ClassFilter filter, std::uint64_t p_max,
                                                    const VerifyRangeOptions& opts = {}) {
    if (p_max > opts.exhaustive_budget) {
        throw budget_error("verify_range: p_max=" + std::to_string(p_max) +
                           " exceeds exhaustive budget " + std::to_string(opts.exhaustive_budget));
    }
    std::vector<std::uint64_t> ps;
    for (std::uint64_t pv : primes_up_to(p_max)) {
        PrimeClass cls = pv % 4 == 3 ? PrimeClass::c3mod4
                       : pv % 8 == 5 ? PrimeClass::c5mod8
                       : pv % 16 == 9 ? PrimeClass::c9mod16
                                      : PrimeClass::c1mod16;
        if (matches(filter, cls)) ps.push_back(pv);
    }

    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<std::vector<VerificationReport>>> chunks;
    std::size_t chunk_size = (ps.size() + workers - 1) / std::max<std::size_t>(1, workers);
    for (std::size_t begin = 0; begin < ps.size(); begin += chunk_size) {
        std::size_t end = std::min(ps.size(), begin + chunk_size);
        chunks.push_back(std::async(std::launch::async, [&, begin, end] {
            std::vector<VerificationReport> part;
            for (std::size_t i = begin; i < end; ++i) {
                auto one = detail::verify_one_prime(ps[i], opts);
                part.insert(part.end(), std::make_move_iterator(one.begin()),
                            std::make_move_iterator(one.end()));
            }
            return part;
        }));
    }
    std::vector<VerificationReport> reports;
    for (auto& fut : chunks) {
        auto part = fut.get();
        reports.insert(reports.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
    }
    return reports;
}

}  // namespace qcroots
