#pragma once

// Structured representation and evaluation of the closed-form square-root
// polynomials over Z_p. Each formula returns a root of y for quadratic
// residues and exactly 0 for nonresidues: the factor (1 + y^((p-1)/2))
// vanishes on nonresidues by Euler's criterion.
//
//   3 mod 4 :  (p+1)/2 * y^((p+1)/4) * (1 + y^((p-1)/2))
//   5 mod 8 :  b * y^((p+3)/8) * (1 + y^((p-1)/2)) * (a + y^((p-1)/4))
//              with a^2 = -1 and 8ab^2 = 1
//   9 mod 16:  d * y^E * (1 + y^((p-1)/2)) * (a + y^((p-1)/8))
//                * (b + c*y^((p-1)/8) + y^((p-1)/4))
//              with E = (p+7)/16 (variant a) or (3p+5)/16 (variant b)
//
// The "naive" variant is the bare power y^((p+1)/4), correct on residues
// only; callers must verify its output themselves.

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

#include "qcroots/core_arith.hpp"

namespace qcroots {

enum class FormulaVariant { naive, c3mod4, c5mod8, c9mod16a, c9mod16b };

inline const char* to_string(FormulaVariant v) {
    switch (v) {
        case FormulaVariant::naive: return "naive";
        case FormulaVariant::c3mod4: return "3mod4";
        case FormulaVariant::c5mod8: return "5mod8";
        case FormulaVariant::c9mod16a: return "9mod16a";
        case FormulaVariant::c9mod16b: return "9mod16b";
    }
    return "?";
}

inline PrimeClass required_class(FormulaVariant v) {
    switch (v) {
        case FormulaVariant::naive:
        case FormulaVariant::c3mod4: return PrimeClass::c3mod4;
        case FormulaVariant::c5mod8: return PrimeClass::c5mod8;
        default: return PrimeClass::c9mod16;
    }
}

struct ClosedFormFormula {
    FormulaVariant variant;
    OddPrime prime;
    Nat coeff;                   // leading constant: (p+1)/2, b, or d; 1 for naive
    std::optional<Nat> a;        // 5mod8 and 9mod16 variants
    std::optional<Nat> b_inner;  // constant term of the quadratic factor (9mod16)
    std::optional<Nat> c;        // middle coefficient of the quadratic factor (9mod16)
    Nat outer_exp;
    Nat annihilator_exp;  // (p-1)/2; 0 for naive
    Nat quarter_exp;      // (p-1)/4; 0 when unused
    Nat eighth_exp;       // (p-1)/8; 0 when unused

    bool operator==(const ClosedFormFormula& o) const {
        return variant == o.variant && prime == o.prime && coeff == o.coeff && a == o.a &&
               b_inner == o.b_inner && c == o.c && outer_exp == o.outer_exp &&
               annihilator_exp == o.annihilator_exp && quarter_exp == o.quarter_exp &&
               eighth_exp == o.eighth_exp;
    }
};

namespace detail {

inline void require_class(const OddPrime& p, FormulaVariant v) {
    if (p.cls() != required_class(v)) {
        throw std::invalid_argument(std::string("formula variant ") + to_string(v) +
                                    " requires a prime of class " + to_string(required_class(v)) +
                                    "; p=" + p.value().str() + " is " + to_string(p.cls()));
    }
}

}  // namespace detail

inline ClosedFormFormula make_naive(const OddPrime& p) {
    detail::require_class(p, FormulaVariant::naive);
    return {FormulaVariant::naive, p, 1, std::nullopt, std::nullopt, std::nullopt,
            (p.value() + 1) / 4, 0, 0, 0};
}

inline ClosedFormFormula make_3mod4(const OddPrime& p) {
    detail::require_class(p, FormulaVariant::c3mod4);
    const Nat& pv = p.value();
    return {FormulaVariant::c3mod4, p, (pv + 1) / 2, std::nullopt, std::nullopt, std::nullopt,
            (pv + 1) / 4, (pv - 1) / 2, 0, 0};
}

/// Builds the 5 mod 8 formula from its constants and checks a^2 = -1,
/// 8*a*b^2 = 1 (mod p).
inline ClosedFormFormula make_5mod8(const OddPrime& p, const Nat& a, const Nat& b) {
    detail::require_class(p, FormulaVariant::c5mod8);
    const Nat& pv = p.value();
    if (a * a % pv != pv - 1) {
        throw std::invalid_argument("5mod8 constant a=" + a.str() + " does not satisfy a^2 = -1 mod " + pv.str());
    }
    if (8 * a % pv * b % pv * b % pv != 1) {
        throw std::invalid_argument("5mod8 constants (a=" + a.str() + ", b=" + b.str() +
                                    ") do not satisfy 8ab^2 = 1 mod " + pv.str());
    }
    return {FormulaVariant::c5mod8, p, b % pv, a % pv, std::nullopt, std::nullopt,
            (pv + 3) / 8, (pv - 1) / 2, (pv - 1) / 4, 0};
}

/// Builds a 9 mod 16 formula from its constants. No algebraic conditions
/// are imposed on (a, b, c, d); correctness is established by exhaustive
/// verification, not by construction.
inline ClosedFormFormula make_9mod16(const OddPrime& p, FormulaVariant variant, const Nat& a,
                                     const Nat& b, const Nat& c, const Nat& d) {
    if (variant != FormulaVariant::c9mod16a && variant != FormulaVariant::c9mod16b) {
        throw std::invalid_argument("make_9mod16 requires variant 9mod16a or 9mod16b");
    }
    detail::require_class(p, variant);
    const Nat& pv = p.value();
    Nat outer = variant == FormulaVariant::c9mod16a ? Nat((pv + 7) / 16) : Nat((3 * pv + 5) / 16);
    return {variant, p, d % pv, a % pv, b % pv, c % pv,
            outer, (pv - 1) / 2, (pv - 1) / 4, (pv - 1) / 8};
}

namespace detail {

/// Formula constants lowered into a modular context's word type.
template <class U>
struct SchedConsts {
    U coeff{}, a{}, b{}, c{};
    U base_exp{};  // naive: the full outer exponent; others: outer_a - 1
};

template <class Ctx>
SchedConsts<typename Ctx::uint> lower_consts(const Ctx& f, const ClosedFormFormula& cf) {
    SchedConsts<typename Ctx::uint> k;
    k.coeff = f.reduce(cf.coeff);
    if (cf.a) k.a = f.reduce(*cf.a);
    if (cf.b_inner) k.b = f.reduce(*cf.b_inner);
    if (cf.c) k.c = f.reduce(*cf.c);
    const Nat& p = cf.prime.value();
    switch (cf.variant) {
        case FormulaVariant::naive: k.base_exp = f.reduce((p + 1) / 4); break;
        case FormulaVariant::c3mod4: k.base_exp = f.reduce((p - 3) / 4); break;
        case FormulaVariant::c5mod8: k.base_exp = f.reduce((p - 5) / 8); break;
        default: k.base_exp = f.reduce((p - 9) / 16); break;
    }
    return k;
}

/// The fixed evaluation schedule shared by all variants: one power chain
/// w = y^(outer_a - 1), every other power derived from it by single
/// multiplications and squarings. op_count() reports the cost of exactly
/// this schedule.
template <class Ctx>
typename Ctx::uint eval_schedule(Ops<Ctx>& ops, FormulaVariant variant,
                                 const SchedConsts<typename Ctx::uint>& k,
                                 const typename Ctx::uint& y) {
    using U = typename Ctx::uint;
    const U one = ops.f.one();
    if (variant == FormulaVariant::naive) return ops.pow(y, k.base_exp);

    U w = ops.pow(y, k.base_exp);
    U u = ops.mul(w, y);  // y^outer_a
    U t = ops.mul(u, w);  // 3mod4: y^((p-1)/2); 5mod8: y^((p-1)/4); 9mod16: y^((p-1)/8)
    switch (variant) {
        case FormulaVariant::c3mod4:
            return ops.mul(ops.mul(k.coeff, u), ops.add(one, t));
        case FormulaVariant::c5mod8: {
            U h = ops.sqr(t);  // y^((p-1)/2)
            U r = ops.mul(k.coeff, u);
            r = ops.mul(r, ops.add(one, h));
            return ops.mul(r, ops.add(k.a, t));
        }
        default: {
            U o = variant == FormulaVariant::c9mod16b ? ops.mul(t, u) : u;  // y^((3p+5)/16)
            U t2 = ops.sqr(t);   // y^((p-1)/4)
            U t4 = ops.sqr(t2);  // y^((p-1)/2)
            U quad = ops.add(ops.add(k.b, ops.mul(k.c, t)), t2);
            U r = ops.mul(k.coeff, o);
            r = ops.mul(r, ops.add(one, t4));
            r = ops.mul(r, ops.add(k.a, t));
            return ops.mul(r, quad);
        }
    }
}

template <class Ctx>
typename Ctx::uint eval_formula_ctx(const Ctx& f, const ClosedFormFormula& cf,
                                    const typename Ctx::uint& y, OpCount* tally = nullptr) {
    Ops<Ctx> ops{f, tally};
    return eval_schedule(ops, cf.variant, lower_consts(f, cf), y);
}

}  // namespace detail

/// Evaluates the formula at y with the + sign convention. The class of
/// f.prime must match the variant, and y must live in the same field.
inline FpElement eval_formula(const ClosedFormFormula& f, const FpElement& y) {
    if (y.modulus() != f.prime.value()) {
        throw std::invalid_argument("eval_formula: y has modulus " + y.modulus().str() +
                                    " but the formula is over p=" + f.prime.value().str());
    }
    detail::require_class(f.prime, f.variant);
    if (detail::fits_mod64(f.prime.value())) {
        detail::Mod64 ctx{f.prime.as_u64()};
        return FpElement::from_reduced(Nat(detail::eval_formula_ctx(ctx, f, ctx.reduce(y.value()))),
                                       f.prime.value());
    }
    detail::ModBig ctx{f.prime.value()};
    return FpElement::from_reduced(detail::eval_formula_ctx(ctx, f, y.value()), f.prime.value());
}

/// y^((p+1)/4) for p = 3 mod 4, with no residue check: a correct root when
/// y is a residue and an unrelated value otherwise.
inline FpElement naive_root(const OddPrime& p, const FpElement& y) {
    detail::require_class(p, FormulaVariant::naive);
    if (y.modulus() != p.value()) {
        throw std::invalid_argument("naive_root: y is not an element of Z_" + p.value().str());
    }
    return mod_pow(y, (p.value() + 1) / 4);
}

/// Exact cost of eval_formula's schedule for this variant and prime. The
/// schedule is input-independent, so the tally is computed by running it
/// once on a dummy point.
inline OpCount op_count(const ClosedFormFormula& f) {
    OpCount tally;
    detail::ModBig ctx{f.prime.value()};
    detail::eval_formula_ctx(ctx, f, Nat(1), &tally);
    return tally;
}

enum class OutcomeKind { roots, nonresidue_zero, zero_input };
enum class SolveMethod { closed_form, naive_power, tonelli_shanks, brute_force };

inline const char* to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::closed_form: return "closed-form";
        case SolveMethod::naive_power: return "naive-power";
        case SolveMethod::tonelli_shanks: return "tonelli-shanks";
        case SolveMethod::brute_force: return "brute-force";
    }
    return "?";
}

/// Result of a square-root computation. For OutcomeKind::roots the pair is
/// sorted: lo <= hi, lo + hi = p, lo^2 = hi^2 = y. `raw` preserves the
/// direct (+ sign convention) output of the formula or algorithm used.
struct SolveOutcome {
    OutcomeKind kind;
    Nat lo;
    Nat hi;
    Nat raw;
    SolveMethod method = SolveMethod::closed_form;
    std::optional<ClosedFormFormula> formula;
    bool fallback = false;  // no closed form applied; a general algorithm did

    bool has_roots() const { return kind == OutcomeKind::roots; }
};

namespace detail {

inline SolveOutcome outcome_from_raw(const Nat& p, const Nat& y, Nat raw, SolveMethod m,
                                     std::optional<ClosedFormFormula> f = std::nullopt,
                                     bool fallback = false) {
    SolveOutcome out;
    out.method = m;
    out.formula = std::move(f);
    out.fallback = fallback;
    out.raw = raw;
    if (y == 0) {
        out.kind = OutcomeKind::zero_input;
        out.lo = out.hi = 0;
    } else if (raw == 0) {
        out.kind = OutcomeKind::nonresidue_zero;
        out.lo = out.hi = 0;
    } else {
        out.kind = OutcomeKind::roots;
        Nat other = p - raw;
        out.lo = raw < other ? raw : other;
        out.hi = p - out.lo;
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rendering and parsing

enum class RenderStyle { text, json };

namespace detail {

inline std::string pow_str(const Nat& e) { return e == 1 ? "y" : "y^" + e.str(); }

/// One parenthesized factor, zero terms omitted: (a+y^q), (b+cy^e+y^2e), ...
inline std::string factor_str(std::initializer_list<std::pair<Nat, Nat>> terms) {
    // each term is {coefficient, exponent}; exponent 0 means a constant
    std::string s = "(";
    bool first = true;
    for (const auto& [k, e] : terms) {
        if (k == 0) continue;
        if (!first) s += "+";
        first = false;
        if (e == 0) {
            s += k.str();
        } else {
            if (k != 1) s += k.str();
            s += pow_str(e);
        }
    }
    s += ")";
    return s;
}

}  // namespace detail

/// Renders in the tabular text notation, e.g. "±4y^2(1+y^3)", or as a JSON
/// document with stable field names. Arbitrary-precision fields are emitted
/// as decimal strings.
inline std::string render_formula(const ClosedFormFormula& f, RenderStyle style) {
    if (style == RenderStyle::text) {
        std::string s = "±";  // ±
        if (f.coeff != 1) s += f.coeff.str();
        s += detail::pow_str(f.outer_exp);
        if (f.variant == FormulaVariant::naive) return s;
        s += "(1+" + detail::pow_str(f.annihilator_exp) + ")";
        if (f.variant == FormulaVariant::c5mod8) {
            s += detail::factor_str({{*f.a, 0}, {1, f.quarter_exp}});
        } else if (f.variant == FormulaVariant::c9mod16a || f.variant == FormulaVariant::c9mod16b) {
            s += detail::factor_str({{*f.a, 0}, {1, f.eighth_exp}});
            s += detail::factor_str({{*f.b_inner, 0}, {*f.c, f.eighth_exp}, {1, f.quarter_exp}});
        }
        return s;
    }
    nlohmann::json j;
    j["prime"] = f.prime.value().str();
    j["class"] = to_string(f.prime.cls());
    j["variant"] = to_string(f.variant);
    j["coeff"] = f.coeff.str();
    j["a"] = f.a ? nlohmann::json(f.a->str()) : nlohmann::json(nullptr);
    j["b"] = f.b_inner ? nlohmann::json(f.b_inner->str()) : nlohmann::json(nullptr);
    j["c"] = f.c ? nlohmann::json(f.c->str()) : nlohmann::json(nullptr);
    j["exponents"] = {{"outer", f.outer_exp.str()},
                      {"annihilator", f.annihilator_exp.str()},
                      {"quarter", f.quarter_exp.str()},
                      {"eighth", f.eighth_exp.str()}};
    return j.dump();
}

/// Inverse of render_formula(..., RenderStyle::json). Validates the
/// reconstructed formula, including the exponent fields.
inline ClosedFormFormula parse_formula_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    OddPrime p = OddPrime::from(Nat(j.at("prime").get<std::string>()));
    std::string variant = j.at("variant").get<std::string>();
    Nat coeff(j.at("coeff").get<std::string>());
    auto opt = [&](const char* key) -> std::optional<Nat> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return Nat(j[key].get<std::string>());
    };
    std::optional<Nat> a = opt("a"), b = opt("b"), c = opt("c");
    ClosedFormFormula f = [&] {
        if (variant == "naive") return make_naive(p);
        if (variant == "3mod4") return make_3mod4(p);
        if (variant == "5mod8") {
            if (!a) throw std::invalid_argument("5mod8 formula requires field a");
            ClosedFormFormula g = make_5mod8(p, *a, coeff);
            return g;
        }
        if (variant == "9mod16a" || variant == "9mod16b") {
            if (!a || !b || !c) throw std::invalid_argument("9mod16 formula requires fields a, b, c");
            return make_9mod16(p, variant == "9mod16a" ? FormulaVariant::c9mod16a : FormulaVariant::c9mod16b,
                               *a, *b, *c, coeff);
        }
        throw std::invalid_argument("unknown formula variant: " + variant);
    }();
    if (f.coeff != coeff % p.value()) {
        throw std::invalid_argument("formula JSON has inconsistent coeff");
    }
    const auto& e = j.at("exponents");
    if (Nat(e.at("outer").get<std::string>()) != f.outer_exp ||
        Nat(e.at("annihilator").get<std::string>()) != f.annihilator_exp ||
        Nat(e.at("quarter").get<std::string>()) != f.quarter_exp ||
        Nat(e.at("eighth").get<std::string>()) != f.eighth_exp) {
        throw std::invalid_argument("formula JSON has inconsistent exponents for p=" + p.value().str());
    }
    return f;
}

}  // namespace qcroots
