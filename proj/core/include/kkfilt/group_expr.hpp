#pragma once

#include "kkfilt/fg_group.hpp"

#include <optional>

namespace kkf {

enum class TriBool { No, Yes, Unknown };

std::string tribool_str(TriBool t);

// Atom of a canonicalized group expression. Beyond the f.g. part an
// expression is a sorted multiset of these.
//   Prufer:      Z(p^infinity), `count` copies
//   InfSum:      direct sum over n >= 1 of Z/p^(a n + b); a = 0 means the
//                constant sum (then count collapses: countably many copies of
//                a countable sum is the same sum); a >= 1 strictly increasing
//   InfFree:     countable direct sum of Z (absorbs finite free rank)
//   InfProduct:  countable product of a fixed nontrivial finite group
//   PadicFree:   p-adic completion of Z^count
//   PadicInfFree p-adic completion of the countable free sum
//   PadicInfSum: p-adic completion of an unbounded InfSum(p; a, b)
struct ExprAtom {
    enum class Kind { Prufer, InfSum, InfFree, InfProduct, PadicFree, PadicInfFree, PadicInfSum };
    Kind kind;
    Integer p;  // all kinds except InfFree / InfProduct
    Integer a, b;
    int count = 1;
    FgGroup base;  // InfProduct

    bool operator==(const ExprAtom& o) const;
    bool operator<(const ExprAtom& o) const;  // canonical order
};

// Canonical direct-sum form: f.g. part + sorted atoms. Construct through the
// expr_* helpers or the parser; every public value is already canonical.
struct GroupExpr {
    FgGroup fg;
    std::vector<ExprAtom> atoms;

    bool is_trivial() const { return fg.is_trivial() && atoms.empty(); }
    std::optional<FgGroup> as_fg() const;  // engaged when no atoms remain
    // FreePart/Cyclic/Prufer/InfSum/InfProduct only: equality decides isomorphism
    bool in_decidable_fragment() const;

    bool operator==(const GroupExpr& o) const { return fg == o.fg && atoms == o.atoms; }
    bool operator!=(const GroupExpr& o) const { return !(*this == o); }

    std::string str() const;
};

GroupExpr expr_trivial();
GroupExpr expr_from_fg(const FgGroup& g);
GroupExpr expr_free(int rank);
GroupExpr expr_cyclic(const Integer& d);
GroupExpr expr_prufer(const Integer& p);
GroupExpr expr_inf_sum(const Integer& p, const Integer& a, const Integer& b);
GroupExpr expr_inf_free();
GroupExpr expr_inf_product(const FgGroup& base);
// p-adic completion with all reduction rules applied (bounded bases collapse
// to their p-parts, coprime and divisible material dies, completions nest).
GroupExpr expr_padic(const Integer& p, const GroupExpr& base);
GroupExpr expr_sum(const GroupExpr& x, const GroupExpr& y);
GroupExpr expr_sum(const std::vector<GroupExpr>& parts);

// Re-normalizes (sorting, merging, absorptions). Public values are already
// canonical, so this is the identity on them; kept as the spec surface and
// used by property tests.
GroupExpr canonicalize(const GroupExpr& e);

struct Cardinality {
    enum class Kind { Finite, CountablyInfinite, Continuum } kind;
    Integer value;  // |e| when finite
    bool operator==(const Cardinality& o) const { return kind == o.kind && value == o.value; }
};

struct ExponentInfo {
    bool finite;
    Integer value;  // exponent when finite
    bool operator==(const ExponentInfo& o) const { return finite == o.finite && value == o.value; }
};

struct InvariantProfile {
    Cardinality cardinality;
    ExponentInfo exponent;
    bool divisible;
    bool torsionfree;
    TriBool reduced;
    TriBool sum_of_cyclics;
    TriBool algebraically_compact;
};

InvariantProfile invariants(const GroupExpr& e);

// e[d] = {x : dx = 0}
GroupExpr torsion_subgroup_at(const GroupExpr& e, const Integer& d);
// e / ne
GroupExpr quotient_by(const GroupExpr& e, const Integer& n);

// Rule-table Hom/Ext with f.g. source: Hom(Z,H) = H, Hom(Z/d,H) = H[d],
// Ext(Z,H) = 0, Ext(Z/d,H) = H/dH, additively over g's canonical summands.
GroupExpr hom_from_fg(const FgGroup& g, const GroupExpr& h);
GroupExpr ext_from_fg(const FgGroup& g, const GroupExpr& h);

enum class IsoVerdict { Equal, Distinct, Undecided };

std::string iso_verdict_str(IsoVerdict v);

// Equal on matching canonical forms; Distinct when a definite profile field
// separates; Undecided otherwise. Never wrong, not always decisive.
IsoVerdict iso_check(const GroupExpr& x, const GroupExpr& y);

// Text grammar (also emitted by GroupExpr::str):
//   0 | Z | Z^r | Z/d | Prufer(p) | Sum(e1,...,ek) | InfSum(p; a*n+b)
//   | InfSum(Z) | InfProduct(e) | Padic(p; e)
// Throws std::invalid_argument with a position on malformed input.
GroupExpr parse_group_expr(const std::string& text);

}  // namespace kkf
