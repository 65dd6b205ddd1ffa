#include "kkfilt/group_expr.hpp"

#include <boost/multiprecision/miller_rabin.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace kkf {

namespace {

bool is_prime(const Integer& p) {
    if (p < 2) return false;
    return boost::multiprecision::miller_rabin_test(p, 25);
}

void require_prime(const Integer& p, const char* who) {
    if (!is_prime(p)) throw std::invalid_argument(std::string(who) + ": p must be prime");
}

int order_rank(ExprAtom::Kind k) {
    switch (k) {
        case ExprAtom::Kind::Prufer: return 0;
        case ExprAtom::Kind::InfSum: return 1;
        case ExprAtom::Kind::InfFree: return 2;
        case ExprAtom::Kind::InfProduct: return 3;
        case ExprAtom::Kind::PadicFree: return 4;
        case ExprAtom::Kind::PadicInfFree: return 5;
        case ExprAtom::Kind::PadicInfSum: return 6;
    }
    return 7;
}

// prime -> exponent of n by trial division (moduli in this domain are small)
std::map<Integer, long> factor_modulus(Integer n) {
    std::map<Integer, long> out;
    for (Integer p = 2; p * p <= n; ++p)
        while (n % p == 0) {
            ++out[p];
            n /= p;
        }
    if (n > 1) ++out[n];
    return out;
}

FgGroup fg_of_factor_list(std::vector<Integer> factors) {
    factors.erase(std::remove(factors.begin(), factors.end(), Integer(1)), factors.end());
    return FgGroup(0, canonical_invariant_factors(std::move(factors)));
}

}  // namespace

bool ExprAtom::operator==(const ExprAtom& o) const {
    return kind == o.kind && p == o.p && a == o.a && b == o.b && count == o.count && base == o.base;
}

bool ExprAtom::operator<(const ExprAtom& o) const {
    auto key = [](const ExprAtom& x) {
        return std::make_tuple(order_rank(x.kind), x.p, x.a, x.b, x.base.rank, x.base.torsion);
    };
    return key(*this) < key(o);
}

namespace {

// Merge-sort atoms, apply absorptions, rebuild the f.g. part. All expr_*
// constructors funnel through here so public values are always canonical.
GroupExpr normalize(FgGroup fg, std::vector<ExprAtom> atoms) {
    // validate and pre-reduce atoms
    std::vector<ExprAtom> work;
    FgGroup product_base = FgGroup::trivial();
    bool have_product = false, have_inf_free = false;
    std::set<Integer> padic_inf_free_primes;
    for (ExprAtom& at : atoms) {
        if (at.count <= 0) throw std::invalid_argument("atom multiplicity must be positive");
        switch (at.kind) {
            case ExprAtom::Kind::Prufer:
                require_prime(at.p, "Prufer");
                work.push_back(at);
                break;
            case ExprAtom::Kind::InfSum:
            case ExprAtom::Kind::PadicInfSum:
                require_prime(at.p, "InfSum");
                if (at.a < 0) throw std::invalid_argument("InfSum: slope must be >= 0");
                if (at.a + at.b < 1)
                    throw std::invalid_argument("InfSum: first exponent a+b must be >= 1");
                if (at.kind == ExprAtom::Kind::PadicInfSum && at.a == 0)
                    throw std::invalid_argument("completion of a bounded sum must be reduced away");
                if (at.a == 0) at.count = 1;  // countably many countable copies
                work.push_back(at);
                break;
            case ExprAtom::Kind::InfFree:
                have_inf_free = true;
                break;
            case ExprAtom::Kind::InfProduct:
                if (at.base.is_trivial()) break;
                if (!at.base.is_finite())
                    throw std::invalid_argument("InfProduct base must be finite");
                for (int c = 0; c < at.count; ++c) product_base = direct_sum(product_base, at.base);
                have_product = true;
                break;
            case ExprAtom::Kind::PadicFree:
                require_prime(at.p, "Padic");
                work.push_back(at);
                break;
            case ExprAtom::Kind::PadicInfFree:
                require_prime(at.p, "Padic");
                padic_inf_free_primes.insert(at.p);  // copies at one prime collapse
                break;
        }
    }
    if (have_inf_free) fg.rank = 0;  // finite free rank is absorbed
    if (have_product && !product_base.is_trivial())
        work.push_back(ExprAtom{ExprAtom::Kind::InfProduct, 0, 0, 0, 1, product_base});
    if (have_inf_free)
        work.push_back(ExprAtom{ExprAtom::Kind::InfFree, 0, 0, 0, 1, FgGroup::trivial()});
    for (const Integer& p : padic_inf_free_primes)
        work.push_back(ExprAtom{ExprAtom::Kind::PadicInfFree, p, 0, 0, 1, FgGroup::trivial()});

    // cyclic-prefix absorption into InfSums: a Z/p^c summand with c equal to
    // the would-be n=0 exponent extends the sum downward
    std::sort(work.begin(), work.end());
    std::vector<Integer> factors = fg.torsion;
    for (ExprAtom& at : work) {
        if (at.kind != ExprAtom::Kind::InfSum) continue;
        while (true) {
            Integer c = at.b;  // exponent the rule would give at n = 0
            if (c < 1) break;
            int found = -1;
            for (int i = static_cast<int>(factors.size()) - 1; i >= 0; --i)
                if (valuation(factors[i], at.p) == c) {
                    found = i;
                    break;
                }
            if (found < 0) break;
            Integer pc = 1;
            for (Integer t = 0; t < c; ++t) pc *= at.p;
            factors[found] /= pc;
            if (at.a == 0) continue;  // constant sum absorbs copies without reindexing
            at.b -= at.a;
        }
    }
    fg = FgGroup(fg.rank, fg_of_factor_list(factors).torsion);

    // merge equal keys
    std::sort(work.begin(), work.end());
    std::vector<ExprAtom> merged;
    for (ExprAtom& at : work) {
        if (!merged.empty()) {
            ExprAtom& last = merged.back();
            if (last.kind == at.kind && last.p == at.p && last.a == at.a && last.b == at.b &&
                last.base == at.base) {
                if (at.kind == ExprAtom::Kind::InfSum && at.a == 0) continue;  // collapses
                last.count += at.count;
                continue;
            }
        }
        merged.push_back(at);
    }
    GroupExpr out;
    out.fg = fg;
    out.atoms = std::move(merged);
    return out;
}

}  // namespace

std::optional<FgGroup> GroupExpr::as_fg() const {
    if (!atoms.empty()) return std::nullopt;
    return fg;
}

bool GroupExpr::in_decidable_fragment() const {
    for (const ExprAtom& at : atoms)
        if (at.kind == ExprAtom::Kind::PadicFree || at.kind == ExprAtom::Kind::PadicInfFree ||
            at.kind == ExprAtom::Kind::PadicInfSum)
            return false;
    return true;
}

GroupExpr expr_trivial() { return GroupExpr{}; }

GroupExpr expr_from_fg(const FgGroup& g) { return normalize(g, {}); }

GroupExpr expr_free(int rank) { return expr_from_fg(FgGroup::free(rank)); }

GroupExpr expr_cyclic(const Integer& d) { return expr_from_fg(FgGroup::cyclic(d)); }

GroupExpr expr_prufer(const Integer& p) {
    return normalize(FgGroup::trivial(),
                     {ExprAtom{ExprAtom::Kind::Prufer, p, 0, 0, 1, FgGroup::trivial()}});
}

GroupExpr expr_inf_sum(const Integer& p, const Integer& a, const Integer& b) {
    return normalize(FgGroup::trivial(),
                     {ExprAtom{ExprAtom::Kind::InfSum, p, a, b, 1, FgGroup::trivial()}});
}

GroupExpr expr_inf_free() {
    return normalize(FgGroup::trivial(),
                     {ExprAtom{ExprAtom::Kind::InfFree, 0, 0, 0, 1, FgGroup::trivial()}});
}

GroupExpr expr_inf_product(const FgGroup& base) {
    return normalize(FgGroup::trivial(),
                     {ExprAtom{ExprAtom::Kind::InfProduct, 0, 0, 0, 1, base}});
}

GroupExpr expr_sum(const GroupExpr& x, const GroupExpr& y) {
    FgGroup fg = direct_sum(x.fg, y.fg);
    std::vector<ExprAtom> atoms = x.atoms;
    atoms.insert(atoms.end(), y.atoms.begin(), y.atoms.end());
    return normalize(fg, std::move(atoms));
}

GroupExpr expr_sum(const std::vector<GroupExpr>& parts) {
    GroupExpr acc = expr_trivial();
    for (const GroupExpr& p : parts) acc = expr_sum(acc, p);
    return acc;
}

GroupExpr canonicalize(const GroupExpr& e) { return normalize(e.fg, e.atoms); }

GroupExpr expr_padic(const Integer& p, const GroupExpr& base) {
    require_prime(p, "Padic");
    GroupExpr out = expr_trivial();
    // f.g. part: free rank completes, torsion keeps its p-part
    if (base.fg.rank > 0)
        out = expr_sum(out, normalize(FgGroup::trivial(),
                                      {ExprAtom{ExprAtom::Kind::PadicFree, p, 0, 0, base.fg.rank,
                                                FgGroup::trivial()}}));
    std::vector<Integer> kept;
    for (const Integer& d : base.fg.torsion) {
        long t = valuation(d, p);
        Integer pt = 1;
        for (long i = 0; i < t; ++i) pt *= p;
        if (pt > 1) kept.push_back(pt);
    }
    out = expr_sum(out, expr_from_fg(fg_of_factor_list(kept)));

    for (const ExprAtom& at : base.atoms) {
        switch (at.kind) {
            case ExprAtom::Kind::Prufer:
                break;  // divisible: completion vanishes
            case ExprAtom::Kind::InfSum:
                if (at.p != p) break;
                if (at.a == 0) {
                    // bounded: already complete
                    out = expr_sum(out, normalize(FgGroup::trivial(), {at}));
                } else {
                    ExprAtom c = at;
                    c.kind = ExprAtom::Kind::PadicInfSum;
                    out = expr_sum(out, normalize(FgGroup::trivial(), {c}));
                }
                break;
            case ExprAtom::Kind::InfFree:
                out = expr_sum(out, normalize(FgGroup::trivial(),
                                              {ExprAtom{ExprAtom::Kind::PadicInfFree, p, 0, 0, 1,
                                                        FgGroup::trivial()}}));
                break;
            case ExprAtom::Kind::InfProduct: {
                std::vector<Integer> parts;
                for (const Integer& d : at.base.torsion) {
                    long t = valuation(d, p);
                    Integer pt = 1;
                    for (long i = 0; i < t; ++i) pt *= p;
                    if (pt > 1) parts.push_back(pt);
                }
                FgGroup pp = fg_of_factor_list(parts);
                if (!pp.is_trivial()) out = expr_sum(out, expr_inf_product(pp));
                break;
            }
            case ExprAtom::Kind::PadicFree:
            case ExprAtom::Kind::PadicInfFree:
            case ExprAtom::Kind::PadicInfSum:
                // completion is idempotent at the same prime, vanishes at others
                if (at.p == p) out = expr_sum(out, normalize(FgGroup::trivial(), {at}));
                break;
        }
    }
    return out;
}

// ---------------------------------------------------------------- invariants

namespace {

InvariantProfile profile_of_fg(const FgGroup& g) {
    InvariantProfile pr;
    if (g.is_finite()) {
        pr.cardinality = {Cardinality::Kind::Finite, g.order()};
    } else {
        pr.cardinality = {Cardinality::Kind::CountablyInfinite, 0};
    }
    Integer e = g.exponent();
    pr.exponent = (e == 0) ? ExponentInfo{false, 0} : ExponentInfo{true, e};
    pr.divisible = g.is_trivial();
    pr.torsionfree = g.torsion.empty();
    pr.reduced = TriBool::Yes;
    pr.sum_of_cyclics = TriBool::Yes;
    // finite groups are pure-injective; a free summand obstructs completeness
    pr.algebraically_compact = g.is_finite() ? TriBool::Yes : TriBool::No;
    return pr;
}

InvariantProfile profile_of_atom(const ExprAtom& at) {
    InvariantProfile pr;
    pr.reduced = TriBool::Yes;
    pr.divisible = false;
    pr.algebraically_compact = TriBool::Unknown;
    switch (at.kind) {
        case ExprAtom::Kind::Prufer:
            pr.cardinality = {Cardinality::Kind::CountablyInfinite, 0};
            pr.exponent = {false, 0};
            pr.divisible = true;
            pr.torsionfree = false;
            pr.reduced = TriBool::No;
            pr.sum_of_cyclics = TriBool::No;
            pr.algebraically_compact = TriBool::Yes;  // divisible
            break;
        case ExprAtom::Kind::InfSum: {
            pr.cardinality = {Cardinality::Kind::CountablyInfinite, 0};
            if (at.a == 0) {
                Integer pb = 1;
                for (Integer t = 0; t < at.b; ++t) pb *= at.p;
                pr.exponent = {true, pb};
                pr.algebraically_compact = TriBool::Yes;  // bounded
            } else {
                pr.exponent = {false, 0};
                // an unbounded reduced sum of cyclics is never complete
                pr.algebraically_compact = TriBool::No;
            }
            pr.torsionfree = false;
            pr.sum_of_cyclics = TriBool::Yes;
            break;
        }
        case ExprAtom::Kind::InfFree:
            pr.cardinality = {Cardinality::Kind::CountablyInfinite, 0};
            pr.exponent = {false, 0};
            pr.torsionfree = true;
            pr.sum_of_cyclics = TriBool::Yes;
            pr.algebraically_compact = TriBool::No;
            break;
        case ExprAtom::Kind::InfProduct: {
            pr.cardinality = {Cardinality::Kind::Continuum, 0};
            bool finite_base = at.base.order() != 0;
            pr.exponent = finite_base ? ExponentInfo{true, at.base.exponent()}
                                      : ExponentInfo{false, 0};
            pr.torsionfree = at.base.torsion.empty();
            // a product of one finite group is bounded, hence a sum of cyclics
            // and pure-injective; a free factor kills both properties
            pr.sum_of_cyclics = finite_base ? TriBool::Yes : TriBool::No;
            pr.algebraically_compact = finite_base ? TriBool::Yes : TriBool::No;
            break;
        }
        case ExprAtom::Kind::PadicFree:
        case ExprAtom::Kind::PadicInfFree:
            pr.cardinality = {Cardinality::Kind::Continuum, 0};
            pr.exponent = {false, 0};
            pr.torsionfree = true;
            pr.sum_of_cyclics = TriBool::No;
            pr.algebraically_compact = TriBool::Yes;  // complete
            break;
        case ExprAtom::Kind::PadicInfSum:
            pr.cardinality = {Cardinality::Kind::Continuum, 0};
            pr.exponent = {false, 0};
            pr.torsionfree = false;  // the dense sum is torsion
            pr.sum_of_cyclics = TriBool::No;
            pr.algebraically_compact = TriBool::Yes;  // complete
            break;
    }
    return pr;
}

TriBool combine_all(TriBool x, TriBool y) {
    if (x == TriBool::No || y == TriBool::No) return TriBool::No;
    if (x == TriBool::Yes && y == TriBool::Yes) return TriBool::Yes;
    return TriBool::Unknown;
}

}  // namespace

InvariantProfile invariants(const GroupExpr& e) {
    InvariantProfile pr = profile_of_fg(e.fg);
    for (const ExprAtom& at : e.atoms) {
        InvariantProfile ap = profile_of_atom(at);
        // cardinality: max of the scale, finite values multiply
        if (ap.cardinality.kind == Cardinality::Kind::Finite &&
            pr.cardinality.kind == Cardinality::Kind::Finite) {
            pr.cardinality.value *= ap.cardinality.value;
        } else if (static_cast<int>(ap.cardinality.kind) > static_cast<int>(pr.cardinality.kind)) {
            pr.cardinality = ap.cardinality;
        }
        // exponent: sup = lcm on finite values
        if (!ap.exponent.finite)
            pr.exponent = {false, 0};
        else if (pr.exponent.finite)
            pr.exponent.value = lcm(pr.exponent.value, ap.exponent.value);
        pr.divisible = pr.divisible && ap.divisible;
        pr.torsionfree = pr.torsionfree && ap.torsionfree;
        pr.reduced = combine_all(pr.reduced, ap.reduced);
        pr.sum_of_cyclics = combine_all(pr.sum_of_cyclics, ap.sum_of_cyclics);
        // compactness passes to summands and is closed under finite sums
        pr.algebraically_compact =
            combine_all(pr.algebraically_compact, ap.algebraically_compact);
    }
    return pr;
}

// ------------------------------------------------------------------- d-rules

namespace {

Integer pow_int(const Integer& p, const Integer& e) {
    Integer r = 1;
    for (Integer i = 0; i < e; ++i) r *= p;
    return r;
}

constexpr long kPrefixGuard = 20000;

// min(a n + b, t) over n >= 1 as prefix factors + constant tail exponent
struct ClippedRule {
    std::vector<Integer> prefix_exponents;  // where a n + b < t
    Integer tail;                           // t (or b when a == 0 and b <= t)
};

ClippedRule clip_rule(const Integer& a, const Integer& b, const Integer& t) {
    ClippedRule out;
    if (a == 0) {
        out.tail = b < t ? b : t;
        return out;
    }
    long guard = 0;
    for (Integer n = 1; a * n + b < t; ++n) {
        out.prefix_exponents.push_back(a * n + b);
        if (++guard > kPrefixGuard)
            throw std::invalid_argument("modulus too large: prefix expansion exceeds guard");
    }
    out.tail = t;
    return out;
}

}  // namespace

GroupExpr torsion_subgroup_at(const GroupExpr& e, const Integer& d) {
    if (d < 1) throw std::invalid_argument("torsion_subgroup_at: d must be >= 1");
    GroupExpr out = expr_trivial();
    // f.g. part: free coordinates die, Z/m contributes Z/gcd(m, d)
    {
        std::vector<Integer> fac;
        for (const Integer& m : e.fg.torsion) fac.push_back(gcd(m, d));
        out = expr_sum(out, expr_from_fg(fg_of_factor_list(fac)));
    }
    for (const ExprAtom& at : e.atoms) {
        switch (at.kind) {
            case ExprAtom::Kind::Prufer: {
                long t = valuation(d, at.p);
                if (t > 0) {
                    std::vector<Integer> fac(at.count, pow_int(at.p, t));
                    out = expr_sum(out, expr_from_fg(fg_of_factor_list(fac)));
                }
                break;
            }
            case ExprAtom::Kind::InfSum: {
                Integer t = valuation(d, at.p);
                if (t == 0) break;
                ClippedRule cl = clip_rule(at.a, at.b, t);
                std::vector<Integer> fac;
                for (const Integer& ex : cl.prefix_exponents)
                    for (int c = 0; c < at.count; ++c) fac.push_back(pow_int(at.p, ex));
                out = expr_sum(out, expr_from_fg(fg_of_factor_list(fac)));
                out = expr_sum(out, expr_inf_sum(at.p, 0, cl.tail));
                break;
            }
            case ExprAtom::Kind::InfFree:
            case ExprAtom::Kind::PadicFree:
            case ExprAtom::Kind::PadicInfFree:
                break;  // torsionfree
            case ExprAtom::Kind::InfProduct: {
                std::vector<Integer> fac;
                for (const Integer& m : at.base.torsion) fac.push_back(gcd(m, d));
                FgGroup bd = fg_of_factor_list(fac);
                if (!bd.is_trivial()) out = expr_sum(out, expr_inf_product(bd));
                break;
            }
            case ExprAtom::Kind::PadicInfSum: {
                // completion torsion: product of the clipped coordinates
                Integer t = valuation(d, at.p);
                if (t == 0) break;
                ClippedRule cl = clip_rule(at.a, at.b, t);
                std::vector<Integer> fac;
                for (const Integer& ex : cl.prefix_exponents)
                    for (int c = 0; c < at.count; ++c) fac.push_back(pow_int(at.p, ex));
                out = expr_sum(out, expr_from_fg(fg_of_factor_list(fac)));
                std::vector<Integer> tails(at.count, pow_int(at.p, cl.tail));
                out = expr_sum(out, expr_inf_product(fg_of_factor_list(tails)));
                break;
            }
        }
    }
    return out;
}

GroupExpr quotient_by(const GroupExpr& e, const Integer& n) {
    if (n < 1) throw std::invalid_argument("quotient_by: n must be >= 1");
    GroupExpr out = expr_trivial();
    {
        std::vector<Integer> fac;
        for (const Integer& m : e.fg.torsion) fac.push_back(gcd(m, n));
        for (int r = 0; r < e.fg.rank; ++r) fac.push_back(n);
        out = expr_sum(out, expr_from_fg(fg_of_factor_list(fac)));
    }
    for (const ExprAtom& at : e.atoms) {
        switch (at.kind) {
            case ExprAtom::Kind::Prufer:
                break;  // divisible
            case ExprAtom::Kind::InfSum: {
                Integer t = valuation(n, at.p);
                if (t == 0) break;
                ClippedRule cl = clip_rule(at.a, at.b, t);
                std::vector<Integer> fac;
                for (const Integer& ex : cl.prefix_exponents)
                    for (int c = 0; c < at.count; ++c) fac.push_back(pow_int(at.p, ex));
                out = expr_sum(out, expr_from_fg(fg_of_factor_list(fac)));
                out = expr_sum(out, expr_inf_sum(at.p, 0, cl.tail));
                break;
            }
            case ExprAtom::Kind::InfFree:
                // countable sum of Z/n, split by CRT into constant p-sums
                for (const auto& [p, ex] : factor_modulus(n))
                    out = expr_sum(out, expr_inf_sum(p, 0, ex));
                break;
            case ExprAtom::Kind::InfProduct: {
                std::vector<Integer> fac;
                for (const Integer& m : at.base.torsion) fac.push_back(gcd(m, n));
                FgGroup bq = fg_of_factor_list(fac);
                if (!bq.is_trivial()) out = expr_sum(out, expr_inf_product(bq));
                break;
            }
            case ExprAtom::Kind::PadicFree: {
                Integer t = valuation(n, at.p);
                if (t == 0) break;  // p-adic module: coprime action invertible
                std::vector<Integer> fac(at.count, pow_int(at.p, t));
                out = expr_sum(out, expr_from_fg(fg_of_factor_list(fac)));
                break;
            }
            case ExprAtom::Kind::PadicInfFree: {
                Integer t = valuation(n, at.p);
                if (t == 0) break;
                out = expr_sum(out, expr_inf_sum(at.p, 0, t));
                break;
            }
            case ExprAtom::Kind::PadicInfSum: {
                // completion preserves mod-p^t quotients of the base
                Integer t = valuation(n, at.p);
                if (t == 0) break;
                ClippedRule cl = clip_rule(at.a, at.b, t);
                std::vector<Integer> fac;
                for (const Integer& ex : cl.prefix_exponents)
                    for (int c = 0; c < at.count; ++c) fac.push_back(pow_int(at.p, ex));
                out = expr_sum(out, expr_from_fg(fg_of_factor_list(fac)));
                out = expr_sum(out, expr_inf_sum(at.p, 0, cl.tail));
                break;
            }
        }
    }
    return out;
}

GroupExpr hom_from_fg(const FgGroup& g, const GroupExpr& h) {
    GroupExpr out = expr_trivial();
    for (int r = 0; r < g.rank; ++r) out = expr_sum(out, h);
    for (const Integer& d : g.torsion) out = expr_sum(out, torsion_subgroup_at(h, d));
    return out;
}

GroupExpr ext_from_fg(const FgGroup& g, const GroupExpr& h) {
    GroupExpr out = expr_trivial();
    for (const Integer& d : g.torsion) out = expr_sum(out, quotient_by(h, d));
    return out;
}

IsoVerdict iso_check(const GroupExpr& x, const GroupExpr& y) {
    if (x == y) return IsoVerdict::Equal;
    // complete classification for purely finitely generated values
    if (x.atoms.empty() && y.atoms.empty()) return IsoVerdict::Distinct;
    InvariantProfile a = invariants(x), b = invariants(y);
    if (!(a.cardinality == b.cardinality)) return IsoVerdict::Distinct;
    if (!(a.exponent == b.exponent)) return IsoVerdict::Distinct;
    if (a.divisible != b.divisible) return IsoVerdict::Distinct;
    if (a.torsionfree != b.torsionfree) return IsoVerdict::Distinct;
    auto definite_differ = [](TriBool s, TriBool t) {
        return (s == TriBool::Yes && t == TriBool::No) || (s == TriBool::No && t == TriBool::Yes);
    };
    if (definite_differ(a.reduced, b.reduced)) return IsoVerdict::Distinct;
    if (definite_differ(a.sum_of_cyclics, b.sum_of_cyclics)) return IsoVerdict::Distinct;
    if (definite_differ(a.algebraically_compact, b.algebraically_compact))
        return IsoVerdict::Distinct;
    return IsoVerdict::Undecided;
}

std::string tribool_str(TriBool t) {
    switch (t) {
        case TriBool::No: return "no";
        case TriBool::Yes: return "yes";
        default: return "unknown";
    }
}

std::string iso_verdict_str(IsoVerdict v) {
    switch (v) {
        case IsoVerdict::Equal: return "Equal";
        case IsoVerdict::Distinct: return "Distinct";
        default: return "Undecided";
    }
}

// ------------------------------------------------------------------ printing

namespace {

std::string rule_str(const Integer& a, const Integer& b) {
    std::ostringstream os;
    if (a == 0) {
        os << b;
        return os.str();
    }
    if (a == 1)
        os << "n";
    else
        os << a << "*n";
    if (b > 0) os << "+" << b;
    if (b < 0) os << "-" << -b;
    return os.str();
}

void append_fg_parts(const FgGroup& g, std::vector<std::string>& parts) {
    if (g.rank == 1) parts.push_back("Z");
    if (g.rank > 1) parts.push_back("Z^" + std::to_string(g.rank));
    for (const Integer& d : g.torsion) {
        std::ostringstream os;
        os << "Z/" << d;
        parts.push_back(os.str());
    }
}

std::string fg_expr_str(const FgGroup& g) {
    std::vector<std::string> parts;
    append_fg_parts(g, parts);
    if (parts.empty()) return "0";
    if (parts.size() == 1) return parts[0];
    std::string s = "Sum(";
    for (size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
    return s + ")";
}

std::string atom_str(const ExprAtom& at) {
    std::ostringstream os;
    switch (at.kind) {
        case ExprAtom::Kind::Prufer:
            os << "Prufer(" << at.p << ")";
            break;
        case ExprAtom::Kind::InfSum:
            os << "InfSum(" << at.p << "; " << rule_str(at.a, at.b) << ")";
            break;
        case ExprAtom::Kind::InfFree:
            os << "InfSum(Z)";
            break;
        case ExprAtom::Kind::InfProduct:
            os << "InfProduct(" << fg_expr_str(at.base) << ")";
            break;
        case ExprAtom::Kind::PadicFree:
            os << "Padic(" << at.p << "; Z)";
            break;
        case ExprAtom::Kind::PadicInfFree:
            os << "Padic(" << at.p << "; InfSum(Z))";
            break;
        case ExprAtom::Kind::PadicInfSum:
            os << "Padic(" << at.p << "; InfSum(" << at.p << "; " << rule_str(at.a, at.b) << "))";
            break;
    }
    return os.str();
}

}  // namespace

std::string GroupExpr::str() const {
    std::vector<std::string> parts;
    append_fg_parts(fg, parts);
    for (const ExprAtom& at : atoms) {
        if (at.kind == ExprAtom::Kind::PadicFree && at.count > 1) {
            // completion of Z^count prints with its rank
            std::ostringstream os;
            os << "Padic(" << at.p << "; Z^" << at.count << ")";
            parts.push_back(os.str());
            continue;
        }
        for (int c = 0; c < at.count; ++c) parts.push_back(atom_str(at));
    }
    if (parts.empty()) return "0";
    if (parts.size() == 1) return parts[0];
    std::string s = "Sum(";
    for (size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
    return s + ")";
}

// ------------------------------------------------------------------- parsing

namespace {

struct Parser {
    const std::string& s;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument(what + " at position " + std::to_string(pos) +
                                    " in group expression");
    }
    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool peek_is(char c) {
        skip_ws();
        return pos < s.size() && s[pos] == c;
    }
    void expect(char c) {
        skip_ws();
        if (pos >= s.size() || s[pos] != c) fail(std::string("expected '") + c + "'");
        ++pos;
    }
    bool try_word(const char* w) {
        skip_ws();
        size_t l = std::string(w).size();
        if (s.compare(pos, l, w) == 0) {
            pos += l;
            return true;
        }
        return false;
    }
    Integer number() {
        skip_ws();
        bool neg = false;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
            neg = (s[pos] == '-');
            ++pos;
        }
        if (pos >= s.size() || !isdigit(static_cast<unsigned char>(s[pos]))) fail("expected a number");
        Integer v = 0;
        while (pos < s.size() && isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + (s[pos] - '0');
            ++pos;
        }
        return neg ? -v : v;
    }

    // a*n+b | n+b | n-b | n | b
    std::pair<Integer, Integer> exponent_rule() {
        skip_ws();
        Integer a = 0, b = 0;
        if (try_word("n")) {
            a = 1;
        } else {
            Integer v = number();
            skip_ws();
            if (pos < s.size() && s[pos] == '*') {
                ++pos;
                if (!try_word("n")) fail("expected 'n' after '*'");
                a = v;
            } else {
                return {0, v};
            }
        }
        skip_ws();
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
            bool neg = (s[pos] == '-');
            ++pos;
            Integer v = number();
            b = neg ? -v : v;
        }
        return {a, b};
    }

    GroupExpr term() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of input");
        if (s[pos] == '0' && (pos + 1 >= s.size() || !isdigit(static_cast<unsigned char>(s[pos + 1])))) {
            ++pos;
            return expr_trivial();
        }
        if (try_word("Prufer")) {
            expect('(');
            Integer p = number();
            expect(')');
            if (!is_prime(p)) fail("Prufer needs a prime");
            return expr_prufer(p);
        }
        if (try_word("Sum")) {
            expect('(');
            GroupExpr acc = parse_inner();
            while (peek_is(',')) {
                expect(',');
                acc = expr_sum(acc, parse_inner());
            }
            expect(')');
            return acc;
        }
        if (try_word("InfSum")) {
            expect('(');
            skip_ws();
            if (try_word("Z")) {
                expect(')');
                return expr_inf_free();
            }
            Integer p = number();
            if (!is_prime(p)) fail("InfSum needs a prime");
            expect(';');
            auto [a, b] = exponent_rule();
            expect(')');
            if (a < 0) fail("InfSum slope must be >= 0");
            if (a + b < 1) fail("InfSum first exponent must be >= 1");
            return expr_inf_sum(p, a, b);
        }
        if (try_word("InfProduct")) {
            expect('(');
            GroupExpr base = parse_inner();
            expect(')');
            auto fgb = base.as_fg();
            if (!fgb || !fgb->is_finite()) fail("InfProduct base must be a finite group");
            return expr_inf_product(*fgb);
        }
        if (try_word("Padic")) {
            expect('(');
            Integer p = number();
            if (!is_prime(p)) fail("Padic needs a prime");
            expect(';');
            GroupExpr base = parse_inner();
            expect(')');
            return expr_padic(p, base);
        }
        if (try_word("Z")) {
            skip_ws();
            if (pos < s.size() && s[pos] == '^') {
                ++pos;
                Integer r = number();
                if (r < 0) fail("rank must be >= 0");
                if (r > 64) fail("rank too large");
                return expr_free(static_cast<int>(r));
            }
            if (pos < s.size() && s[pos] == '/') {
                ++pos;
                Integer d = number();
                if (d < 1) fail("modulus must be >= 1");
                return expr_cyclic(d);
            }
            return expr_free(1);
        }
        fail("expected a group expression");
    }

    GroupExpr parse_inner() { return term(); }

    GroupExpr parse_all() {
        GroupExpr e = term();
        skip_ws();
        if (pos != s.size()) fail("trailing input");
        return e;
    }
};

}  // namespace

GroupExpr parse_group_expr(const std::string& text) {
    Parser p{text};
    return p.parse_all();
}

}  // namespace kkf
