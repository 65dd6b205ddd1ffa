#pragma once

#include "kkfilt/fg_group.hpp"
#include "kkfilt/subgroup.hpp"

#include <functional>
#include <optional>

namespace kkf {

// Hom(source, target) with coordinates. Each piece is the cyclic (or free)
// block of maps src_gen -> coeff * tgt_gen; `order` 0 means a Z block.
// to/from_canonical translate between piece coefficients and the canonical
// invariant-factor coordinates of `group`.
struct HomGroup {
    FgGroup source, target;
    FgGroup group;
    struct Piece {
        int src_gen, tgt_gen;
        Integer order, coeff;
    };
    std::vector<Piece> pieces;
    IntMatrix to_canonical, from_canonical;

    FgHom hom_at(const std::vector<Integer>& coords) const;
    std::vector<Integer> coords_of(const FgHom& f) const;
    std::vector<FgHom> basis() const;  // homs for the canonical generators
};

HomGroup hom_group(const FgGroup& g, const FgGroup& h);

// Ext(source, target) via the standard two-term free resolution
// 0 -> Z^k -> Z^(r+k) -> source -> 0. Presentation coordinates are the
// entries of chi : Z^k -> target, flattened as (j, t) -> j * target.gens() + t.
struct ExtGroup {
    FgGroup source, target;
    FgGroup group;
    IntMatrix to_canonical, from_canonical;

    int k() const { return source.torsion_count(); }
    std::vector<Integer> coords_of_chi(const IntMatrix& chi) const;  // chi: target.gens() x k
    IntMatrix chi_at(const std::vector<Integer>& coords) const;
};

ExtGroup ext_group(const FgGroup& g, const FgGroup& h);

// Functorial actions. Contravariant maps restrict along f : g' -> g,
// covariant ones push along r : h -> h'.
FgHom hom_restrict(const HomGroup& of_g, const HomGroup& of_gprime, const FgHom& f);
FgHom hom_push(const HomGroup& of_h, const HomGroup& of_hprime, const FgHom& r);
FgHom ext_restrict(const ExtGroup& of_g, const ExtGroup& of_gprime, const FgHom& f);
FgHom ext_push(const ExtGroup& of_h, const ExtGroup& of_hprime, const FgHom& r);

// Spec-facing wrappers (construct the group data internally).
FgHom hom_induced(const FgHom& f, const FgGroup& h);                      // Hom(g,h) -> Hom(g',h)
FgHom ext_induced_contra(const FgHom& f, const FgGroup& h);               // Ext(g,h) -> Ext(g',h)
FgHom ext_induced_co(const FgGroup& g, const FgHom& r);                   // Ext(g,h) -> Ext(g,h')

// Direct sum with coordinates: presentation coords are the concatenated part
// coords; `group` is the canonical merge.
struct SumGroup {
    std::vector<FgGroup> parts;
    std::vector<int> offsets;  // start of each part in presentation coords
    int pres_dim = 0;
    FgGroup group;
    IntMatrix to_canonical, from_canonical;

    std::vector<Integer> embed(int part, const std::vector<Integer>& x) const;
    FgHom inclusion(int part) const;
    FgHom projection(int part) const;
};

SumGroup make_sum(const std::vector<FgGroup>& parts);

// Block map between sums; blocks[p][q] maps src part q to tgt part p
// (nullopt = zero block).
FgHom sum_hom(const SumGroup& src, const SumGroup& tgt,
              const std::vector<std::vector<std::optional<FgHom>>>& blocks);

// Short exact sequence 0 -> A -> B -> C -> 0 presented by its two maps.
struct ShortExactSequence {
    FgHom inc;   // A -> B
    FgHom proj;  // B -> C
};

// Validates exactness; returns the failing node name if not exact.
std::optional<std::string> validate_ses(const ShortExactSequence& s);

struct SixTermReport {
    FgGroup hom_a, hom_b, hom_c, ext_a, ext_b, ext_c;
    FgHom hom_inc, hom_proj, connecting, ext_inc, ext_proj;
    bool exact = false;
    std::string failure;  // first failing node when not exact
};

// 0 -> Hom(g,A) -> Hom(g,B) -> Hom(g,C) -> Ext(g,A) -> Ext(g,B) -> Ext(g,C) -> 0
SixTermReport six_term_check(const ShortExactSequence& s, const FgGroup& g);

struct PurityReport {
    bool pure = false;
    Integer failing_n;  // 0 when pure up to n_max
    std::vector<std::pair<Integer, bool>> checked;
};

// H = im(inc) is pure in B iff H meet n*B = n*H for all n; checked for
// n = 1..n_max exactly.
PurityReport purity_check(const ShortExactSequence& s, const Integer& n_max);

}  // namespace kkf
