#pragma once

#include "kkfilt/fg_group.hpp"
#include "kkfilt/lattice.hpp"

namespace kkf {

// Subgroup of an FgGroup, stored as the sublattice of Z^gens spanned by the
// generators together with the ambient relation lattice. Canonical HNF basis
// makes equality and containment plain comparisons.
class Subgroup {
public:
    Subgroup(FgGroup ambient, Lattice lattice)
        : ambient_(std::move(ambient)), lattice_(std::move(lattice)) {}

    static Subgroup zero(const FgGroup& g);
    static Subgroup full(const FgGroup& g);
    static Subgroup generated_by(const FgGroup& g, const std::vector<std::vector<Integer>>& elems);
    static Subgroup multiples(const FgGroup& g, const Integer& n);  // n*G

    const FgGroup& ambient() const { return ambient_; }
    const Lattice& lattice() const { return lattice_; }

    bool contains(const std::vector<Integer>& elem) const;
    bool contains(const Subgroup& o) const;
    Subgroup sum(const Subgroup& o) const;
    Subgroup intersect(const Subgroup& o) const;
    Subgroup scaled(const Integer& n) const;  // n * S inside the ambient

    bool operator==(const Subgroup& o) const;
    bool operator!=(const Subgroup& o) const { return !(*this == o); }
    bool is_zero() const;
    bool is_full() const;

    // |S| as an abstract group (0 when infinite).
    Integer order() const;

    // S as an FgGroup plus the inclusion S -> ambient.
    std::pair<FgGroup, FgHom> as_group() const;

    // ambient/S plus the projection ambient -> quotient.
    std::pair<FgGroup, FgHom> quotient() const;

private:
    FgGroup ambient_;
    Lattice lattice_;
};

Lattice relation_lattice(const FgGroup& g);

Subgroup image_subgroup(const FgHom& f);
Subgroup kernel_subgroup(const FgHom& f);
Subgroup preimage_subgroup(const FgHom& f, const Subgroup& of_target);

bool is_injective(const FgHom& f);
bool is_surjective(const FgHom& f);

}  // namespace kkf
