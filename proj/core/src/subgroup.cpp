#include "kkfilt/subgroup.hpp"

namespace kkf {

Lattice relation_lattice(const FgGroup& g) {
    IntMatrix rows(g.torsion_count(), g.gens());
    for (int t = 0; t < g.torsion_count(); ++t) rows.at(t, g.rank + t) = g.torsion[t];
    return Lattice::from_rows(rows);
}

Subgroup Subgroup::zero(const FgGroup& g) {
    return Subgroup(g, relation_lattice(g));
}

Subgroup Subgroup::full(const FgGroup& g) {
    return Subgroup(g, Lattice::full(g.gens()));
}

Subgroup Subgroup::generated_by(const FgGroup& g, const std::vector<std::vector<Integer>>& elems) {
    IntMatrix rows(static_cast<int>(elems.size()), g.gens());
    for (size_t i = 0; i < elems.size(); ++i) {
        if (static_cast<int>(elems[i].size()) != g.gens())
            throw std::invalid_argument("generator length mismatch");
        for (int j = 0; j < g.gens(); ++j) rows.at(static_cast<int>(i), j) = elems[i][j];
    }
    return Subgroup(g, Lattice::from_rows(rows).sum(relation_lattice(g)));
}

Subgroup Subgroup::multiples(const FgGroup& g, const Integer& n) {
    return Subgroup(g, Lattice::full(g.gens()).scaled(n).sum(relation_lattice(g)));
}

bool Subgroup::contains(const std::vector<Integer>& elem) const {
    return lattice_.contains(elem);
}

bool Subgroup::contains(const Subgroup& o) const {
    return lattice_.contains(o.lattice_);
}

Subgroup Subgroup::sum(const Subgroup& o) const {
    if (ambient_ != o.ambient_) throw std::invalid_argument("subgroup ambient mismatch");
    return Subgroup(ambient_, lattice_.sum(o.lattice_));
}

Subgroup Subgroup::intersect(const Subgroup& o) const {
    if (ambient_ != o.ambient_) throw std::invalid_argument("subgroup ambient mismatch");
    return Subgroup(ambient_, lattice_.intersect(o.lattice_));
}

Subgroup Subgroup::scaled(const Integer& n) const {
    return Subgroup(ambient_, lattice_.scaled(n).sum(relation_lattice(ambient_)));
}

bool Subgroup::operator==(const Subgroup& o) const {
    return ambient_ == o.ambient_ && lattice_ == o.lattice_;
}

bool Subgroup::is_zero() const {
    return *this == zero(ambient_);
}

bool Subgroup::is_full() const {
    return lattice_ == Lattice::full(ambient_.gens());
}

Integer Subgroup::order() const {
    return as_group().first.order();
}

std::pair<FgGroup, FgHom> Subgroup::as_group() const {
    // abstract group on the lattice basis rows b_i, relations x B in rel(G)
    const IntMatrix& b = lattice_.basis();
    Lattice rel = relation_lattice(ambient_);
    Lattice relcoords = preimage_lattice(b.transposed(), rel);  // x with B^T x in rel
    PresentedGroup p = cokernel(relcoords.basis().transposed(), b.rows());
    // inclusion: canonical generator -> from_canonical coords -> sum of basis rows
    IntMatrix inc(ambient_.gens(), p.group.gens());
    for (int l = 0; l < p.group.gens(); ++l) {
        std::vector<Integer> coeff = p.from_canonical.col(l);
        for (int j = 0; j < ambient_.gens(); ++j) {
            Integer s = 0;
            for (int i = 0; i < b.rows(); ++i) s += coeff[i] * b.at(i, j);
            inc.at(j, l) = s;
        }
    }
    return {p.group, FgHom(p.group, ambient_, std::move(inc))};
}

std::pair<FgGroup, FgHom> Subgroup::quotient() const {
    PresentedGroup p = cokernel(lattice_.basis().transposed(), ambient_.gens());
    return {p.group, FgHom(ambient_, p.group, p.to_canonical)};
}

Subgroup image_subgroup(const FgHom& f) {
    IntMatrix rows = f.m.transposed();
    return Subgroup(f.target, Lattice::from_rows(rows).sum(relation_lattice(f.target)));
}

Subgroup kernel_subgroup(const FgHom& f) {
    Lattice pre = preimage_lattice(f.m, relation_lattice(f.target));
    return Subgroup(f.source, pre.sum(relation_lattice(f.source)));
}

Subgroup preimage_subgroup(const FgHom& f, const Subgroup& of_target) {
    if (of_target.ambient() != f.target) throw std::invalid_argument("preimage ambient mismatch");
    Lattice pre = preimage_lattice(f.m, of_target.lattice());
    return Subgroup(f.source, pre.sum(relation_lattice(f.source)));
}

bool is_injective(const FgHom& f) {
    return kernel_subgroup(f).is_zero();
}

bool is_surjective(const FgHom& f) {
    return image_subgroup(f).is_full();
}

}  // namespace kkf
