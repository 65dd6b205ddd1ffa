#pragma once

#include "kkfilt/int_matrix.hpp"

#include <optional>

namespace kkf {

// Canonical row Hermite normal form: echelon rows, positive pivots, entries
// above each pivot reduced into [0, pivot). Zero rows dropped. Unique per
// row span, so lattice equality is matrix equality.
IntMatrix row_hnf(const IntMatrix& rows);

// Full-rank-or-not sublattice of Z^dim, stored canonically.
class Lattice {
public:
    explicit Lattice(int dim) : dim_(dim), basis_(0, dim) {}
    static Lattice from_rows(const IntMatrix& rows);  // dim = rows.cols()
    static Lattice full(int dim) { return from_rows(IntMatrix::identity(dim)); }

    int dim() const { return dim_; }
    int rank() const { return basis_.rows(); }
    const IntMatrix& basis() const { return basis_; }

    bool contains(const std::vector<Integer>& v) const;
    bool contains(const Lattice& o) const;
    Lattice sum(const Lattice& o) const;
    Lattice intersect(const Lattice& o) const;
    Lattice scaled(const Integer& n) const;  // n * L

    bool operator==(const Lattice& o) const { return dim_ == o.dim_ && basis_ == o.basis_; }
    bool operator!=(const Lattice& o) const { return !(*this == o); }

private:
    int dim_;
    IntMatrix basis_;
};

// One solution x of  a x = b (mod colspan of the lattice's basis rows viewed
// as target vectors), i.e. exists y with a x + basis^T y = b. nullopt if none.
std::optional<std::vector<Integer>> solve_mod(const IntMatrix& a, const Lattice& mod,
                                              const std::vector<Integer>& b);

// { x : a x in mod }, as a lattice in the source space.
Lattice preimage_lattice(const IntMatrix& a, const Lattice& mod);

}  // namespace kkf
