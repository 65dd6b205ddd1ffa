#pragma once

#include "kkfilt/int_matrix.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kkf {

// Raised when two independently computed answers disagree; callers treat it
// as a fatal internal diagnostic, never as a recoverable verdict.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Finitely generated abelian group in invariant-factor form:
// Z^rank + Z/d1 + ... + Z/dk  with  2 <= d1 | d2 | ... | dk.
// Elements are coordinate vectors of length rank + k, free coordinates first,
// then torsion coordinates in increasing invariant-factor order.
struct FgGroup {
    int rank = 0;
    std::vector<Integer> torsion;

    FgGroup() = default;
    FgGroup(int r, std::vector<Integer> t);

    static FgGroup trivial() { return FgGroup(); }
    static FgGroup free(int r) { return FgGroup(r, {}); }
    static FgGroup cyclic(const Integer& d);

    int gens() const { return rank + static_cast<int>(torsion.size()); }
    int torsion_count() const { return static_cast<int>(torsion.size()); }
    bool is_trivial() const { return rank == 0 && torsion.empty(); }
    bool is_finite() const { return rank == 0; }
    Integer order() const;     // 0 when infinite
    Integer exponent() const;  // 0 when unbounded (rank > 0), 1 for trivial

    // Order of generator i: 0 for free coordinates, d for torsion ones.
    Integer gen_order(int i) const;

    // Reduce torsion coordinates into [0, d); length must equal gens().
    std::vector<Integer> reduce(std::vector<Integer> x) const;
    bool is_zero_element(const std::vector<Integer>& x) const;

    // Enumerate all elements (finite groups only; guarded by `cap`).
    std::vector<std::vector<Integer>> elements(size_t cap = 1u << 22) const;

    bool operator==(const FgGroup& o) const { return rank == o.rank && torsion == o.torsion; }
    bool operator!=(const FgGroup& o) const { return !(*this == o); }

    std::string str() const;  // e.g. "Z^2 + Z/2 + Z/6"
};

// Canonical invariant factors of + Z/orders[i] (order 0 entries = Z summands
// are not allowed here; 1s are dropped). gcd/lcm normalization, no factoring.
std::vector<Integer> canonical_invariant_factors(std::vector<Integer> orders);

FgGroup direct_sum(const FgGroup& a, const FgGroup& b);

// Homomorphism between FgGroups as a matrix acting on coordinate columns:
// (target.gens() x source.gens()), torsion rows stored reduced mod the
// target invariant factor so equal maps compare equal.
struct FgHom {
    FgGroup source, target;
    IntMatrix m;

    FgHom() = default;
    FgHom(FgGroup src, FgGroup tgt, IntMatrix mat, bool check = true);

    static FgHom zero(const FgGroup& src, const FgGroup& tgt);
    static FgHom identity(const FgGroup& g);

    bool well_defined() const;
    std::vector<Integer> apply(const std::vector<Integer>& x) const;
    FgHom compose(const FgHom& inner) const;  // this o inner
    bool operator==(const FgHom& o) const;
    bool is_zero() const { return m.is_zero(); }

private:
    void reduce_rows();
};

// Cokernel data for Z^n / colspan(relations): the canonical group together
// with the coordinate changes in both directions.
//   to_canonical:   (group.gens() x n), presentation coords -> canonical coords
//   from_canonical: (n x group.gens()), canonical generator -> a preimage
struct PresentedGroup {
    FgGroup group;
    IntMatrix to_canonical;
    IntMatrix from_canonical;

    std::vector<Integer> canonical_of(const std::vector<Integer>& pres_coords) const;
};

PresentedGroup cokernel(const IntMatrix& relation_columns, int n_generators);

// Spec-facing wrapper: rows of `relations` are relations on n = cols generators.
FgGroup fg_from_presentation(const IntMatrix& relations);

}  // namespace kkf
