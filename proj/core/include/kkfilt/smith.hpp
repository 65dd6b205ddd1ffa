#pragma once

#include "kkfilt/int_matrix.hpp"

namespace kkf {

// u * input * v = s, with u, v unimodular and s diagonal, nonnegative,
// s[0][0] | s[1][1] | ... (nonzero entries first, then zeros).
// u_inv and v_inv are tracked alongside so callers get exact inverses for free.
struct SmithResult {
    IntMatrix s, u, v, u_inv, v_inv;
    std::vector<Integer> diagonal() const;
};

// Deterministic: pivot is the smallest nonzero |entry| of the remaining
// submatrix, ties broken row-major. That pins u and v for golden tests.
SmithResult smith_normal_form(const IntMatrix& m);

// Basis of { x : m x = 0 } as matrix columns (integer kernel).
IntMatrix integer_kernel(const IntMatrix& m);

}  // namespace kkf
