#include "kkfilt/lattice.hpp"

#include "kkfilt/smith.hpp"

namespace kkf {

IntMatrix row_hnf(const IntMatrix& rows) {
    IntMatrix a = rows;
    int r = a.rows(), c = a.cols();
    int row = 0;
    for (int col = 0; col < c && row < r; ++col) {
        // gcd out column `col` below `row`
        for (;;) {
            int piv = -1;
            Integer best = 0;
            for (int i = row; i < r; ++i) {
                if (a.at(i, col) == 0) continue;
                Integer v = abs(a.at(i, col));
                if (piv < 0 || v < best) {
                    best = v;
                    piv = i;
                }
            }
            if (piv < 0) break;
            a.swap_rows(row, piv);
            bool clean = true;
            for (int i = row + 1; i < r; ++i) {
                if (a.at(i, col) == 0) continue;
                Integer q = a.at(i, col) / a.at(row, col);
                a.add_row_multiple(i, row, -q);
                if (a.at(i, col) != 0) clean = false;
            }
            if (clean) break;
        }
        if (a.at(row, col) == 0) continue;
        if (a.at(row, col) < 0) a.negate_row(row);
        // reduce entries above the pivot into [0, pivot)
        for (int i = 0; i < row; ++i) {
            Integer q = a.at(i, col) / a.at(row, col);
            if (a.at(i, col) % a.at(row, col) < 0) q -= 1;
            a.add_row_multiple(i, row, -q);
        }
        ++row;
    }
    return a.submatrix(0, 0, row, c);
}

Lattice Lattice::from_rows(const IntMatrix& rows) {
    Lattice l(rows.cols());
    l.basis_ = row_hnf(rows);
    return l;
}

bool Lattice::contains(const std::vector<Integer>& v) const {
    if (static_cast<int>(v.size()) != dim_) throw std::invalid_argument("lattice dim mismatch");
    std::vector<Integer> x = v;
    int row = 0;
    for (int col = 0; col < dim_ && row < basis_.rows(); ++col) {
        if (basis_.at(row, col) == 0) continue;  // pivot not in this column
        // basis_ pivots advance left to right, one per row
        if (x[col] % basis_.at(row, col) != 0) return false;
        Integer q = x[col] / basis_.at(row, col);
        if (q != 0)
            for (int j = col; j < dim_; ++j) x[j] -= q * basis_.at(row, j);
        ++row;
    }
    for (const auto& c : x)
        if (c != 0) return false;
    return true;
}

bool Lattice::contains(const Lattice& o) const {
    for (int i = 0; i < o.basis_.rows(); ++i)
        if (!contains(o.basis_.row(i))) return false;
    return true;
}

Lattice Lattice::sum(const Lattice& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("lattice dim mismatch");
    return from_rows(basis_.vstack(o.basis_));
}

Lattice Lattice::intersect(const Lattice& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("lattice dim mismatch");
    if (basis_.rows() == 0 || o.basis_.rows() == 0) return Lattice(dim_);
    // (x,y) with x A = y B  <=>  (x, -y) in left-kernel of [A; B]
    IntMatrix stacked = basis_.vstack(o.basis_);
    IntMatrix k = integer_kernel(stacked.transposed());  // columns (x, -y)
    IntMatrix rows(k.cols(), dim_);
    for (int c = 0; c < k.cols(); ++c)
        for (int j = 0; j < dim_; ++j) {
            Integer s = 0;
            for (int i = 0; i < basis_.rows(); ++i) s += k.at(i, c) * basis_.at(i, j);
            rows.at(c, j) = s;
        }
    return from_rows(rows);
}

Lattice Lattice::scaled(const Integer& n) const {
    return from_rows(basis_ * n);
}

std::optional<std::vector<Integer>> solve_mod(const IntMatrix& a, const Lattice& mod,
                                              const std::vector<Integer>& b) {
    if (a.rows() != mod.dim() || static_cast<int>(b.size()) != a.rows())
        throw std::invalid_argument("solve_mod shape mismatch");
    IntMatrix aug = a.hstack(mod.basis().transposed());
    SmithResult sm = smith_normal_form(aug);
    std::vector<Integer> ub = sm.u.apply(b);
    int diag = std::min(aug.rows(), aug.cols());
    std::vector<Integer> w(aug.cols(), 0);
    for (int i = 0; i < aug.rows(); ++i) {
        Integer d = i < diag ? sm.s.at(i, i) : Integer(0);
        if (d == 0) {
            if (ub[i] != 0) return std::nullopt;
        } else {
            if (ub[i] % d != 0) return std::nullopt;
            w[i] = ub[i] / d;
        }
    }
    std::vector<Integer> z = sm.v.apply(w);
    return std::vector<Integer>(z.begin(), z.begin() + a.cols());
}

Lattice preimage_lattice(const IntMatrix& a, const Lattice& mod) {
    if (a.rows() != mod.dim()) throw std::invalid_argument("preimage shape mismatch");
    // x with a x = M y for some y: kernel of [a | -M^T] projected onto x
    IntMatrix mt = mod.basis().transposed();
    IntMatrix aug = a.hstack(mt * Integer(-1));
    IntMatrix k = integer_kernel(aug);
    IntMatrix rows(k.cols(), a.cols());
    for (int c = 0; c < k.cols(); ++c)
        for (int j = 0; j < a.cols(); ++j) rows.at(c, j) = k.at(j, c);
    return Lattice::from_rows(rows);
}

}  // namespace kkf
