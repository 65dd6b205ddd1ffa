#include "kkfilt/smith.hpp"

namespace kkf {

std::vector<Integer> SmithResult::diagonal() const {
    int n = std::min(s.rows(), s.cols());
    std::vector<Integer> d(n);
    for (int i = 0; i < n; ++i) d[i] = s.at(i, i);
    return d;
}

namespace {

// Row op helpers keeping u * m0 * v = s and the inverses in sync.
struct Work {
    IntMatrix s, u, uinv, v, vinv;

    void swap_rows(int a, int b) {
        s.swap_rows(a, b);
        u.swap_rows(a, b);
        uinv.swap_cols(a, b);
    }
    void swap_cols(int a, int b) {
        s.swap_cols(a, b);
        v.swap_cols(a, b);
        vinv.swap_rows(a, b);
    }
    void add_row(int dst, int src, const Integer& c) {  // row dst += c * row src
        s.add_row_multiple(dst, src, c);
        u.add_row_multiple(dst, src, c);
        uinv.add_col_multiple(src, dst, -c);
    }
    void add_col(int dst, int src, const Integer& c) {
        s.add_col_multiple(dst, src, c);
        v.add_col_multiple(dst, src, c);
        vinv.add_row_multiple(src, dst, -c);
    }
    void negate_row(int i) {
        s.negate_row(i);
        u.negate_row(i);
        uinv.negate_col(i);
    }
};

// Smallest |nonzero| in s[t.., t..], ties row-major; {-1,-1} if none.
std::pair<int, int> find_pivot(const IntMatrix& s, int t) {
    int bi = -1, bj = -1;
    Integer best = 0;
    for (int i = t; i < s.rows(); ++i)
        for (int j = t; j < s.cols(); ++j) {
            const Integer& x = s.at(i, j);
            if (x == 0) continue;
            Integer a = abs(x);
            if (bi < 0 || a < best) {
                best = a;
                bi = i;
                bj = j;
            }
        }
    return {bi, bj};
}

}  // namespace

SmithResult smith_normal_form(const IntMatrix& m) {
    Work w{m, IntMatrix::identity(m.rows()), IntMatrix::identity(m.rows()),
           IntMatrix::identity(m.cols()), IntMatrix::identity(m.cols())};
    int n = std::min(m.rows(), m.cols());
    for (int t = 0; t < n; ++t) {
        for (;;) {
            auto [pi, pj] = find_pivot(w.s, t);
            if (pi < 0) {
                t = n;  // remaining block is zero; done
                break;
            }
            w.swap_rows(t, pi);
            w.swap_cols(t, pj);
            bool dirty = false;
            for (int i = t + 1; i < w.s.rows(); ++i) {
                if (w.s.at(i, t) == 0) continue;
                Integer q = w.s.at(i, t) / w.s.at(t, t);
                w.add_row(i, t, -q);
                if (w.s.at(i, t) != 0) dirty = true;  // remainder left; smaller pivot exists
            }
            for (int j = t + 1; j < w.s.cols(); ++j) {
                if (w.s.at(t, j) == 0) continue;
                Integer q = w.s.at(t, j) / w.s.at(t, t);
                w.add_col(j, t, -q);
                if (w.s.at(t, j) != 0) dirty = true;
            }
            if (dirty) continue;
            // divisibility fix: pivot must divide everything that remains
            bool fixed = true;
            for (int i = t + 1; fixed && i < w.s.rows(); ++i)
                for (int j = t + 1; j < w.s.cols(); ++j)
                    if (w.s.at(i, j) % w.s.at(t, t) != 0) {
                        w.add_row(t, i, 1);
                        fixed = false;
                        break;
                    }
            if (fixed) break;
        }
        if (t >= n) break;
        if (w.s.at(t, t) < 0) w.negate_row(t);
    }
    return SmithResult{w.s, w.u, w.v, w.uinv, w.vinv};
}

IntMatrix integer_kernel(const IntMatrix& m) {
    SmithResult sm = smith_normal_form(m);
    int n = std::min(m.rows(), m.cols());
    std::vector<int> zero_cols;
    for (int j = 0; j < m.cols(); ++j)
        if (j >= n || sm.s.at(j, j) == 0) zero_cols.push_back(j);
    IntMatrix k(m.cols(), static_cast<int>(zero_cols.size()));
    for (size_t c = 0; c < zero_cols.size(); ++c)
        for (int i = 0; i < m.cols(); ++i) k.at(i, static_cast<int>(c)) = sm.v.at(i, zero_cols[c]);
    return k;
}

}  // namespace kkf
