#include "kkfilt/int_matrix.hpp"

#include <sstream>
#include <stdexcept>

namespace kkf {

long valuation(Integer n, const Integer& p) {
    if (n == 0) throw std::invalid_argument("valuation of zero");
    n = abs(n);
    long e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

IntMatrix IntMatrix::identity(int n) {
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<Integer>>& rows) {
    int r = static_cast<int>(rows.size());
    int c = r ? static_cast<int>(rows[0].size()) : 0;
    IntMatrix m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[i].size()) != c) throw std::invalid_argument("ragged rows");
        for (int j = 0; j < c; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
}

IntMatrix IntMatrix::from_rows(std::initializer_list<std::initializer_list<long>> rows) {
    std::vector<std::vector<Integer>> v;
    for (auto& r : rows) v.emplace_back(r.begin(), r.end());
    return from_rows(v);
}

IntMatrix IntMatrix::column(const std::vector<Integer>& v) {
    IntMatrix m(static_cast<int>(v.size()), 1);
    for (size_t i = 0; i < v.size(); ++i) m.at(static_cast<int>(i), 0) = v[i];
    return m;
}

IntMatrix IntMatrix::diagonal(const std::vector<Integer>& d) {
    int n = static_cast<int>(d.size());
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = d[i];
    return m;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matrix product shape mismatch");
    IntMatrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const Integer& a = at(i, k);
            if (a == 0) continue;
            for (int j = 0; j < o.cols_; ++j) r.at(i, j) += a * o.at(k, j);
        }
    return r;
}

IntMatrix IntMatrix::operator+(const IntMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix sum shape mismatch");
    IntMatrix r(rows_, cols_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] + o.e_[i];
    return r;
}

IntMatrix IntMatrix::operator-(const IntMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix diff shape mismatch");
    IntMatrix r(rows_, cols_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] - o.e_[i];
    return r;
}

IntMatrix IntMatrix::operator*(const Integer& c) const {
    IntMatrix r(rows_, cols_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] * c;
    return r;
}

IntMatrix IntMatrix::transposed() const {
    IntMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
}

bool IntMatrix::is_zero() const {
    for (const auto& x : e_)
        if (x != 0) return false;
    return true;
}

bool IntMatrix::is_identity() const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            if (at(i, j) != (i == j ? 1 : 0)) return false;
    return true;
}

std::vector<Integer> IntMatrix::row(int i) const {
    std::vector<Integer> v(cols_);
    for (int j = 0; j < cols_; ++j) v[j] = at(i, j);
    return v;
}

std::vector<Integer> IntMatrix::col(int j) const {
    std::vector<Integer> v(rows_);
    for (int i = 0; i < rows_; ++i) v[i] = at(i, j);
    return v;
}

std::vector<Integer> IntMatrix::apply(const std::vector<Integer>& x) const {
    if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("apply shape mismatch");
    std::vector<Integer> y(rows_);
    for (int i = 0; i < rows_; ++i) {
        Integer s = 0;
        for (int j = 0; j < cols_; ++j)
            if (at(i, j) != 0) s += at(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

IntMatrix IntMatrix::hstack(const IntMatrix& o) const {
    if (rows_ != o.rows_) throw std::invalid_argument("hstack shape mismatch");
    IntMatrix r(rows_, cols_ + o.cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
        for (int j = 0; j < o.cols_; ++j) r.at(i, cols_ + j) = o.at(i, j);
    }
    return r;
}

IntMatrix IntMatrix::vstack(const IntMatrix& o) const {
    if (cols_ != o.cols_) throw std::invalid_argument("vstack shape mismatch");
    IntMatrix r(rows_ + o.rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
    for (int i = 0; i < o.rows_; ++i)
        for (int j = 0; j < cols_; ++j) r.at(rows_ + i, j) = o.at(i, j);
    return r;
}

IntMatrix IntMatrix::submatrix(int r0, int c0, int nrows, int ncols) const {
    IntMatrix r(nrows, ncols);
    for (int i = 0; i < nrows; ++i)
        for (int j = 0; j < ncols; ++j) r.at(i, j) = at(r0 + i, c0 + j);
    return r;
}

void IntMatrix::swap_rows(int a, int b) {
    if (a == b) return;
    for (int j = 0; j < cols_; ++j) std::swap(at(a, j), at(b, j));
}

void IntMatrix::swap_cols(int a, int b) {
    if (a == b) return;
    for (int i = 0; i < rows_; ++i) std::swap(at(i, a), at(i, b));
}

void IntMatrix::add_row_multiple(int dst, int src, const Integer& c) {
    if (c == 0) return;
    for (int j = 0; j < cols_; ++j) at(dst, j) += c * at(src, j);
}

void IntMatrix::add_col_multiple(int dst, int src, const Integer& c) {
    if (c == 0) return;
    for (int i = 0; i < rows_; ++i) at(i, dst) += c * at(i, src);
}

void IntMatrix::negate_row(int i) {
    for (int j = 0; j < cols_; ++j) at(i, j) = -at(i, j);
}

void IntMatrix::negate_col(int j) {
    for (int i = 0; i < rows_; ++i) at(i, j) = -at(i, j);
}

// Bareiss fraction-free elimination; all divisions are exact.
Integer IntMatrix::determinant() const {
    if (rows_ != cols_) throw std::invalid_argument("determinant of non-square matrix");
    int n = rows_;
    if (n == 0) return 1;
    IntMatrix a = *this;
    Integer prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a.at(k, k) == 0) {
            int piv = -1;
            for (int i = k + 1; i < n; ++i)
                if (a.at(i, k) != 0) {
                    piv = i;
                    break;
                }
            if (piv < 0) return 0;
            a.swap_rows(k, piv);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                a.at(i, j) = (a.at(i, j) * a.at(k, k) - a.at(i, k) * a.at(k, j)) / prev;
        prev = a.at(k, k);
    }
    return sign > 0 ? a.at(n - 1, n - 1) : -a.at(n - 1, n - 1);
}

std::string IntMatrix::str() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < rows_; ++i) {
        os << (i ? ",[" : "[");
        for (int j = 0; j < cols_; ++j) os << (j ? "," : "") << at(i, j);
        os << "]";
    }
    os << "]";
    return os.str();
}

bool is_unimodular(const IntMatrix& m) {
    if (m.rows() != m.cols()) return false;
    Integer d = m.determinant();
    return d == 1 || d == -1;
}

}  // namespace kkf
