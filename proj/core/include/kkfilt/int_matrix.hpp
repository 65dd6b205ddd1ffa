#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <initializer_list>
#include <string>
#include <vector>

namespace kkf {

using Integer = boost::multiprecision::cpp_int;

using boost::multiprecision::abs;
using boost::multiprecision::gcd;
using boost::multiprecision::lcm;

// p-adic valuation of n (n != 0); returns the largest e with p^e | n.
long valuation(Integer n, const Integer& p);

// Dense matrix over Z, row-major. Small sizes, exact arithmetic throughout.
class IntMatrix {
public:
    IntMatrix() : rows_(0), cols_(0) {}
    IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols) {}

    static IntMatrix identity(int n);
    static IntMatrix from_rows(const std::vector<std::vector<Integer>>& rows);
    static IntMatrix from_rows(std::initializer_list<std::initializer_list<long>> rows);
    static IntMatrix column(const std::vector<Integer>& v);
    static IntMatrix diagonal(const std::vector<Integer>& d);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Integer& at(int i, int j) { return e_[static_cast<size_t>(i) * cols_ + j]; }
    const Integer& at(int i, int j) const { return e_[static_cast<size_t>(i) * cols_ + j]; }

    bool operator==(const IntMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_; }
    bool operator!=(const IntMatrix& o) const { return !(*this == o); }

    IntMatrix operator*(const IntMatrix& o) const;
    IntMatrix operator+(const IntMatrix& o) const;
    IntMatrix operator-(const IntMatrix& o) const;
    IntMatrix operator*(const Integer& c) const;

    IntMatrix transposed() const;
    bool is_zero() const;
    bool is_identity() const;

    std::vector<Integer> row(int i) const;
    std::vector<Integer> col(int j) const;
    std::vector<Integer> apply(const std::vector<Integer>& x) const;  // this * x

    // Stack o to the right / below; dimensions must agree.
    IntMatrix hstack(const IntMatrix& o) const;
    IntMatrix vstack(const IntMatrix& o) const;
    IntMatrix submatrix(int r0, int c0, int nrows, int ncols) const;

    void swap_rows(int a, int b);
    void swap_cols(int a, int b);
    void add_row_multiple(int dst, int src, const Integer& c);  // row[dst] += c*row[src]
    void add_col_multiple(int dst, int src, const Integer& c);
    void negate_row(int i);
    void negate_col(int j);

    // Exact determinant (fraction-free Bareiss); square matrices only.
    Integer determinant() const;

    std::string str() const;  // compact [[..],[..]] form for diagnostics

private:
    int rows_, cols_;
    std::vector<Integer> e_;
};

bool is_unimodular(const IntMatrix& m);

}  // namespace kkf
