#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace eqmorse {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// "num/den", always with an explicit denominator.
std::string format_rational(const Rational& q);
Rational parse_rational(const std::string& text);

// Dense row-major matrix over the rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  bool is_zero() const;
  std::size_t nonzeros() const;
  RationalMatrix transpose() const;

  friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

// Rank by fraction-free (Bareiss) elimination after clearing row denominators.
std::size_t rank(const RationalMatrix& m);

// Reduced row echelon form; `pivots` receives the pivot columns.
RationalMatrix rref(const RationalMatrix& m, std::vector<std::size_t>* pivots = nullptr);

// Kernel basis from the reduced echelon form: one vector per free column,
// with a 1 in that column.
std::vector<std::vector<Rational>> nullspace(const RationalMatrix& m);

// Matrix whose columns are the given vectors (all of length `rows`).
RationalMatrix from_columns(const std::vector<std::vector<Rational>>& cols, std::size_t rows);

}  // namespace eqmorse
