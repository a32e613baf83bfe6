#include "eqmorse/rational_matrix.hpp"

#include <stdexcept>

namespace eqmorse {

std::string format_rational(const Rational& q) {
  return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  // cpp_int reads an empty string as zero.
  if (text.empty() || slash == 0 || (slash != std::string::npos && slash + 1 == text.size()))
    throw std::invalid_argument("not a rational: '" + text + "'");
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(BigInt(text.substr(0, slash)), den);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a rational: '" + text + "'");
  }
}

RationalMatrix::RationalMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

bool RationalMatrix::is_zero() const {
  for (const auto& v : data_)
    if (v != 0) return false;
  return true;
}

std::size_t RationalMatrix::nonzeros() const {
  std::size_t n = 0;
  for (const auto& v : data_)
    if (v != 0) ++n;
  return n;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product: shape mismatch");
  RationalMatrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Rational& x = a(i, k);
      if (x == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j)
        if (b(k, j) != 0) c(i, j) += x * b(k, j);
    }
  return c;
}

bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

std::size_t rank(const RationalMatrix& m) {
  const std::size_t R = m.rows(), C = m.cols();
  if (R == 0 || C == 0) return 0;
  std::vector<std::vector<BigInt>> a(R, std::vector<BigInt>(C));
  for (std::size_t i = 0; i < R; ++i) {
    BigInt l = 1;
    for (std::size_t j = 0; j < C; ++j)
      l = boost::multiprecision::lcm(l, BigInt(boost::multiprecision::denominator(m(i, j))));
    for (std::size_t j = 0; j < C; ++j) {
      const Rational v = m(i, j) * l;
      a[i][j] = boost::multiprecision::numerator(v);
    }
  }
  BigInt prev = 1;
  std::size_t r = 0;
  for (std::size_t col = 0; col < C && r < R; ++col) {
    std::size_t p = r;
    while (p < R && a[p][col] == 0) ++p;
    if (p == R) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = r + 1; i < R; ++i) {
      for (std::size_t j = col + 1; j < C; ++j) a[i][j] = (a[r][col] * a[i][j] - a[i][col] * a[r][j]) / prev;
      a[i][col] = 0;
    }
    prev = a[r][col];
    ++r;
  }
  return r;
}

RationalMatrix rref(const RationalMatrix& m, std::vector<std::size_t>* pivots) {
  RationalMatrix a = m;
  const std::size_t R = a.rows(), C = a.cols();
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t col = 0; col < C && r < R; ++col) {
    std::size_t p = r;
    while (p < R && a(p, col) == 0) ++p;
    if (p == R) continue;
    if (p != r)
      for (std::size_t j = 0; j < C; ++j) std::swap(a(p, j), a(r, j));
    const Rational inv = 1 / a(r, col);
    for (std::size_t j = col; j < C; ++j) a(r, j) *= inv;
    for (std::size_t i = 0; i < R; ++i) {
      if (i == r || a(i, col) == 0) continue;
      const Rational f = a(i, col);
      for (std::size_t j = col; j < C; ++j) a(i, j) -= f * a(r, j);
    }
    piv.push_back(col);
    ++r;
  }
  if (pivots) *pivots = piv;
  return a;
}

std::vector<std::vector<Rational>> nullspace(const RationalMatrix& m) {
  std::vector<std::size_t> piv;
  const RationalMatrix e = rref(m, &piv);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : piv) is_pivot[c] = true;
  std::vector<std::vector<Rational>> out;
  for (std::size_t f = 0; f < m.cols(); ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(m.cols());
    v[f] = 1;
    for (std::size_t i = 0; i < piv.size(); ++i) v[piv[i]] = -e(i, f);
    out.push_back(std::move(v));
  }
  return out;
}

RationalMatrix from_columns(const std::vector<std::vector<Rational>>& cols, std::size_t rows) {
  RationalMatrix m(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != rows) throw std::invalid_argument("column length mismatch");
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
  }
  return m;
}

}  // namespace eqmorse
