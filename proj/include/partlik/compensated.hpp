#ifndef PARTLIK_COMPENSATED_HPP
#define PARTLIK_COMPENSATED_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace partlik {

// Double-double scalar (Dekker/Knuth error-free transformations). Masked
// statistics on the wire can exceed the data-scale values they hide by ten
// or more orders of magnitude; carrying (hi, lo) pairs keeps the additive
// masks exactly removable instead of burning most of the mantissa on them.
struct Dd {
  double hi = 0.0;
  double lo = 0.0;

  Dd() = default;
  Dd(double h) : hi(h), lo(0.0) {}  // NOLINT: implicit by design
  Dd(double h, double l) : hi(h), lo(l) {}

  double value() const { return hi + lo; }
};

namespace detail {
inline Dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline Dd quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline Dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}
}  // namespace detail

inline Dd operator+(Dd a, Dd b) {
  Dd s = detail::two_sum(a.hi, b.hi);
  double lo = s.lo + a.lo + b.lo;
  return detail::quick_two_sum(s.hi, lo);
}

inline Dd operator-(Dd a) { return {-a.hi, -a.lo}; }
inline Dd operator-(Dd a, Dd b) { return a + (-b); }

inline Dd operator*(Dd a, Dd b) {
  Dd p = detail::two_prod(a.hi, b.hi);
  double lo = p.lo + a.hi * b.lo + a.lo * b.hi;
  return detail::quick_two_sum(p.hi, lo);
}

inline Dd operator*(double a, Dd b) { return Dd(a) * b; }
inline Dd operator*(Dd a, double b) { return a * Dd(b); }
inline Dd& operator+=(Dd& a, Dd b) { a = a + b; return a; }
inline Dd& operator-=(Dd& a, Dd b) { a = a - b; return a; }

// Dense matrix of Dd entries, row-major semantics match Eigen's (i, j)
// indexing. Only the handful of products the protocol needs are provided.
class DdMatrix {
 public:
  DdMatrix() = default;
  DdMatrix(Eigen::Index rows, Eigen::Index cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

  static DdMatrix from(const Eigen::MatrixXd& m) {
    DdMatrix r(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = Dd(m(i, j));
    return r;
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  Dd& operator()(Eigen::Index i, Eigen::Index j) {
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }
  const Dd& operator()(Eigen::Index i, Eigen::Index j) const {
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }

  Eigen::MatrixXd hi() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
      for (Eigen::Index j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).hi;
    return m;
  }
  Eigen::MatrixXd lo() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
      for (Eigen::Index j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).lo;
    return m;
  }
  Eigen::MatrixXd value() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
      for (Eigen::Index j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).value();
    return m;
  }

  static DdMatrix from_parts(const Eigen::MatrixXd& hi, const Eigen::MatrixXd& lo) {
    DdMatrix r(hi.rows(), hi.cols());
    for (Eigen::Index i = 0; i < hi.rows(); ++i)
      for (Eigen::Index j = 0; j < hi.cols(); ++j) r(i, j) = Dd(hi(i, j), lo(i, j));
    return r;
  }

  DdMatrix block(Eigen::Index i0, Eigen::Index j0, Eigen::Index nr, Eigen::Index nc) const {
    DdMatrix r(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i)
      for (Eigen::Index j = 0; j < nc; ++j) r(i, j) = (*this)(i0 + i, j0 + j);
    return r;
  }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Dd> data_;
};

inline DdMatrix operator+(const DdMatrix& a, const Eigen::MatrixXd& b) {
  DdMatrix r(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + Dd(b(i, j));
  return r;
}

inline DdMatrix operator-(const DdMatrix& a, const Eigen::MatrixXd& b) {
  DdMatrix r(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - Dd(b(i, j));
  return r;
}

inline DdMatrix operator-(const Eigen::MatrixXd& a, const DdMatrix& b) {
  DdMatrix r(b.rows(), b.cols());
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) r(i, j) = Dd(a(i, j)) - b(i, j);
  return r;
}

inline DdMatrix operator+(const DdMatrix& a, const DdMatrix& b) {
  DdMatrix r(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

inline DdMatrix operator-(const DdMatrix& a, const DdMatrix& b) {
  DdMatrix r(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

// double matrix * dd matrix
inline DdMatrix mul(const Eigen::MatrixXd& a, const DdMatrix& b) {
  DdMatrix r(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Dd acc(0.0);
      for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      r(i, j) = acc;
    }
  return r;
}

// dd matrix * double matrix
inline DdMatrix mul(const DdMatrix& a, const Eigen::MatrixXd& b) {
  DdMatrix r(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Dd acc(0.0);
      for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      r(i, j) = acc;
    }
  return r;
}

// transpose(dd matrix) * double matrix
inline DdMatrix mul_at(const DdMatrix& a, const Eigen::MatrixXd& b) {
  DdMatrix r(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Dd acc(0.0);
      for (Eigen::Index k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
      r(i, j) = acc;
    }
  return r;
}

// double matrix * transpose(dd matrix): (p x q) * (n x q)' -> p x n
inline DdMatrix mul_bt(const Eigen::MatrixXd& m, const DdMatrix& a) {
  DdMatrix r(m.rows(), a.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      Dd acc(0.0);
      for (Eigen::Index k = 0; k < m.cols(); ++k) acc += m(i, k) * a(j, k);
      r(i, j) = acc;
    }
  return r;
}

// trace(P * A) with P double (n x p) and A dd (p x n)
inline Dd trace_product(const Eigen::MatrixXd& p, const DdMatrix& a) {
  Dd acc(0.0);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index k = 0; k < p.cols(); ++k) acc += p(i, k) * a(k, i);
  return acc;
}

// trace(P * Minv * P^T), all doubles, accumulated in dd
inline Dd trace_quadratic(const Eigen::MatrixXd& p, const Eigen::MatrixXd& minv) {
  Dd acc(0.0);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index a = 0; a < p.cols(); ++a)
      for (Eigen::Index b = 0; b < p.cols(); ++b)
        acc += detail::two_prod(p(i, a), minv(a, b)) * p(i, b);
  return acc;
}

}  // namespace partlik

#endif
