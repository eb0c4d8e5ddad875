#include "cvnet/complex_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvnet {

ComplexMatrix::ComplexMatrix(
    std::initializer_list<std::initializer_list<Complex>> init) {
  rows_ = init.size();
  cols_ = rows_ == 0 ? 0 : init.begin()->size();
  d_.reserve(rows_ * cols_);
  for (const auto& row : init) {
    if (row.size() != cols_)
      throw std::invalid_argument("ComplexMatrix: ragged initializer");
    d_.insert(d_.end(), row.begin(), row.end());
  }
}

ComplexMatrix rot180(const ComplexMatrix& a) {
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t i = 1; i <= a.rows(); ++i)
    for (std::size_t j = 1; j <= a.cols(); ++j)
      out(i, j) = a(a.rows() + 1 - i, a.cols() + 1 - j);
  return out;
}

ComplexMatrix conv_valid(const ComplexMatrix& a, const ComplexMatrix& k) {
  if (a.empty() || k.empty())
    throw std::invalid_argument("conv_valid: empty operand");
  if (k.rows() > a.rows() || k.cols() > a.cols())
    throw std::invalid_argument("conv_valid: kernel exceeds input dims");
  const std::size_t dr = k.rows(), dc = k.cols();
  ComplexMatrix out(a.rows() - dr + 1, a.cols() - dc + 1);
  for (std::size_t i = 1; i <= out.rows(); ++i) {
    for (std::size_t j = 1; j <= out.cols(); ++j) {
      Complex acc{0.0, 0.0};
      for (std::size_t u = 0; u < dr; ++u)
        for (std::size_t v = 0; v < dc; ++v)
          acc += a(i + u, j + v) * k(dr - u, dc - v);
      out(i, j) = acc;
    }
  }
  return out;
}

ComplexMatrix hadamard(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.same_dims(b))
    throw std::invalid_argument("hadamard: dimension mismatch");
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t n = 0; n < a.size(); ++n) out.data()[n] = a.data()[n] * b.data()[n];
  return out;
}

ComplexMatrix axpy(Complex alpha, const ComplexMatrix& a,
                   const ComplexMatrix& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("axpy: dimension mismatch");
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t n = 0; n < a.size(); ++n)
    out.data()[n] = alpha * a.data()[n] + b.data()[n];
  return out;
}

ComplexMatrix conj_matrix(const ComplexMatrix& a) {
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t n = 0; n < a.size(); ++n)
    out.data()[n] = std::conj(a.data()[n]);
  return out;
}

ComplexMatrix zeropad(const ComplexMatrix& a, std::size_t top,
                      std::size_t bottom, std::size_t left,
                      std::size_t right) {
  ComplexMatrix out(a.rows() + top + bottom, a.cols() + left + right);
  for (std::size_t i = 1; i <= a.rows(); ++i)
    for (std::size_t j = 1; j <= a.cols(); ++j)
      out(i + top, j + left) = a(i, j);
  return out;
}

Complex matrix_sum(const ComplexMatrix& a) {
  Complex acc{0.0, 0.0};
  for (const auto& z : a) acc += z;
  return acc;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.same_dims(b))
    throw std::invalid_argument("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    Complex d = a.data()[n] - b.data()[n];
    m = std::max(m, std::max(std::abs(d.real()), std::abs(d.imag())));
  }
  return m;
}

}  // namespace cvnet
