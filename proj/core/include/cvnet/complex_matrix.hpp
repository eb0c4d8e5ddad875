#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace cvnet {

using Complex = std::complex<double>;

// Dense row-major complex matrix. Accessors are 1-based: valid indices are
// 1 <= i <= rows(), 1 <= j <= cols(). All convolution and gradient formulas
// in this library are written against that convention.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), d_(rows * cols, Complex{0.0, 0.0}) {}
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> init);

  Complex& operator()(std::size_t i, std::size_t j) {
    return d_[(i - 1) * cols_ + (j - 1)];
  }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return d_[(i - 1) * cols_ + (j - 1)];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  Complex* data() { return d_.data(); }
  const Complex* data() const { return d_.data(); }
  auto begin() { return d_.begin(); }
  auto end() { return d_.end(); }
  auto begin() const { return d_.begin(); }
  auto end() const { return d_.end(); }

  bool same_dims(const ComplexMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool operator==(const ComplexMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && d_ == o.d_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> d_;
};

// Ordered list of planes, all with identical dimensions within one tensor.
using ComplexTensor = std::vector<ComplexMatrix>;

// rot180(A)(i, j) = A(rows + 1 - i, cols + 1 - j).
ComplexMatrix rot180(const ComplexMatrix& a);

// True 2-D valid convolution with the kernel flipped:
//   out(i, j) = sum_{u=0..dr-1} sum_{v=0..dc-1} A(i+u, j+v) * K(dr-u, dc-v)
// Output dims are (rows(A) - dr + 1, cols(A) - dc + 1). The kernel must not
// exceed the input in either dimension. Rectangular kernels are allowed.
ComplexMatrix conv_valid(const ComplexMatrix& a, const ComplexMatrix& k);

// Elementwise complex product; dimensions must match.
ComplexMatrix hadamard(const ComplexMatrix& a, const ComplexMatrix& b);

// alpha * A + B elementwise; dimensions must match.
ComplexMatrix axpy(Complex alpha, const ComplexMatrix& a,
                   const ComplexMatrix& b);

// Elementwise conjugate.
ComplexMatrix conj_matrix(const ComplexMatrix& a);

// Zero border padding by the given margins.
ComplexMatrix zeropad(const ComplexMatrix& a, std::size_t top,
                      std::size_t bottom, std::size_t left, std::size_t right);

// Sum of all entries.
Complex matrix_sum(const ComplexMatrix& a);

// Largest max(|re|, |im|) over entries of the elementwise difference.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace cvnet
