#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <vector>

namespace agc {

struct AffinePiece;

/// Matrix-valued affine function of the scalar decision vector x:
///   vec(E(x)) = C x + d   (column-major vec).
///
/// Products are only formed when at least one factor is constant; anything
/// else would leave a bilinear residue and throws NonAffineExpression.
class AffineMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  AffineMatrix() = default;
  AffineMatrix(int rows, int cols, int num_vars = 0);

  static AffineMatrix constant(const Eigen::MatrixXd& m);
  /// Entry (r, c) equals x[index[c * rows + r]], or 0 where the index is -1.
  static AffineMatrix variables(int rows, int cols, const std::vector<int>& index, int num_vars);
  /// A 1x1 expression equal to x[var].
  static AffineMatrix scalar_variable(int var, int num_vars);
  /// s * C for a 1x1 expression s and a constant matrix C.
  static AffineMatrix scaled(const AffineMatrix& s, const Eigen::MatrixXd& c);

  /// Places pieces into a rows x cols zero expression.
  static AffineMatrix assemble(int rows, int cols, const std::vector<AffinePiece>& pieces);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int num_vars() const { return static_cast<int>(coeff_.cols()); }
  const Sparse& coefficients() const { return coeff_; }
  const Eigen::VectorXd& offset() const { return offset_; }

  /// 0 for constant expressions, 1 otherwise.
  int degree() const { return coeff_.nonZeros() == 0 ? 0 : 1; }
  bool is_constant() const { return degree() == 0; }
  /// No decision dependence and an all-zero offset.
  bool is_zero() const { return is_constant() && (offset_.size() == 0 || offset_.isZero(0.0)); }

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;

  AffineMatrix transpose() const;
  AffineMatrix block(int r0, int c0, int nr, int nc) const;
  AffineMatrix row(int r) const { return block(r, 0, 1, cols_); }
  AffineMatrix col(int c) const { return block(0, c, rows_, 1); }
  /// Column of the listed column-major entries.
  AffineMatrix select(const std::vector<int>& vec_index) const;
  /// Column-major indices of the entries that are not identically zero.
  std::vector<int> nonzero_entries() const;
  /// Stacks the entries column-major into a (rows*cols) x 1 expression.
  AffineMatrix vec() const;
  /// Widens the coefficient matrix to n decision variables.
  AffineMatrix widened(int n) const;

  AffineMatrix& operator+=(const AffineMatrix& o);
  AffineMatrix& operator-=(const AffineMatrix& o);
  AffineMatrix& operator*=(double s);

  friend AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
  friend AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
  friend AffineMatrix operator*(double s, AffineMatrix a) { return a *= s; }
  friend AffineMatrix operator-(AffineMatrix a) { return a *= -1.0; }
  friend AffineMatrix operator+(AffineMatrix a, const Eigen::MatrixXd& b) { return a += constant(b); }
  friend AffineMatrix operator-(AffineMatrix a, const Eigen::MatrixXd& b) { return a -= constant(b); }

  /// K * E and E * K for constant K.
  friend AffineMatrix operator*(const Eigen::MatrixXd& k, const AffineMatrix& e);
  friend AffineMatrix operator*(const AffineMatrix& e, const Eigen::MatrixXd& k);
  /// E1 * E2; throws NonAffineExpression unless one factor is constant.
  friend AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix& b);

 private:
  AffineMatrix(int rows, int cols, Sparse coeff, Eigen::VectorXd offset);

  int rows_ = 0;
  int cols_ = 0;
  Sparse coeff_;
  Eigen::VectorXd offset_;
};

struct AffinePiece {
  int row;
  int col;
  AffineMatrix value;
};

/// Sparse copy of a dense matrix, dropping exact zeros.
Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_view(const Eigen::MatrixXd& m);

}  // namespace agc
