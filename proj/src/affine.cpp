#include "agc/affine.hpp"

#include "agc/error.hpp"

namespace agc {

namespace {

using Sparse = AffineMatrix::Sparse;
using Triplet = Eigen::Triplet<double>;

Sparse widen(const Sparse& s, int n) {
  if (s.cols() >= n) return s;
  Sparse out = s;
  out.conservativeResize(s.rows(), n);
  return out;
}

Eigen::VectorXd vectorize(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

// kron(I_reps, K) for sparse K.
Sparse kron_identity_left(int reps, const Sparse& k) {
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(reps) * k.nonZeros());
  for (int b = 0; b < reps; ++b)
    for (int r = 0; r < k.outerSize(); ++r)
      for (Sparse::InnerIterator it(k, r); it; ++it)
        trips.emplace_back(b * k.rows() + r, b * k.cols() + it.col(), it.value());
  Sparse out(reps * k.rows(), reps * k.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// kron(K, I_reps) for sparse K.
Sparse kron_identity_right(const Sparse& k, int reps) {
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(reps) * k.nonZeros());
  for (int r = 0; r < k.outerSize(); ++r)
    for (Sparse::InnerIterator it(k, r); it; ++it)
      for (int b = 0; b < reps; ++b)
        trips.emplace_back(r * reps + b, it.col() * reps + b, it.value());
  Sparse out(k.rows() * reps, k.cols() * reps);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// Row-selection matrix: output row k takes input row rows[k].
Sparse selector(const std::vector<int>& rows, int input_rows) {
  Sparse s(static_cast<int>(rows.size()), input_rows);
  s.reserve(Eigen::VectorXi::Ones(static_cast<int>(rows.size())));
  for (size_t k = 0; k < rows.size(); ++k) s.insert(static_cast<int>(k), rows[k]) = 1.0;
  s.makeCompressed();
  return s;
}

}  // namespace

Sparse sparse_view(const Eigen::MatrixXd& m) { return m.sparseView(0.0, 0.0); }

AffineMatrix::AffineMatrix(int rows, int cols, int num_vars)
    : rows_(rows), cols_(cols), coeff_(rows * cols, num_vars), offset_(Eigen::VectorXd::Zero(rows * cols)) {}

AffineMatrix::AffineMatrix(int rows, int cols, Sparse coeff, Eigen::VectorXd offset)
    : rows_(rows), cols_(cols), coeff_(std::move(coeff)), offset_(std::move(offset)) {}

AffineMatrix AffineMatrix::constant(const Eigen::MatrixXd& m) {
  const int r = static_cast<int>(m.rows());
  const int c = static_cast<int>(m.cols());
  return AffineMatrix(r, c, Sparse(r * c, 0), vectorize(m));
}

AffineMatrix AffineMatrix::variables(int rows, int cols, const std::vector<int>& index,
                                     int num_vars) {
  if (static_cast<int>(index.size()) != rows * cols) {
    throw DimensionMismatch("variable index list does not match expression size");
  }
  std::vector<Triplet> trips;
  for (size_t k = 0; k < index.size(); ++k)
    if (index[k] >= 0) trips.emplace_back(static_cast<int>(k), index[k], 1.0);
  Sparse c(rows * cols, num_vars);
  c.setFromTriplets(trips.begin(), trips.end());
  return AffineMatrix(rows, cols, std::move(c), Eigen::VectorXd::Zero(rows * cols));
}

AffineMatrix AffineMatrix::scalar_variable(int var, int num_vars) {
  return variables(1, 1, {var}, num_vars);
}

AffineMatrix AffineMatrix::scaled(const AffineMatrix& s, const Eigen::MatrixXd& c) {
  if (s.rows_ != 1 || s.cols_ != 1) throw DimensionMismatch("scaled() needs a 1x1 factor");
  const Eigen::VectorXd v = vectorize(c);
  Sparse col = v.sparseView(0.0, 0.0);
  Sparse coeff = col * s.coeff_;  // (rc x 1) * (1 x n)
  return AffineMatrix(static_cast<int>(c.rows()), static_cast<int>(c.cols()), std::move(coeff),
                      v * s.offset_[0]);
}

AffineMatrix AffineMatrix::assemble(int rows, int cols, const std::vector<AffinePiece>& pieces) {
  int n = 0;
  for (const auto& p : pieces) n = std::max(n, p.value.num_vars());
  std::vector<Triplet> trips;
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(rows * cols);
  for (const auto& p : pieces) {
    const auto& v = p.value;
    if (p.row < 0 || p.col < 0 || p.row + v.rows_ > rows || p.col + v.cols_ > cols) {
      throw DimensionMismatch("assembled piece exceeds target dimensions");
    }
    for (int c = 0; c < v.cols_; ++c) {
      for (int r = 0; r < v.rows_; ++r) {
        const int src = c * v.rows_ + r;
        const int dst = (p.col + c) * rows + (p.row + r);
        offset[dst] += v.offset_[src];
        for (Sparse::InnerIterator it(v.coeff_, src); it; ++it)
          trips.emplace_back(dst, it.col(), it.value());
      }
    }
  }
  Sparse coeff(rows * cols, n);
  coeff.setFromTriplets(trips.begin(), trips.end());
  return AffineMatrix(rows, cols, std::move(coeff), std::move(offset));
}

Eigen::MatrixXd AffineMatrix::evaluate(const Eigen::VectorXd& x) const {
  Eigen::VectorXd v = offset_;
  if (coeff_.cols() > 0) {
    if (x.size() < coeff_.cols()) throw DimensionMismatch("decision vector too short");
    v += coeff_ * x.head(coeff_.cols());
  }
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows_, cols_);
}

AffineMatrix AffineMatrix::transpose() const {
  std::vector<int> order(static_cast<size_t>(rows_) * cols_);
  // entry (c, r) of the transpose is entry (r, c) of this
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) order[static_cast<size_t>(r) * cols_ + c] = c * rows_ + r;
  const Sparse s = selector(order, rows_ * cols_);
  return AffineMatrix(cols_, rows_, s * coeff_, s * offset_);
}

AffineMatrix AffineMatrix::block(int r0, int c0, int nr, int nc) const {
  if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_) {
    throw DimensionMismatch("block() out of range");
  }
  std::vector<int> order;
  order.reserve(static_cast<size_t>(nr) * nc);
  for (int c = 0; c < nc; ++c)
    for (int r = 0; r < nr; ++r) order.push_back((c0 + c) * rows_ + (r0 + r));
  const Sparse s = selector(order, rows_ * cols_);
  return AffineMatrix(nr, nc, s * coeff_, s * offset_);
}

AffineMatrix AffineMatrix::select(const std::vector<int>& vec_index) const {
  for (int k : vec_index)
    if (k < 0 || k >= rows_ * cols_) throw DimensionMismatch("select() index out of range");
  const Sparse s = selector(vec_index, rows_ * cols_);
  return AffineMatrix(static_cast<int>(vec_index.size()), 1, s * coeff_, s * offset_);
}

std::vector<int> AffineMatrix::nonzero_entries() const {
  std::vector<int> out;
  for (int k = 0; k < rows_ * cols_; ++k) {
    bool nz = offset_[k] != 0.0;
    for (Sparse::InnerIterator it(coeff_, k); it && !nz; ++it) nz = it.value() != 0.0;
    if (nz) out.push_back(k);
  }
  return out;
}

AffineMatrix AffineMatrix::vec() const { return AffineMatrix(rows_ * cols_, 1, coeff_, offset_); }

AffineMatrix AffineMatrix::widened(int n) const {
  return AffineMatrix(rows_, cols_, widen(coeff_, n), offset_);
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionMismatch("affine sum: shape mismatch");
  const int n = std::max(num_vars(), o.num_vars());
  coeff_ = widen(coeff_, n) + widen(o.coeff_, n);
  offset_ += o.offset_;
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionMismatch("affine sum: shape mismatch");
  const int n = std::max(num_vars(), o.num_vars());
  coeff_ = widen(coeff_, n) - widen(o.coeff_, n);
  offset_ -= o.offset_;
  return *this;
}

AffineMatrix& AffineMatrix::operator*=(double s) {
  coeff_ *= s;
  offset_ *= s;
  return *this;
}

AffineMatrix operator*(const Eigen::MatrixXd& k, const AffineMatrix& e) {
  if (k.cols() != e.rows_) throw DimensionMismatch("K * E: inner dimensions differ");
  // vec(K E) = (I_cols kron K) vec(E)
  const Sparse big = kron_identity_left(e.cols_, sparse_view(k));
  return AffineMatrix(static_cast<int>(k.rows()), e.cols_, big * e.coeff_, big * e.offset_);
}

AffineMatrix operator*(const AffineMatrix& e, const Eigen::MatrixXd& k) {
  if (k.rows() != e.cols_) throw DimensionMismatch("E * K: inner dimensions differ");
  // vec(E K) = (K' kron I_rows) vec(E)
  const Sparse big = kron_identity_right(sparse_view(k.transpose()), e.rows_);
  return AffineMatrix(e.rows_, static_cast<int>(k.cols()), big * e.coeff_, big * e.offset_);
}

AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix& b) {
  if (a.degree() + b.degree() > 1) {
    throw NonAffineExpression("product of two decision-dependent expressions is not affine");
  }
  if (a.is_constant()) return a.evaluate(Eigen::VectorXd()) * b;
  return a * b.evaluate(Eigen::VectorXd());
}

}  // namespace agc
