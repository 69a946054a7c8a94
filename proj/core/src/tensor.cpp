#include "licp/tensor.hpp"

#include "licp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace licp {
namespace {

std::size_t product_of(const std::vector<std::size_t>& dims, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t t = from; t < to; ++t) p *= dims[t];
  return p;
}

}  // namespace

std::size_t checked_power(std::size_t base, std::size_t n, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (base != 0 && out > cap / base) {
      fail(Errc::SizeCap, std::to_string(base) + "^" + std::to_string(n) +
                              " exceeds the size cap " + std::to_string(cap));
    }
    out *= base;
  }
  if (out > cap) {
    fail(Errc::SizeCap, std::to_string(base) + "^" + std::to_string(n) +
                            " exceeds the size cap " + std::to_string(cap));
  }
  return out;
}

TensorIndex unflatten(std::size_t flat, std::size_t dim, std::size_t letters) {
  TensorIndex index(letters);
  for (std::size_t s = 0; s < letters; ++s) {
    index[s] = flat % dim;
    flat /= dim;
  }
  return index;
}

std::size_t flatten(const TensorIndex& index, std::size_t dim) {
  std::size_t flat = 0;
  for (std::size_t s = index.size(); s-- > 0;) flat = flat * dim + index[s];
  return flat;
}

Vector apply_slot(const Matrix& op, const Vector& v, std::vector<std::size_t>& dims,
                  std::size_t slot) {
  const std::size_t inner = product_of(dims, 0, slot);
  const std::size_t outer = product_of(dims, slot + 1, dims.size());
  const auto d = static_cast<Eigen::Index>(dims[slot]);
  const Eigen::Index r = op.rows();
  if (op.cols() != d || static_cast<std::size_t>(v.size()) != inner * dims[slot] * outer) {
    fail(Errc::DimensionMismatch, "tensor slot size does not match the operator");
  }
  const auto in = static_cast<Eigen::Index>(inner);
  Vector out(in * r * static_cast<Eigen::Index>(outer));
  for (std::size_t o = 0; o < outer; ++o) {
    const auto oi = static_cast<Eigen::Index>(o);
    Eigen::Map<const Matrix> block(v.data() + oi * in * d, in, d);
    Eigen::Map<Matrix> target(out.data() + oi * in * r, in, r);
    target.noalias() = block * op.transpose();
  }
  dims[slot] = static_cast<std::size_t>(r);
  return out;
}

TensorOperator::TensorOperator(Matrix base, std::size_t letters, std::size_t cap)
    : base_(std::move(base)), letters_(letters) {
  if (letters_ == 0) fail(Errc::InvalidArgument, "tensor power needs n >= 1");
  in_size_ = checked_power(static_cast<std::size_t>(base_.cols()), letters_, cap);
  out_size_ = checked_power(static_cast<std::size_t>(base_.rows()), letters_, cap);
}

TensorOperator::TensorOperator(const Dtm& d, std::size_t letters, std::size_t cap)
    : TensorOperator(d.matrix(), letters, cap) {}

Vector TensorOperator::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != in_size_) {
    fail(Errc::DimensionMismatch, "vector of size " + std::to_string(v.size()) +
                                      " applied to a tensor operator on " +
                                      std::to_string(in_size_) + " inputs");
  }
  std::vector<std::size_t> dims(letters_, static_cast<std::size_t>(base_.cols()));
  Vector cur = v;
  for (std::size_t s = 0; s < letters_; ++s) cur = apply_slot(base_, cur, dims, s);
  return cur;
}

Vector tensor_product(const std::vector<Vector>& slots) {
  if (slots.empty()) fail(Errc::InvalidArgument, "tensor product of zero factors");
  // Later slots vary slowest: build from the last slot inward.
  Vector out = slots.back();
  for (std::size_t s = slots.size() - 1; s-- > 0;) {
    const Vector& v = slots[s];
    Vector next(out.size() * v.size());
    for (Eigen::Index k = 0; k < out.size(); ++k) next.segment(k * v.size(), v.size()) = out(k) * v;
    out = std::move(next);
  }
  return out;
}

ProbDist kron_power_dist(const ProbDist& p, std::size_t n, std::size_t cap) {
  if (n == 0) fail(Errc::InvalidArgument, "kron_power_dist needs n >= 1");
  checked_power(p.size(), n, cap);
  return ProbDist::validate(tensor_product(std::vector<Vector>(n, p.probs())));
}

Matrix dense_kron(const Matrix& b, std::size_t n, std::size_t dense_limit) {
  if (n == 0) fail(Errc::InvalidArgument, "dense_kron needs n >= 1");
  const std::size_t rows = checked_power(static_cast<std::size_t>(b.rows()), n, dense_limit);
  const std::size_t cols = checked_power(static_cast<std::size_t>(b.cols()), n, dense_limit);
  (void)rows;
  (void)cols;
  Matrix out = b;
  for (std::size_t s = 1; s < n; ++s) {
    // Slot s+1 varies slowest, so the new factor multiplies whole blocks.
    Matrix next(out.rows() * b.rows(), out.cols() * b.cols());
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        next.block(i * out.rows(), j * out.cols(), out.rows(), out.cols()) = b(i, j) * out;
      }
    }
    out = std::move(next);
  }
  return out;
}

Matrix dense_kron(const Dtm& d, std::size_t n, std::size_t dense_limit) {
  return dense_kron(d.matrix(), n, dense_limit);
}

std::vector<ProductSingularValue> product_singular_values(const SvdResult& s, std::size_t n,
                                                          std::size_t top_m, std::size_t cap) {
  if (n == 0) fail(Errc::InvalidArgument, "product_singular_values needs n >= 1");
  const std::size_t dim = static_cast<std::size_t>(s.singular_values.size());
  const std::size_t total = checked_power(dim, n, cap);
  std::vector<ProductSingularValue> all;
  all.reserve(total);
  std::vector<double> factors(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    TensorIndex index = unflatten(flat, dim, n);
    // Multiply in a canonical (sorted) order so permuted indices give
    // bitwise-identical products.
    for (std::size_t k = 0; k < n; ++k) factors[k] = s.singular_values(static_cast<Eigen::Index>(index[k]));
    std::sort(factors.begin(), factors.end());
    double value = 1.0;
    for (const double f : factors) value *= f;
    all.push_back({value, std::move(index)});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.index < b.index;
  });
  if (all.size() > top_m) all.resize(top_m);
  return all;
}

double ProductCoeffs::at(const TensorIndex& index) const {
  if (index.size() != letters) fail(Errc::DimensionMismatch, "tensor index has the wrong arity");
  for (const auto i : index) {
    if (i >= dim()) fail(Errc::DimensionMismatch, "tensor index out of range");
  }
  return coeffs(static_cast<Eigen::Index>(flatten(index, dim())));
}

Vector ProductCoeffs::reconstruct() const {
  std::vector<std::size_t> dims(letters, dim());
  Vector cur = coeffs;
  for (std::size_t s = 0; s < letters; ++s) cur = apply_slot(basis, cur, dims, s);
  return cur;
}

ProductCoeffs decompose(const Vector& l, const SvdResult& s, std::size_t n, std::size_t cap) {
  if (n == 0) fail(Errc::InvalidArgument, "decompose needs n >= 1");
  const std::size_t dim = s.input_dim();
  const std::size_t total = checked_power(dim, n, cap);
  if (static_cast<std::size_t>(l.size()) != total) {
    fail(Errc::DimensionMismatch, "vector of size " + std::to_string(l.size()) +
                                      " is not over |X|^n = " + std::to_string(total));
  }
  const Matrix vt = s.right.transpose();
  std::vector<std::size_t> dims(n, dim);
  Vector cur = l;
  for (std::size_t slot = 0; slot < n; ++slot) cur = apply_slot(vt, cur, dims, slot);
  return ProductCoeffs{std::move(cur), s.right, n};
}

std::size_t active_slots(const TensorIndex& index) {
  return static_cast<std::size_t>(std::count_if(index.begin(), index.end(),
                                                [](std::size_t i) { return i != 0; }));
}

bool is_product_form(const ProductCoeffs& c, double tol) {
  double mixed = 0.0;
  for (Eigen::Index flat = 0; flat < c.coeffs.size(); ++flat) {
    if (active_slots(unflatten(static_cast<std::size_t>(flat), c.dim(), c.letters)) >= 2) {
      mixed += c.coeffs(flat) * c.coeffs(flat);
    }
  }
  return mixed <= tol;
}

BasisRelation basis_relation(const SvdResult& s1, const SvdResult& s2) {
  if (s1.right.rows() != s2.right.rows()) {
    fail(Errc::DimensionMismatch, "the two decompositions live on different input spaces");
  }
  const Eigen::Index m = s1.right.cols();
  if ((s1.right.col(0) - s2.right.col(0)).norm() > 1e-9) {
    fail(Errc::BasisMismatch,
         "top right singular vectors differ; the DTMs do not share an input distribution");
  }
  Matrix psi = s1.right.rightCols(m - 1).transpose() * s2.right.rightCols(m - 1);
  if (m > 1 && (psi * psi.transpose() - Matrix::Identity(m - 1, m - 1)).norm() > 1e-9) {
    fail(Errc::NumericalFailure, "basis relation is not orthogonal");
  }
  return BasisRelation{std::move(psi)};
}

Matrix reconstruct(const SvdResult& s) {
  const Eigen::Index r = s.left.cols();
  return s.left * s.singular_values.head(r).asDiagonal() * s.right.leftCols(r).transpose();
}

PurifyResult purify(const Vector& l, const SvdResult& s1, const SvdResult& s2) {
  const std::size_t dim = s1.input_dim();
  if (s2.input_dim() != dim) fail(Errc::DimensionMismatch, "decompositions differ in input size");
  if (static_cast<std::size_t>(l.size()) != dim * dim) {
    fail(Errc::DimensionMismatch, "purify expects a 2-letter vector of size |X|^2");
  }
  const auto m = static_cast<Eigen::Index>(dim);
  ProductCoeffs coeffs = decompose(l, s1, 2);
  // alpha(i1, i2) with flat = i1 + m i2.
  Eigen::Map<Matrix> alpha(coeffs.coeffs.data(), m, m);
  // Rounding residue of the change of basis is not a component.
  const double noise = 1e-12 * coeffs.coeffs.norm();
  alpha = alpha.unaryExpr([noise](double a) { return std::abs(a) <= noise ? 0.0 : a; });

  const Matrix b1 = reconstruct(s1);
  const Matrix b2 = reconstruct(s2);
  const Matrix images = b2 * s1.right;  // column i: B2 phi_i

  PurifyResult out;
  bool destination_was_empty = true;
  Vector group = Vector::Zero(b2.rows());  // channel-2 image of the (., 0) group, first slot
  for (Eigen::Index i = 1; i < m; ++i) group += alpha(i, 0) * images.col(i);

  for (Eigen::Index i = 1; i < m; ++i) {
    double mass = 0.0;
    Eigen::Index lead = -1;
    for (Eigen::Index j = 1; j < m; ++j) {
      if (alpha(i, j) == 0.0) continue;
      mass += alpha(i, j) * alpha(i, j);
      if (lead < 0 || std::abs(alpha(i, j)) > std::abs(alpha(i, lead))) lead = j;
      ++out.moved;
    }
    if (lead < 0) continue;
    const double existing = alpha(i, 0);
    if (existing != 0.0) destination_was_empty = false;
    const double cross = group.dot(images.col(i));
    double sign = 1.0;
    if (std::abs(cross) > 1e-15) {
      sign = cross > 0.0 ? 1.0 : -1.0;
    } else if (existing != 0.0) {
      sign = existing > 0.0 ? 1.0 : -1.0;
    } else {
      sign = alpha(i, lead) > 0.0 ? 1.0 : -1.0;
    }
    const double moved = sign * std::sqrt(mass);
    alpha(i, 0) = existing + moved;
    group += moved * images.col(i);
    for (Eigen::Index j = 1; j < m; ++j) alpha(i, j) = 0.0;
  }

  out.purified = out.moved == 0 ? l : coeffs.reconstruct();
  const TensorOperator op1(b1, 2);
  const TensorOperator op2(b2, 2);
  out.norm1_before = op1.apply(l).norm();
  out.norm2_before = op2.apply(l).norm();
  out.norm1_after = op1.apply(out.purified).norm();
  out.norm2_after = op2.apply(out.purified).norm();
  out.guaranteed = out.moved == 1 && destination_was_empty;
  return out;
}

}  // namespace licp
