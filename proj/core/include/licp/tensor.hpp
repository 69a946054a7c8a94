#pragma once

// Multi-letter structure: Kronecker powers applied lazily, the tensor
// singular basis, and product-form analysis of n-letter perturbations.
//
// Index convention: a flat index over |X|^n is little-endian in the slots,
// flat = i_1 + |X| i_2 + ... + |X|^(n-1) i_n, so slot 1 varies fastest.

#include "licp/linalg.hpp"
#include "licp/local_geom.hpp"
#include "licp/prob.hpp"

#include <cstddef>
#include <vector>

namespace licp {

inline constexpr std::size_t kDefaultSizeCap = 1'000'000;
inline constexpr std::size_t kDefaultDenseLimit = 4096;

using TensorIndex = std::vector<std::size_t>;

/// base^n, checked against `cap`; throws SizeCap on overflow or excess.
std::size_t checked_power(std::size_t base, std::size_t n, std::size_t cap);

TensorIndex unflatten(std::size_t flat, std::size_t dim, std::size_t letters);
std::size_t flatten(const TensorIndex& index, std::size_t dim);

/// Slot-by-slot application of base^{(x)n}; never forms the dense power.
class TensorOperator {
 public:
  TensorOperator(Matrix base, std::size_t letters, std::size_t cap = kDefaultSizeCap);
  TensorOperator(const Dtm& d, std::size_t letters, std::size_t cap = kDefaultSizeCap);

  std::size_t letters() const noexcept { return letters_; }
  std::size_t input_size() const noexcept { return in_size_; }
  std::size_t output_size() const noexcept { return out_size_; }
  const Matrix& base() const noexcept { return base_; }

  Vector apply(const Vector& v) const;

 private:
  Matrix base_;
  std::size_t letters_;
  std::size_t in_size_;
  std::size_t out_size_;
};

/// Apply `op` to the slot `slot` (0-based) of a little-endian tensor whose
/// slot sizes are `dims`; dims[slot] is updated to op.rows().
Vector apply_slot(const Matrix& op, const Vector& v, std::vector<std::size_t>& dims,
                  std::size_t slot);

/// v_1 (x) v_2 (x) ... in slot order.
Vector tensor_product(const std::vector<Vector>& slots);

ProbDist kron_power_dist(const ProbDist& p, std::size_t n, std::size_t cap = kDefaultSizeCap);

Matrix dense_kron(const Matrix& b, std::size_t n, std::size_t dense_limit = kDefaultDenseLimit);
Matrix dense_kron(const Dtm& d, std::size_t n, std::size_t dense_limit = kDefaultDenseLimit);

struct ProductSingularValue {
  double value = 0.0;
  TensorIndex index;
};

/// The top_m products mu_{i_1} ... mu_{i_n}, sorted descending with ties in
/// lexicographic index order.
std::vector<ProductSingularValue> product_singular_values(const SvdResult& s, std::size_t n,
                                                          std::size_t top_m,
                                                          std::size_t cap = kDefaultSizeCap);

/// Coordinates of an n-letter vector in the basis phi_{i_1} (x) ... (x) phi_{i_n}
/// formed from the right singular vectors of one DTM.
struct ProductCoeffs {
  Vector coeffs;  // flat little-endian
  Matrix basis;   // columns phi_0 .. phi_{|X|-1}
  std::size_t letters = 0;

  std::size_t dim() const { return static_cast<std::size_t>(basis.cols()); }
  double at(const TensorIndex& index) const;
  /// Sum of alpha_i * basis tensor i.
  Vector reconstruct() const;
};

ProductCoeffs decompose(const Vector& l, const SvdResult& s, std::size_t n,
                        std::size_t cap = kDefaultSizeCap);

/// Number of slots of `index` that are not the top (0) basis vector.
std::size_t active_slots(const TensorIndex& index);

/// True iff the squared coefficient mass on indices with two or more active
/// slots is at most tol.
bool is_product_form(const ProductCoeffs& c, double tol);

/// Psi_ij = <phi_i, varphi_j> over the non-top right singular vectors.
struct BasisRelation {
  Matrix psi;
};

BasisRelation basis_relation(const SvdResult& s1, const SvdResult& s2);

struct PurifyResult {
  Vector purified;
  std::size_t moved = 0;  // mixed components reassigned
  // ||B_k^{(2)} l|| before and after, for k = 1, 2.
  double norm1_before = 0.0;
  double norm1_after = 0.0;
  double norm2_before = 0.0;
  double norm2_after = 0.0;
  // Whether the non-decrease of both norms is guaranteed by construction:
  // a single mixed component moved to an empty destination.
  bool guaranteed = false;
};

/// Moves every doubly-mixed component (i, j), i, j != 0, of a 2-letter
/// perturbation onto (i, 0) in the basis of s1. Components sharing a
/// destination merge with their combined norm; the merged sign is chosen so
/// its channel-2 cross term with the existing (., 0) group is nonnegative.
PurifyResult purify(const Vector& l, const SvdResult& s1, const SvdResult& s2);

/// Rebuilds B from its SVD.
Matrix reconstruct(const SvdResult& s);

}  // namespace licp
