#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "licp/error.hpp"
#include "licp/local_geom.hpp"
#include "licp/tensor.hpp"
#include "oracle.hpp"

using namespace licp;

namespace {

ProbDist dist(std::vector<double> v) { return ProbDist::validate(std::span<const double>(v)); }

Dtm random_dtm(oracle::Rng& rng, std::size_t nx, std::size_t ny) {
  return build_dtm(Channel::validate(rng.channel(ny, nx)), dist(rng.dist(nx)));
}

// Dense Kronecker power by explicit index arithmetic (slot 1 fastest).
Matrix naive_kron(const Matrix& b, std::size_t n) {
  Matrix out = Matrix::Ones(1, 1);
  for (std::size_t s = 0; s < n; ++s) {
    Matrix next(out.rows() * b.rows(), out.cols() * b.cols());
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index r = 0; r < out.rows(); ++r)
          for (Eigen::Index c = 0; c < out.cols(); ++c)
            next(i * out.rows() + r, j * out.cols() + c) = b(i, j) * out(r, c);
    out = next;
  }
  return out;
}

}  // namespace

TEST_CASE("flatten and unflatten are little-endian inverses") {
  CHECK(flatten({1, 0, 0}, 3) == 1);
  CHECK(flatten({0, 1, 0}, 3) == 3);
  CHECK(flatten({2, 2, 2}, 3) == 26);
  for (std::size_t f = 0; f < 64; ++f) CHECK(flatten(unflatten(f, 4, 3), 4) == f);
  CHECK_THROWS_AS(checked_power(10, 7, 1'000'000), Error);
  CHECK(checked_power(10, 6, 1'000'000) == 1'000'000);
}

TEST_CASE("tensor_product puts slot 1 fastest") {
  const Vector a{{1.0, 2.0}};
  const Vector b{{10.0, 20.0, 30.0}};
  const Vector t = tensor_product({a, b});
  REQUIRE(t.size() == 6);
  CHECK(t(0) == 10.0);
  CHECK(t(1) == 20.0);
  CHECK(t(2) == 20.0);
  CHECK(t(5) == 60.0);
}

TEST_CASE("Lazy tensor application equals the dense Kronecker power") {
  oracle::Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Dtm d = random_dtm(rng, rng.index(2, 4), rng.index(2, 4));
    for (std::size_t n : {1u, 2u, 3u}) {
      const Matrix dense = naive_kron(d.matrix(), n);
      CHECK((dense_kron(d, n) - dense).cwiseAbs().maxCoeff() <= 1e-14);
      const TensorOperator op(d, n);
      Vector v(dense.cols());
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
      CHECK((op.apply(v) - dense * v).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("kron_power_dist is the product distribution") {
  const ProbDist p = dist({0.2, 0.8});
  const ProbDist p3 = kron_power_dist(p, 3);
  CHECK(p3.size() == 8);
  CHECK(p3[flatten({1, 0, 1}, 2)] == doctest::Approx(0.8 * 0.2 * 0.8));
  CHECK_THROWS_AS(kron_power_dist(ProbDist::uniform(10), 7), Error);
}

TEST_CASE("Product singular values equal the dense Kronecker spectrum") {
  oracle::Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const Dtm d = random_dtm(rng, rng.index(2, 4), rng.index(2, 4));
    const SvdResult s = svd(d);
    for (std::size_t n : {2u, 3u}) {
      const std::size_t total = checked_power(s.input_dim(), n, kDefaultSizeCap);
      const auto prods = product_singular_values(s, n, total);
      const Vector ref = oracle::singular_values(naive_kron(d.matrix(), n));
      REQUIRE(prods.size() == total);
      for (std::size_t i = 0; i < total; ++i) {
        CHECK(std::abs(prods[i].value - ref(static_cast<Eigen::Index>(i))) <= 1e-9);
      }
    }
  }
}

TEST_CASE("Permuted product indices tie exactly, lexicographic first") {
  const SvdResult s = svd(build_dtm(Channel::bsc(0.1), dist({0.3, 0.7})));
  const auto prods = product_singular_values(s, 2, 4);
  // mu0 mu1 and mu1 mu0 are bitwise equal.
  CHECK(prods[1].value == prods[2].value);
  CHECK(prods[1].index == TensorIndex{0, 1});
  CHECK(prods[2].index == TensorIndex{1, 0});
  CHECK(prods[0].value == 1.0);
}

TEST_CASE("decompose and reconstruct round-trip") {
  oracle::Rng rng(4);
  const Dtm d = random_dtm(rng, 3, 3);
  const SvdResult s = svd(d);
  Vector l(9);
  for (Eigen::Index i = 0; i < 9; ++i) l(i) = rng.normal();
  const ProductCoeffs c = decompose(l, s, 2);
  CHECK((c.reconstruct() - l).norm() <= 1e-12);
  CHECK(std::abs(c.coeffs.norm() - l.norm()) <= 1e-12);
}

TEST_CASE("Product form detection") {
  oracle::Rng rng(6);
  const SvdResult s = svd(random_dtm(rng, 3, 3));
  const Vector v0 = s.right.col(0);
  // First-order perturbation v0 (x) a + b (x) v0 with a, b tangent.
  const Vector a = s.right.col(1) - 0.5 * s.right.col(2);
  const Vector b = 0.3 * s.right.col(2);
  const Vector good = tensor_product({v0, a}) + tensor_product({b, v0});
  CHECK(is_product_form(decompose(good, s, 2), 1e-20));
  const Vector bad = good + 0.1 * tensor_product({s.right.col(1), s.right.col(2)});
  CHECK_FALSE(is_product_form(decompose(bad, s, 2), 1e-6));
  CHECK(active_slots({0, 2, 1}) == 2);
  CHECK(active_slots({0, 0}) == 0);
}

TEST_CASE("basis_relation is orthogonal and rejects different input distributions") {
  oracle::Rng rng(9);
  const auto p = rng.dist(3);
  const SvdResult s1 = svd(build_dtm(Channel::validate(rng.channel(3, 3)), dist(p)));
  const SvdResult s2 = svd(build_dtm(Channel::validate(rng.channel(2, 3)), dist(p)));
  const BasisRelation r = basis_relation(s1, s2);
  CHECK((r.psi.transpose() * r.psi - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  const SvdResult s3 = svd(build_dtm(Channel::validate(rng.channel(3, 3)), dist(rng.dist(3))));
  CHECK_THROWS_AS(basis_relation(s1, s3), Error);
}

TEST_CASE("purify moves a single mixed component without losing either output norm") {
  oracle::Rng rng(13);
  int guaranteed = 0;
  for (int t = 0; t < 30; ++t) {
    const auto p = rng.dist(3);
    const SvdResult s1 = svd(build_dtm(Channel::validate(rng.channel(3, 3)), dist(p)));
    const SvdResult s2 = svd(build_dtm(Channel::validate(rng.channel(3, 3)), dist(p)));
    // (0,1) and (1,2) components in the s1 basis: the mixed one moves to (1,0),
    // which starts empty.
    const Vector l = 0.7 * tensor_product({s1.right.col(0), s1.right.col(1)}) +
                     0.4 * tensor_product({s1.right.col(1), s1.right.col(2)});
    const PurifyResult r = purify(l, s1, s2);
    CHECK(r.moved == 1);
    CHECK(r.guaranteed);
    guaranteed += r.guaranteed ? 1 : 0;
    CHECK(std::abs(r.purified.norm() - l.norm()) <= 1e-12);
    CHECK(is_product_form(decompose(r.purified, s1, 2), 1e-20));
    CHECK(r.norm1_after >= r.norm1_before - 1e-12);
    CHECK(r.norm2_after >= r.norm2_before - 1e-12);
  }
  CHECK(guaranteed == 30);
}

TEST_CASE("purify leaves product-form inputs unchanged") {
  oracle::Rng rng(14);
  const auto p = rng.dist(3);
  const SvdResult s1 = svd(build_dtm(Channel::validate(rng.channel(3, 3)), dist(p)));
  const SvdResult s2 = svd(build_dtm(Channel::validate(rng.channel(3, 3)), dist(p)));
  const Vector l = tensor_product({s1.right.col(0), s1.right.col(2)});
  const PurifyResult r = purify(l, s1, s2);
  CHECK(r.moved == 0);
  CHECK(r.purified == l);
}
