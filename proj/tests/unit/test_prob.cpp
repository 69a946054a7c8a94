#include <cmath>
#include <vector>

#include "doctest.h"
#include "licp/error.hpp"
#include "licp/prob.hpp"
#include "oracle.hpp"

using namespace licp;

namespace {

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected licp::Error");
  return Errc::InvalidArgument;
}

ProbDist dist(std::vector<double> v) { return ProbDist::validate(std::span<const double>(v)); }

}  // namespace

TEST_CASE("ProbDist validation never renormalizes") {
  const ProbDist p = dist({0.2, 0.3, 0.5});
  CHECK(p.size() == 3);
  CHECK(p[1] == 0.3);
  CHECK(code_of([] { dist({0.5, 0.0, 0.5}); }) == Errc::NonPositiveEntry);
  CHECK(code_of([] { dist({0.5, -0.1, 0.6}); }) == Errc::NonPositiveEntry);
  CHECK(code_of([] { dist({0.5, 0.6}); }) == Errc::NotNormalized);
  CHECK(code_of([] { dist({}); }) == Errc::InvalidArgument);
  // Within the 1e-9 input tolerance the raw values are kept.
  const ProbDist q = dist({0.5 + 4e-10, 0.5});
  CHECK(q[0] == 0.5 + 4e-10);
}

TEST_CASE("Channel validation") {
  Matrix w(2, 2);
  w << 0.9, 0.2, 0.1, 0.8;
  CHECK_NOTHROW(Channel::validate(w));
  w(0, 0) = 0.95;
  CHECK(code_of([&] { Channel::validate(w); }) == Errc::NotNormalized);
  w << 1.1, 0.2, -0.1, 0.8;
  CHECK(code_of([&] { Channel::validate(w); }) == Errc::NonPositiveEntry);
  CHECK(Channel::bsc(0.1).matrix()(1, 0) == doctest::Approx(0.1));
  CHECK(Channel::identity(3).matrix() == Matrix::Identity(3, 3));
}

TEST_CASE("KL divergence matches the high-precision oracle values") {
  const ProbDist half = dist({0.5, 0.5});
  const ProbDist skew = dist({0.55, 0.45});
  // Frozen from a 40-digit evaluation.
  CHECK(kl_divergence(skew, half) == doctest::Approx(0.0050083668463568374718).epsilon(1e-13));
  CHECK(kl_divergence(half, skew) == doctest::Approx(0.0050251679267507205918).epsilon(1e-13));
  CHECK(kl_divergence(half, dist({0.75, 0.25})) ==
        doctest::Approx(0.14384103622589046372).epsilon(1e-13));
  CHECK(kl_divergence(half, half) == 0.0);
}

TEST_CASE("KL divergence agrees with the long-double oracle on random pairs") {
  oracle::Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = rng.index(2, 6);
    const auto p = rng.dist(n);
    const auto q = rng.dist(n);
    const double got = kl_divergence(dist(p), dist(q));
    CHECK(got >= 0.0);
    CHECK(std::abs(got - oracle::kl(p, q)) <= 1e-13 * std::max(1.0, got));
  }
}

TEST_CASE("Tiny perturbations keep KL accurate and nonnegative") {
  // A dyadic epsilon keeps P + eps J exactly representable and normalized.
  const double eps = std::ldexp(1.0, -24);
  const ProbDist p = dist({0.5, 0.5});
  const Perturbation j = Perturbation::make(p, Vector{{1.0, -1.0}}, eps);
  const double d = kl_divergence(j.perturbed(), p);
  const double quad = 2.0 * eps * eps;
  CHECK(d > 0.0);
  CHECK(std::abs(d - quad) <= 1e-6 * quad);
}

TEST_CASE("Perturbation construction") {
  const ProbDist p = dist({0.5, 0.5});
  CHECK(code_of([&] { Perturbation::make(p, Vector{{1.0, 0.0}}, 0.1); }) == Errc::InvalidArgument);
  CHECK(code_of([&] { Perturbation::make(p, Vector{{1.0, -1.0}}, 0.6); }) == Errc::InvalidEpsilon);
  CHECK(code_of([&] { Perturbation::make(p, Vector{{1.0, -1.0}}, -0.1); }) == Errc::InvalidEpsilon);
  const Perturbation ok = Perturbation::make(p, Vector{{1.0, -1.0}}, 0.05);
  CHECK(ok.perturbed()[0] == doctest::Approx(0.55));
}

TEST_CASE("scale and unscale are inverse and respect the weighted inner product") {
  oracle::Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = rng.index(2, 6);
    const ProbDist p = dist(rng.dist(n));
    Vector j1(static_cast<Eigen::Index>(n)), j2(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < j1.size(); ++i) {
      j1(i) = rng.normal();
      j2(i) = rng.normal();
    }
    j1.array() -= j1.mean();
    j2.array() -= j2.mean();
    const Vector l1 = scale(j1, p);
    const Vector l2 = scale(j2, p);
    CHECK((unscale(l1, p) - j1).norm() <= 1e-12 * j1.norm());
    CHECK(std::abs(l1.dot(l2) - weighted_inner_product(j1, j2, p)) <= 1e-12 * (1 + l1.norm() * l2.norm()));
    CHECK(std::abs(l1.dot(p.sqrt())) <= 1e-12 * (1 + l1.norm()));
    CHECK_NOTHROW(ScaledPerturbation::make(p, l1));
  }
  const ProbDist p = dist({0.5, 0.5});
  CHECK(code_of([&] { ScaledPerturbation::make(p, Vector{{1.0, 1.0}}); }) == Errc::InvalidArgument);
}

TEST_CASE("push_forward and exact mutual information") {
  const ProbDist p = dist({0.5, 0.5});
  const ProbDist py = push_forward(Channel::bsc(0.1), p);
  CHECK(py[0] == doctest::Approx(0.5));
  Matrix w(2, 2);
  w << 1.0, 1.0, 0.0, 0.0;
  CHECK(code_of([&] { push_forward(Channel::validate(w), p); }) == Errc::NonPositiveEntry);

  // Binary U shifting a fair coin by +/- 0.05: equals D((0.55,0.45) || (0.5,0.5)).
  const std::vector<double> wts{0.5, 0.5};
  const std::vector<ProbDist> conds{dist({0.55, 0.45}), dist({0.45, 0.55})};
  CHECK(exact_mutual_information(wts, conds) ==
        doctest::Approx(0.0050083668463568374718).epsilon(1e-12));

  oracle::Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = rng.index(2, 5);
    const std::size_t k = rng.index(2, 4);
    const auto w_u = rng.dist(k);
    std::vector<std::vector<double>> raw;
    std::vector<ProbDist> cs;
    for (std::size_t u = 0; u < k; ++u) {
      raw.push_back(rng.dist(n));
      cs.push_back(dist(raw.back()));
    }
    CHECK(std::abs(exact_mutual_information(w_u, cs) - oracle::mutual_information(w_u, raw)) <= 1e-13);
  }
}
