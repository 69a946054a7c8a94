#include <cmath>
#include <vector>

#include "doctest.h"
#include "licp/coupling.hpp"
#include "licp/error.hpp"
#include "licp/windmill.hpp"
#include "oracle.hpp"

using namespace licp;

namespace {

ProbDist dist(std::vector<double> v) { return ProbDist::validate(std::span<const double>(v)); }

std::vector<Dtm> random_dtms(oracle::Rng& rng, std::size_t nx, std::size_t k) {
  const ProbDist p = dist(rng.dist(nx));
  std::vector<Dtm> out;
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(build_dtm(Channel::validate(rng.channel(rng.index(2, 4), nx)), p));
  }
  return out;
}

std::vector<QuadraticForm> forms_of(const std::vector<Dtm>& d) {
  std::vector<QuadraticForm> f;
  for (const Dtm& x : d) f.push_back(tangent_form(x));
  return f;
}

// Dual objective on a fine simplex grid (k = 2 or 3) with the Jacobi oracle.
double dual_grid(const std::vector<QuadraticForm>& forms, int steps) {
  double best = 1e300;
  const int k = static_cast<int>(forms.size());
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; b <= (k == 3 ? steps - a : 0); ++b) {
      std::vector<double> lam;
      if (k == 2) {
        lam = {a / double(steps), 1.0 - a / double(steps)};
      } else {
        lam = {a / double(steps), b / double(steps), (steps - a - b) / double(steps)};
      }
      Matrix m = Matrix::Zero(forms[0].matrix.rows(), forms[0].matrix.cols());
      for (int i = 0; i < k; ++i) m += lam[static_cast<std::size_t>(i)] * forms[static_cast<std::size_t>(i)].matrix;
      best = std::min(best, oracle::jacobi_eigenvalues(m)(0));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("tangent_form eigenvalues are the squared tangent singular values") {
  oracle::Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    const auto d = random_dtms(rng, rng.index(2, 5), 1);
    const QuadraticForm f = tangent_form(d[0]);
    const Vector ev = oracle::jacobi_eigenvalues(f.matrix);
    const Vector sv = oracle::singular_values(d[0].matrix());
    for (Eigen::Index i = 0; i < ev.size(); ++i) CHECK(std::abs(ev(i) - sv(i + 1) * sv(i + 1)) <= 1e-10);
    CHECK((f.operator_matrix() - d[0].matrix()).norm() == 0.0);
  }
}

TEST_CASE("QuadraticForm::from_matrix validates") {
  CHECK_THROWS_AS(QuadraticForm::from_matrix(Matrix{{1.0, 0.2}, {0.0, 1.0}}, ProbDist::uniform(3)), Error);
  CHECK_THROWS_AS(QuadraticForm::from_matrix(Matrix{{1.5, 0.0}, {0.0, 0.2}}, ProbDist::uniform(3)), Error);
  const QuadraticForm f = QuadraticForm::from_matrix(Matrix{{1.0, 0.0}, {0.0, 0.0}}, ProbDist::uniform(3));
  // The square-root operator reproduces the form on tangent vectors.
  const Vector l = f.basis.col(0);
  CHECK(std::abs((f.operator_matrix() * l).squaredNorm() - 1.0) <= 1e-14);
}

TEST_CASE("solve_p2p returns sigma2^2 with a binary ensemble") {
  const Dtm d = build_dtm(Channel::bsc(0.1), dist({0.5, 0.5}));
  const MaxMinSolution s = solve_p2p(d, 0.01);
  CHECK(s.value == doctest::Approx(0.64).epsilon(1e-13));
  CHECK(s.gap == 0.0);
  const auto& e = std::get<CouplingEnsemble>(s.optimizer);
  CHECK(e.size() == 2);
  const auto exact = efficiency(e, std::vector<Dtm>{d}, true);
  // Frozen from a 40-digit evaluation of I(U;Y)/I(U;X).
  CHECK(exact[0] == doctest::Approx(0.63999615981208482572).epsilon(1e-10));
  CHECK(std::abs(exact[0] - 0.64) <= 0.006);
  CHECK(efficiency(e, std::vector<Dtm>{d}, false)[0] == doctest::Approx(0.64).epsilon(1e-12));
}

TEST_CASE("Two receivers: rank-1 and dual agree, matching the grid oracles") {
  oracle::Rng rng(42);
  for (int t = 0; t < 40; ++t) {
    const auto dtms = random_dtms(rng, 3, 2);
    const auto forms = forms_of(dtms);
    const MaxMinSolution s = maxmin_rank1(forms);
    CHECK(s.gap <= 1e-5);
    CHECK(s.value <= s.dual_value + 1e-12);
    CHECK(s.value >= oracle::grid_maxmin_2d({forms[0].matrix, forms[1].matrix}, 20000) - 1e-9);
    CHECK(std::abs(s.dual_value - dual_grid(forms, 4000)) <= 1e-6);
    const Vector& x = std::get<Vector>(s.optimizer);
    CHECK(std::abs(x.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(s.dual_weights.sum() - 1.0) <= 1e-12);
    CHECK_NOTHROW(solve_broadcast2(dtms[0], dtms[1]));
  }
}

TEST_CASE("Three receivers: ensemble value matches the dual bound") {
  oracle::Rng rng(77);
  for (int t = 0; t < 10; ++t) {
    const auto forms = forms_of(random_dtms(rng, 3, 3));
    const MaxMinSolution r1 = maxmin_rank1(forms);
    const MaxMinSolution en = maxmin_ensemble(forms);
    CHECK(r1.value <= r1.dual_value + 1e-12);
    CHECK(std::abs(en.value - en.dual_value) <= 1e-6);
    CHECK(std::abs(en.dual_value - dual_grid(forms, 300)) <= 1e-4);
    INFO("dual - grid = ", en.dual_value - dual_grid(forms, 300));
    CHECK(en.dual_value <= dual_grid(forms, 300) + 1e-10);
    const auto& e = std::get<CouplingEnsemble>(en.optimizer);
    Vector mean = Vector::Zero(3);
    for (std::size_t u = 0; u < e.size(); ++u) mean += e.weights()[u] * e.perturbations()[u];
    CHECK(mean.norm() <= 1e-12);
    const auto q = efficiency(e, forms);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::abs(q[i] - en.channel_values[i]) <= 1e-9);
  }
}

TEST_CASE("maxmin_dual on the windmill is one half at uniform weights") {
  const WindmillInstance w = make_windmill(3);
  const DualResult d = maxmin_dual(w.forms);
  CHECK(d.dual_value == doctest::Approx(0.5).epsilon(1e-10));
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(d.lambda(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("Duplicate forms collapse and dual weights expand back") {
  oracle::Rng rng(3);
  auto forms = forms_of(random_dtms(rng, 3, 2));
  forms.push_back(forms[0]);
  const MaxMinSolution s = maxmin_rank1(forms);
  CHECK(s.dual_weights.size() == 3);
  CHECK(s.channel_values.size() == 3);
  CHECK(s.gap <= 1e-5);
}

TEST_CASE("Solver input errors") {
  CHECK_THROWS_AS(maxmin_rank1({}), Error);
  const QuadraticForm a = QuadraticForm::from_matrix(Matrix::Identity(1, 1), ProbDist::uniform(2));
  const QuadraticForm b = QuadraticForm::from_matrix(Matrix::Identity(2, 2) * 0.5, ProbDist::uniform(3));
  CHECK_THROWS_AS(maxmin_rank1({a, b}), Error);
}

TEST_CASE("Rank-1 results are deterministic for a fixed seed") {
  oracle::Rng rng(5);
  const auto forms = forms_of(random_dtms(rng, 4, 3));
  SolverOptions o;
  o.seed = 9;
  const MaxMinSolution a = maxmin_rank1(forms, o);
  const MaxMinSolution b = maxmin_rank1(forms, o);
  CHECK(a.value == b.value);
  CHECK(std::get<Vector>(a.optimizer) == std::get<Vector>(b.optimizer));
}

TEST_CASE("frame_directions reproduce the second moment") {
  Matrix m(2, 2);
  m << 0.7, 0.2, 0.2, 0.3;
  for (std::size_t n : {2u, 3u, 5u}) {
    const auto dirs = frame_directions(m, n);
    REQUIRE(dirs.size() == n);
    Matrix acc = Matrix::Zero(2, 2);
    for (const Vector& d : dirs) {
      CHECK(std::abs(d.norm() - 1.0) <= 1e-12);
      acc += d * d.transpose();
    }
    CHECK((acc / static_cast<double>(n) - m).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("k-letter construction agrees with brute-force tensor application") {
  oracle::Rng rng(8);
  const auto dtms = random_dtms(rng, 3, 3);
  const auto forms = forms_of(dtms);
  const MaxMinSolution en = maxmin_ensemble(forms);
  const auto& e = std::get<CouplingEnsemble>(en.optimizer);
  Matrix m = Matrix::Zero(2, 2);
  for (std::size_t u = 0; u < e.size(); ++u) {
    const Vector d = forms[0].basis.transpose() * e.perturbations()[u];
    m += e.weights()[u] * d * d.transpose();
  }
  m /= m.trace();
  const KLetterResult kl = k_letter_construction(forms, frame_directions(m, 3));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(kl.per_channel_values[i] - kl.brute_force_values[i]) <= 1e-9);
    CHECK(std::abs(kl.per_channel_values[i] - en.channel_values[i]) <= 1e-8);
  }
  const auto q = efficiency(kl.ensemble, dtms, false);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(q[i] - kl.per_channel_values[i]) <= 1e-9);
}

TEST_CASE("Exact efficiency approaches the quadratic one as epsilon shrinks") {
  oracle::Rng rng(12);
  const auto dtms = random_dtms(rng, 3, 2);
  const auto forms = forms_of(dtms);
  const Vector x = std::get<Vector>(maxmin_rank1(forms).optimizer);
  const Vector l = forms[0].basis * x;
  double prev = 1e300;
  for (double eps : {0.04, 0.02, 0.01}) {
    const CouplingEnsemble e = CouplingEnsemble::make(ProbDist::uniform(2), {l, Vector(-l)}, dtms[0].input_dist(), eps);
    const auto ex = efficiency(e, dtms, true);
    const auto qu = efficiency(e, dtms, false);
    const double err = std::abs(ex[0] - qu[0]) + std::abs(ex[1] - qu[1]);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("CouplingEnsemble rejects non-zero-mean or infeasible atoms") {
  const ProbDist p = ProbDist::uniform(3);
  const Matrix q = forms_of({build_dtm(Channel::identity(3), p)})[0].basis;
  const Vector l = q.col(0);
  CHECK_THROWS_AS(CouplingEnsemble::make(ProbDist::uniform(2), {l, l}, p, 0.01), Error);
  CHECK_THROWS_AS(CouplingEnsemble::make(ProbDist::uniform(2), {l, Vector(-l)}, p, 5.0), Error);
  CHECK_THROWS_AS(CouplingEnsemble::make(ProbDist::uniform(2), {Vector::Ones(3), Vector(-Vector::Ones(3))}, p, 0.01),
                  Error);
  const CouplingEnsemble e = CouplingEnsemble::make(ProbDist::uniform(2), {l, Vector(-l)}, p, 0.01);
  CHECK(e.quadratic_input_information() == doctest::Approx(0.5e-4));
}
