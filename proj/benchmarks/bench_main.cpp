#include <benchmark/benchmark.h>

#include <random>

#include "licp/coupling.hpp"
#include "licp/local_geom.hpp"
#include "licp/tensor.hpp"
#include "licp/windmill.hpp"

namespace {

using namespace licp;

Dtm make_dtm(std::size_t nx, std::size_t ny, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vector p(static_cast<Eigen::Index>(nx));
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
  p /= p.sum();
  Matrix w(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
  for (Eigen::Index x = 0; x < w.cols(); ++x) {
    for (Eigen::Index y = 0; y < w.rows(); ++y) w(y, x) = u(rng);
    w.col(x) /= w.col(x).sum();
  }
  return build_dtm(Channel::validate(w), ProbDist::validate(p));
}

void BM_LazyApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dtm d = make_dtm(4, 4, 1);
  const TensorOperator op(d, n);
  const Vector v = Vector::Ones(static_cast<Eigen::Index>(op.input_size()));
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(v));
}
BENCHMARK(BM_LazyApply)->DenseRange(2, 6);

void BM_DenseApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dtm d = make_dtm(4, 4, 1);
  const Matrix dense = dense_kron(d, n);
  const Vector v = Vector::Ones(dense.cols());
  for (auto _ : state) benchmark::DoNotOptimize(Vector(dense * v));
}
BENCHMARK(BM_DenseApply)->DenseRange(2, 5);

void BM_DtmSvd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dtm d = make_dtm(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(svd(d));
}
BENCHMARK(BM_DtmSvd)->DenseRange(2, 8, 2);

void BM_Rank1TwoReceivers(benchmark::State& state) {
  const auto nx = static_cast<std::size_t>(state.range(0));
  const std::vector<QuadraticForm> forms{tangent_form(make_dtm(nx, 3, 3)), tangent_form(make_dtm(nx, 4, 3))};
  for (auto _ : state) benchmark::DoNotOptimize(maxmin_rank1(forms));
}
BENCHMARK(BM_Rank1TwoReceivers)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_EnsembleWindmill(benchmark::State& state) {
  const WindmillInstance w = make_windmill(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(maxmin_ensemble(w.forms));
}
BENCHMARK(BM_EnsembleWindmill)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_ProductSingularValues(benchmark::State& state) {
  const SvdResult s = svd(make_dtm(4, 4, 4));
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(product_singular_values(s, n, 16));
}
BENCHMARK(BM_ProductSingularValues)->DenseRange(2, 6);

}  // namespace
BENCHMARK_MAIN();
