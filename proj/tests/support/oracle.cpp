#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

Vec jacobi_eigenvalues(Mat a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return Eigen::Map<Vec>(ev.data(), n);
}

Vec singular_values(Mat b) {
  const Eigen::Index n = b.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = b.col(p).squaredNorm();
        const double beta = b.col(q).squaredNorm();
        const double gamma = b.col(p).dot(b.col(q));
        if (std::abs(gamma) <= 1e-17 * std::sqrt(alpha * beta) || std::abs(gamma) < 1e-300) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Vec bp = b.col(p);
        b.col(p) = c * bp - s * b.col(q);
        b.col(q) = s * bp + c * b.col(q);
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sv[static_cast<std::size_t>(i)] = b.col(i).norm();
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return Eigen::Map<Vec>(sv.data(), n);
}

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double a = p[i];
    const long double b = q[i];
    s += a * std::log(a / b);
  }
  return static_cast<double>(s);
}

namespace {
long double entropy(const std::vector<long double>& p) {
  long double h = 0.0L;
  for (const long double x : p)
    if (x > 0.0L) h -= x * std::log(x);
  return h;
}
}  // namespace

double mutual_information(const std::vector<double>& w, const std::vector<std::vector<double>>& conds) {
  const std::size_t n = conds.front().size();
  std::vector<long double> mix(n, 0.0L);
  long double cond_h = 0.0L;
  for (std::size_t u = 0; u < w.size(); ++u) {
    std::vector<long double> c(conds[u].begin(), conds[u].end());
    for (std::size_t i = 0; i < n; ++i) mix[i] += w[u] * c[i];
    cond_h += w[u] * entropy(c);
  }
  return static_cast<double>(entropy(mix) - cond_h);
}

double grid_maxmin_2d(const std::vector<Mat>& forms, std::size_t n) {
  double best = -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    Vec x(2);
    x << std::cos(a), std::sin(a);
    double lo = 1e300;
    for (const Mat& f : forms) lo = std::min(lo, x.dot(f * x));
    best = std::max(best, lo);
  }
  return best;
}

Mat dtm(const Mat& w, const std::vector<double>& p) {
  Mat b(w.rows(), w.cols());
  for (Eigen::Index y = 0; y < w.rows(); ++y) {
    double py = 0.0;
    for (Eigen::Index x = 0; x < w.cols(); ++x) py += w(y, x) * p[static_cast<std::size_t>(x)];
    for (Eigen::Index x = 0; x < w.cols(); ++x) {
      b(y, x) = w(y, x) * std::sqrt(p[static_cast<std::size_t>(x)]) / std::sqrt(py);
    }
  }
  return b;
}

Mat householder_complement(const Vec& anchor) {
  const Eigen::Index n = anchor.size();
  Vec u = anchor.normalized();
  Vec v = u;
  v(0) -= 1.0;
  Mat h = Mat::Identity(n, n);
  if (v.norm() > 1e-14) h -= 2.0 * v * v.transpose() / v.squaredNorm();
  return h.rightCols(n - 1);
}

std::vector<double> Rng::dist(std::size_t n) {
  std::vector<double> p(n);
  double s = 0.0;
  for (double& x : p) s += (x = uniform(0.1, 1.0));
  for (double& x : p) x /= s;
  return p;
}

Mat Rng::channel(std::size_t ny, std::size_t nx) {
  Mat w(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
  for (Eigen::Index x = 0; x < w.cols(); ++x) {
    for (Eigen::Index y = 0; y < w.rows(); ++y) w(y, x) = uniform(0.05, 1.0);
    w.col(x) /= w.col(x).sum();
  }
  return w;
}

}  // namespace oracle
