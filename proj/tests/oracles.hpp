#pragma once

// Independent reference implementations used to pin expected test values.
// Everything here deliberately takes a different computational path from the
// library code it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "embedkit/rng.hpp"

namespace oracles {

// ---- PCA via dense eigendecomposition of the covariance matrix ----

struct PcaOracle {
  Eigen::MatrixXd components;  // k x d, rows sorted by decreasing variance
  Eigen::VectorXd variances;   // k
};

inline PcaOracle pca_eig(const Eigen::MatrixXd& x, int k) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index d = cov.rows();
  PcaOracle out;
  out.components.resize(k, d);
  out.variances.resize(k);
  for (int i = 0; i < k; ++i) {
    out.components.row(i) = eig.eigenvectors().col(d - 1 - i).transpose();
    out.variances(i) = eig.eigenvalues()(d - 1 - i);
  }
  return out;
}

// ---- adaptive Simpson quadrature ----

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm,
                    double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol,
                            int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_step(f, a, m, fa, flm, fm);
  const double right = simpson_step(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-12,
                        int depth = 40) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return adaptive_simpson_rec(f, a, b, fa, fm, fb,
                              simpson_step(f, a, b, fa, fm, fb), tol, depth);
}

// ---- F distribution CDF by quadrature ----
// Integrates the density with the substitution x = u^2 so the d1 = 1
// singularity at the origin disappears:
//   integrand g(u) = 2 * exp((d1/2) ln(d1/d2) + (d1-1) ln u
//                            - ((d1+d2)/2) ln(1 + d1 u^2/d2) - ln B(d1/2, d2/2))

inline double f_cdf_quadrature(double x, int d1, int d2) {
  if (x <= 0.0) return 0.0;
  const double a = d1, b = d2;
  const double lbeta =
      std::lgamma(a / 2.0) + std::lgamma(b / 2.0) - std::lgamma((a + b) / 2.0);
  auto g = [&](double u) -> double {
    if (u <= 0.0) {
      return d1 == 1 ? 2.0 * std::exp(0.5 * std::log(a / b) - lbeta) : 0.0;
    }
    const double lp = (a / 2.0) * std::log(a / b) + (a - 1.0) * std::log(u) -
                      ((a + b) / 2.0) * std::log1p(a * u * u / b) - lbeta;
    return 2.0 * std::exp(lp);
  };
  return adaptive_simpson(g, 0.0, std::sqrt(x), 1e-13, 45);
}

// ---- AUROC by brute-force pairwise comparison, ties counted 1/2 ----
// Integer accumulation with one final division, so the result is bit-exact
// comparable with any implementation using the same convention.

inline double pairwise_auroc(const Eigen::VectorXd& scores,
                             const std::vector<int>& truth) {
  std::uint64_t numerator2 = 0, pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (truth[static_cast<std::size_t>(i)] != 1) continue;
    ++pos;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      if (truth[static_cast<std::size_t>(j)] != 0) continue;
      if (scores(i) > scores(j)) numerator2 += 2;
      else if (scores(i) == scores(j)) numerator2 += 1;
    }
  }
  for (int t : truth) {
    if (t == 0) ++neg;
  }
  return static_cast<double>(numerator2) / static_cast<double>(2 * pos * neg);
}

// ---- closed-form Fisher direction for binary LDA ----

inline Eigen::VectorXd fisher_direction(const Eigen::MatrixXd& x,
                                        const std::vector<int>& cls) {
  const Eigen::Index d = x.cols();
  Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(d);
  double n0 = 0, n1 = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (cls[static_cast<std::size_t>(i)] == 0) {
      mean0 += x.row(i).transpose();
      ++n0;
    } else {
      mean1 += x.row(i).transpose();
      ++n1;
    }
  }
  mean0 /= n0;
  mean1 /= n1;
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd& mu =
        cls[static_cast<std::size_t>(i)] == 0 ? mean0 : mean1;
    const Eigen::VectorXd diff = x.row(i).transpose() - mu;
    sw += diff * diff.transpose();
  }
  sw /= (n0 + n1 - 2.0);
  return sw.ldlt().solve(mean1 - mean0);
}

// ---- rank statistics ----

inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

inline double spearman_rho(const std::vector<double>& a,
                           const std::vector<double>& b) {
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// ---- random data helpers ----

inline Eigen::MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols,
                                     embedkit::Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
  }
  return m;
}

inline Eigen::VectorXd random_unit_vector(Eigen::Index dims,
                                          embedkit::Rng& rng) {
  Eigen::VectorXd v(dims);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < dims; ++i) v(i) = rng.next_normal();
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

}  // namespace oracles
