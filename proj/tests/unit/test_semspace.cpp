// Copyright 2026 The signform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"

#include <cmath>
#include <algorithm>
#include <numeric>
#include <random>

#include "signform/error.hpp"
#include "signform/semspace.hpp"

using namespace signform;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix; independent of the
// SVD route used by pca_fit.
void jacobi_eigen(MatrixXd a, VectorXd& values, MatrixXd& vectors) {
  const auto n = a.rows();
  vectors = MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
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
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values = a.diagonal();
}

MatrixXd correlated_data(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd x(n, d);
  // Correlated columns with distinct scales so eigenvalues separate.
  MatrixXd mix(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) mix(i, j) = g(rng) / (1.0 + i);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = g(rng);
  return x * mix;
}

}  // namespace

TEST_CASE("pca on points along a line captures all variance") {
  MatrixXd x(4, 2);
  x << 0, 0, 1, 2, 2, 4, 3, 6;
  const auto m = pca_fit(x, 1);
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  const double total = centered.squaredNorm() / 4.0;
  CHECK(m.explained_variance[0] == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("pca of mirrored points") {
  MatrixXd x(2, 2);
  x << 3, 4, -3, -4;
  const auto m = pca_fit(x, 1);
  CHECK(m.components(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(m.components(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.explained_variance[0] == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("full-rank pca reconstructs exactly") {
  std::mt19937_64 rng(11);
  const MatrixXd x = correlated_data(rng, 30, 6);
  const auto m = pca_fit(x, 6);
  double mse = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const VectorXd v = x.row(i).transpose();
    mse += (pca_inverse_transform(m, pca_transform(m, v)) - v).squaredNorm();
  }
  CHECK(mse / static_cast<double>(x.rows()) < 1e-8);
  CHECK(pca_transform(m, m.mean).norm() < 1e-12);
}

TEST_CASE("pca_transform is affine") {
  std::mt19937_64 rng(5);
  const MatrixXd x = correlated_data(rng, 40, 5);
  const auto m = pca_fit(x, 3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    const VectorXd lhs = pca_transform(m, a + b);
    const VectorXd rhs = pca_transform(m, a) + pca_transform(m, b) -
                         pca_transform(m, VectorXd::Zero(5));
    CHECK((lhs - rhs).norm() < 1e-10);
  }
}

TEST_CASE("pca invariants: orthonormal, sorted, monotone, matches covariance") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 10 + static_cast<int>(rng() % 41);
    const int dim = 2 + static_cast<int>(rng() % 49);
    const MatrixXd x = correlated_data(rng, n, dim);
    const int d = std::min(n, dim);
    const auto m = pca_fit(x, d);
    CHECK((m.components * m.components.transpose() -
           MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-8);
    for (int i = 1; i < d; ++i) {
      CHECK(m.explained_variance[i] <= m.explained_variance[i - 1] + 1e-12);
    }
    // Captured variance grows with d.
    const auto smaller = pca_fit(x, std::max(1, d - 1));
    CHECK(m.explained_variance.sum() >= smaller.explained_variance.sum() - 1e-9);

    // Oracle: population covariance eigen-decomposition by Jacobi rotations.
    const MatrixXd centered = x.rowwise() - x.colwise().mean();
    const MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    VectorXd values;
    MatrixXd vectors;
    jacobi_eigen(cov, values, vectors);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return values[a] > values[b]; });
    const double scale = values.cwiseAbs().maxCoeff();
    for (int k = 0; k < d; ++k) {
      const double lambda = values[order[static_cast<std::size_t>(k)]];
      CHECK(std::abs(m.explained_variance[k] - lambda) <= 1e-6 * std::max(1.0, scale));
      // Compare axes up to sign, only where the eigenvalue is well separated.
      const double gap_prev = k == 0 ? 1e9 : values[order[static_cast<std::size_t>(k - 1)]] - lambda;
      const double gap_next = k + 1 < dim ? lambda - values[order[static_cast<std::size_t>(k + 1)]] : 1e9;
      if (std::min(gap_prev, gap_next) > 1e-3 * scale) {
        const VectorXd ref = vectors.col(order[static_cast<std::size_t>(k)]);
        const double dot = std::abs(ref.dot(m.components.row(k).transpose()));
        CHECK(dot == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("pca sign convention and errors") {
  std::mt19937_64 rng(1);
  const MatrixXd x = correlated_data(rng, 20, 4);
  const auto m = pca_fit(x, 4);
  for (int r = 0; r < 4; ++r) {
    Eigen::Index arg = 0;
    m.components.row(r).cwiseAbs().maxCoeff(&arg);
    CHECK(m.components(r, arg) > 0);
  }
  CHECK_THROWS_AS(pca_fit(x, 0), Error);
  CHECK_THROWS_AS(pca_fit(x, 5), Error);
  CHECK_THROWS_AS(pca_transform(m, VectorXd::Zero(3)), Error);

  // Zero-variance data is allowed: axes arbitrary, variance zero.
  const MatrixXd flat = MatrixXd::Ones(5, 3);
  const auto z = pca_fit(flat, 2);
  CHECK(z.explained_variance.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((z.components * z.components.transpose() - MatrixXd::Identity(2, 2))
            .cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pca json round trip") {
  std::mt19937_64 rng(2);
  const auto m = pca_fit(correlated_data(rng, 12, 3), 2);
  const auto back = pca_from_json(to_json(m));
  CHECK(back.components == m.components);
  CHECK(back.mean == m.mean);
}
