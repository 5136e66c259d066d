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

#ifndef SIGNFORM_SEMSPACE_HPP_
#define SIGNFORM_SEMSPACE_HPP_

#include <nlohmann/json.hpp>
#include <Eigen/Dense>

namespace signform {

// Principal-axis compression of meaning vectors.
//
// Rows of `components` are orthonormal principal axes, sorted by the
// variance they capture. Variances use the population (1/N) normalization.
// Each axis's sign is fixed so that its largest-magnitude entry is positive.
struct PCAModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;          // d x D
  Eigen::VectorXd explained_variance;  // d, nonincreasing

  int input_dim() const { return static_cast<int>(mean.size()); }
  int output_dim() const { return static_cast<int>(components.rows()); }

  // Keeps only the first d axes.
  PCAModel truncated(int d) const;
};

// data is N x D, one observation per row.
PCAModel pca_fit(const Eigen::MatrixXd& data, int d);

Eigen::VectorXd pca_transform(const PCAModel& model, const Eigen::VectorXd& v);
Eigen::VectorXd pca_inverse_transform(const PCAModel& model,
                                      const Eigen::VectorXd& z);

nlohmann::json to_json(const PCAModel& model);
PCAModel pca_from_json(const nlohmann::json& j);

}  // namespace signform

#endif  // SIGNFORM_SEMSPACE_HPP_
