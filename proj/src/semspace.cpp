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

#include "signform/semspace.hpp"

#include <string>
#include <vector>

#include "signform/error.hpp"

namespace signform {

PCAModel PCAModel::truncated(int d) const {
  if (d < 1 || d > output_dim()) {
    throw Error(ErrorCode::InvalidArgument,
                "cannot truncate PCA to " + std::to_string(d) + " axes");
  }
  PCAModel out;
  out.mean = mean;
  out.components = components.topRows(d);
  out.explained_variance = explained_variance.head(d);
  return out;
}

PCAModel pca_fit(const Eigen::MatrixXd& data, int d) {
  const auto n = data.rows();
  const auto dim = data.cols();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs N >= 2");
  if (d < 1 || d > std::min(n, dim)) {
    throw Error(ErrorCode::InvalidArgument,
                "PCA size " + std::to_string(d) + " outside [1, " +
                    std::to_string(std::min(n, dim)) + "]");
  }
  PCAModel model;
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  model.components = svd.matrixV().leftCols(d).transpose();
  model.explained_variance =
      sv.head(d).array().square() / static_cast<double>(n);

  for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
    Eigen::Index arg = 0;
    model.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (model.components(r, arg) < 0) model.components.row(r) *= -1.0;
  }
  return model;
}

Eigen::VectorXd pca_transform(const PCAModel& model,
                              const Eigen::VectorXd& v) {
  if (v.size() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vector has dimension " + std::to_string(v.size()) +
                    ", PCA expects " + std::to_string(model.input_dim()));
  }
  return model.components * (v - model.mean);
}

Eigen::VectorXd pca_inverse_transform(const PCAModel& model,
                                      const Eigen::VectorXd& z) {
  if (z.size() != model.output_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "projected dimension mismatch");
  }
  return model.components.transpose() * z + model.mean;
}

nlohmann::json to_json(const PCAModel& model) {
  const auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
    rows.push_back(vec(model.components.row(r).transpose()));
  }
  return {{"mean", vec(model.mean)},
          {"components", rows},
          {"explained_variance", vec(model.explained_variance)}};
}

PCAModel pca_from_json(const nlohmann::json& j) {
  const auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
        v.data(), static_cast<Eigen::Index>(v.size())));
  };
  PCAModel model;
  model.mean = vec(j.at("mean"));
  model.explained_variance = vec(j.at("explained_variance"));
  const auto& rows = j.at("components");
  model.components.resize(static_cast<Eigen::Index>(rows.size()),
                          model.mean.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::VectorXd row = vec(rows[r]);
    if (row.size() != model.mean.size()) {
      throw Error(ErrorCode::ArchiveError, "PCA component has wrong size");
    }
    model.components.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return model;
}

}  // namespace signform
