#pragma once

#include <span>
#include <vector>

#include "specfp/nn.hpp"

namespace specfp {

/// Indices of the k nearest training points by Euclidean distance, closest
/// first; equal distances keep training-set order.
std::vector<std::size_t> knn_neighbors(std::span<const TrainSample> train,
                                       const std::vector<double>& query, int k);

/// Mean of the k nearest neighbors' coordinates.
std::pair<double, double> knn_predict(std::span<const TrainSample> train,
                                      const std::vector<double>& query, int k);

} // namespace specfp
