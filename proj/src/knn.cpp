#include "specfp/knn.hpp"

#include <algorithm>
#include <string>

#include "specfp/errors.hpp"

namespace specfp {

std::vector<std::size_t> knn_neighbors(std::span<const TrainSample> train,
                                       const std::vector<double>& query, int k) {
    if (train.empty())
        throw ConfigError("knn: empty training set");
    if (k < 1 || static_cast<std::size_t>(k) > train.size())
        throw ConfigError("knn: k must lie in [1, " + std::to_string(train.size()) + "], got " +
                          std::to_string(k));

    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const std::vector<double>& p = train[i].input;
        if (p.size() != query.size())
            throw ShapeError("knn: training point " + std::to_string(i) + " has length " +
                             std::to_string(p.size()) + " but the query has " +
                             std::to_string(query.size()));
        double d2 = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double d = p[j] - query[j];
            d2 += d * d;
        }
        order.emplace_back(d2, i);
    }
    // (distance, index) pairs sort ties by training order.
    std::sort(order.begin(), order.end());

    std::vector<std::size_t> out(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        out[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)].second;
    return out;
}

std::pair<double, double> knn_predict(std::span<const TrainSample> train,
                                      const std::vector<double>& query, int k) {
    const std::vector<std::size_t> nn = knn_neighbors(train, query, k);
    double x = 0.0, y = 0.0;
    for (std::size_t i : nn) {
        x += train[i].x;
        y += train[i].y;
    }
    return {x / static_cast<double>(k), y / static_cast<double>(k)};
}

} // namespace specfp
