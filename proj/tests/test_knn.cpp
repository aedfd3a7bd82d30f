#include <doctest.h>

#include <cmath>
#include <vector>

#include "specfp/errors.hpp"
#include "specfp/knn.hpp"
#include "specfp/rng.hpp"

using namespace specfp;

namespace {

TrainSample point(std::vector<double> input, double x, double y) {
    TrainSample s;
    s.input = std::move(input);
    s.x = x;
    s.y = y;
    return s;
}

// Independent oracle: repeated linear minimum scans with strict comparison,
// so ties resolve to the earliest index.
std::vector<std::size_t> oracle_neighbors(const std::vector<TrainSample>& train,
                                          const std::vector<double>& query, int k) {
    std::vector<bool> used(train.size(), false);
    std::vector<std::size_t> out;
    for (int round = 0; round < k; ++round) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            if (used[i])
                continue;
            double d2 = 0.0;
            for (std::size_t j = 0; j < query.size(); ++j) {
                const double d = train[i].input[j] - query[j];
                d2 += d * d;
            }
            if (d2 < best) {
                best = d2;
                best_i = i;
            }
        }
        used[best_i] = true;
        out.push_back(best_i);
    }
    return out;
}

} // namespace

TEST_CASE("a single training point answers every query") {
    std::vector<TrainSample> train = {point({1, 2, 3}, 4.5, -1.0)};
    auto [x, y] = knn_predict(train, {100, 100, 100}, 1);
    CHECK(x == 4.5);
    CHECK(y == -1.0);
}

TEST_CASE("an exact match is its own nearest neighbor") {
    std::vector<TrainSample> train = {point({0, 0}, 0, 0), point({1, 1}, 1, 1),
                                      point({2, 2}, 2, 2)};
    auto [x, y] = knn_predict(train, {1, 1}, 1);
    CHECK(x == 1.0);
    CHECK(y == 1.0);
}

TEST_CASE("prediction is the mean of the k nearest coordinates") {
    std::vector<TrainSample> train = {point({0}, 0, 0), point({1}, 2, 2), point({10}, 9, 9)};
    auto [x, y] = knn_predict(train, {0.4}, 2);
    CHECK(x == 1.0);
    CHECK(y == 1.0);
}

TEST_CASE("ties break in favor of earlier training points") {
    std::vector<TrainSample> train = {point({1, 0}, 1, 0), point({-1, 0}, -1, 0),
                                      point({0, 1}, 0, 1)};
    // the origin is equidistant from all three
    std::vector<std::size_t> nn = knn_neighbors(train, {0, 0}, 3);
    CHECK(nn == std::vector<std::size_t>{0, 1, 2});
    auto [x, y] = knn_predict(train, {0, 0}, 1);
    CHECK(x == 1.0);
    CHECK(y == 0.0);
}

TEST_CASE("knn matches the exhaustive oracle on random sets") {
    RngStream rng(246);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 50;
        const int dim = 1 + static_cast<int>(rng.index(6));
        std::vector<TrainSample> train;
        for (int i = 0; i < n; ++i) {
            std::vector<double> in(static_cast<std::size_t>(dim));
            for (double& v : in)
                v = rng.uniform(-5, 5);
            train.push_back(point(in, rng.uniform(0, 10), rng.uniform(0, 10)));
        }
        std::vector<double> query(static_cast<std::size_t>(dim));
        for (double& v : query)
            v = rng.uniform(-5, 5);

        const int k = 3;
        std::vector<std::size_t> got = knn_neighbors(train, query, k);
        std::vector<std::size_t> expected = oracle_neighbors(train, query, k);
        CHECK(got == expected);

        auto [x, y] = knn_predict(train, query, k);
        double ox = 0, oy = 0;
        for (std::size_t i : expected) {
            ox += train[i].x / k;
            oy += train[i].y / k;
        }
        CHECK(x == doctest::Approx(ox).epsilon(1e-15));
        CHECK(y == doctest::Approx(oy).epsilon(1e-15));
    }
}

TEST_CASE("knn validates its inputs") {
    std::vector<TrainSample> empty;
    CHECK_THROWS_AS(knn_predict(empty, {1}, 1), ConfigError);

    std::vector<TrainSample> train = {point({1, 2}, 0, 0), point({3, 4}, 1, 1)};
    CHECK_THROWS_AS(knn_predict(train, {1, 2}, 0), ConfigError);
    CHECK_THROWS_AS(knn_predict(train, {1, 2}, 3), ConfigError);
    CHECK_THROWS_AS(knn_predict(train, {1, 2, 3}, 1), ShapeError);
}
