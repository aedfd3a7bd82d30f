#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "specfp/rng.hpp"

using specfp::RngStream;

TEST_CASE("same seed reproduces the same sequence") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    RngStream a(1), b(2);
    int differing = 0;
    for (int i = 0; i < 16; ++i)
        differing += a.next_u64() != b.next_u64();
    CHECK(differing > 0);
}

TEST_CASE("fork is independent of how much the parent has consumed") {
    RngStream fresh(7);
    RngStream drained(7);
    for (int i = 0; i < 50; ++i)
        drained.next_u64();
    RngStream f1 = fresh.fork(3);
    RngStream f2 = drained.fork(3);
    for (int i = 0; i < 10; ++i)
        CHECK(f1.next_u64() == f2.next_u64());

    RngStream l1 = fresh.fork("spot-a");
    RngStream l2 = drained.fork("spot-a");
    CHECK(l1.next_u64() == l2.next_u64());
}

TEST_CASE("sibling forks differ") {
    RngStream root(9);
    RngStream a = root.fork(0);
    RngStream b = root.fork(1);
    CHECK(a.next_u64() != b.next_u64());
    CHECK(root.fork("a").next_u64() != root.fork("b").next_u64());
}

TEST_CASE("next_double lies in [0,1)") {
    RngStream rng(11);
    for (int i = 0; i < 1000; ++i) {
        double v = rng.next_double();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("uniform respects its bounds and is roughly centered") {
    RngStream rng(13);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double v = rng.uniform(-2.0, 6.0);
        CHECK(v >= -2.0);
        CHECK(v < 6.0);
        sum += v;
    }
    CHECK(std::abs(sum / n - 2.0) < 0.1);
}

TEST_CASE("normal draws have near-zero mean and unit-ish variance") {
    RngStream rng(17);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = rng.normal();
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.1);
}

TEST_CASE("index stays in range and shuffle is a permutation") {
    RngStream rng(19);
    for (std::size_t n : {1, 2, 7, 100})
        for (int i = 0; i < 100; ++i)
            CHECK(rng.index(n) < n);

    std::vector<int> v(25);
    std::iota(v.begin(), v.end(), 0);
    RngStream s(23);
    s.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 25; ++i)
        CHECK(sorted[static_cast<std::size_t>(i)] == i);

    // deterministic per seed
    std::vector<int> w(25);
    std::iota(w.begin(), w.end(), 0);
    RngStream s2(23);
    s2.shuffle(w);
    CHECK(v == w);
}
