#include <doctest.h>

#include <cmath>
#include <string>

#include "helpers.hpp"
#include "specfp/dataset.hpp"
#include "specfp/errors.hpp"
#include "specfp/rng.hpp"
#include "specfp/sim.hpp"

using namespace specfp;
using testing::toy_scene;

namespace {

Dataset toy_dataset(int days = 2, int samples = 3, std::uint64_t seed = 77) {
    const Scene scene = toy_scene();
    NoiseModel noise;
    std::vector<Fingerprint> all;
    for (int day = 1; day <= days; ++day) {
        auto fps = generate_dataset(scene, samples, noise,
                                    RngStream(seed).fork(static_cast<std::uint64_t>(day)).seed(),
                                    {day, day == 1 ? "default" : "lamps"});
        all.insert(all.end(), fps.begin(), fps.end());
    }
    return Dataset(scene.layout, std::move(all));
}

} // namespace

TEST_CASE("noise with zero accuracy and zero floor is the identity") {
    LayoutPtr layout = SubBandLayout::as7265x();
    RngStream rng(1);
    std::vector<double> e(18);
    for (double& v : e)
        v = rng.uniform(0, 1000);
    Spectrum s(layout, e);
    RngStream noise_rng(2);
    CHECK(apply_noise(s, NoiseModel{0.0, 0.0}, noise_rng).energy() == e);
}

TEST_CASE("quantization rounds to the nearest multiple of the floor") {
    LayoutPtr layout = SubBandLayout::evenly_spaced(1, 410, 940);
    RngStream rng(3);
    // 100 / 28.6 = 3.4965..., so the nearest multiple is 3 * 28.6 = 85.8
    CHECK(std::round(100.0 / 28.6) == 3.0);
    Spectrum s(layout, {100.0});
    Spectrum q = apply_noise(s, NoiseModel{0.0, 28.6}, rng);
    CHECK(q[0] == 3.0 * 28.6);
    CHECK(q[0] == doctest::Approx(85.8));
}

TEST_CASE("noise is zero-mean: the Monte-Carlo average stays within 1%") {
    LayoutPtr layout = SubBandLayout::evenly_spaced(1, 410, 940);
    Spectrum s(layout, {1000.0});
    NoiseModel m{0.12, 0.0};
    RngStream rng(9);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        sum += apply_noise(s, m, rng)[0];
    CHECK(std::abs(sum / n - 1000.0) < 10.0);
}

TEST_CASE("noisy readings never go negative") {
    LayoutPtr layout = SubBandLayout::evenly_spaced(2, 410, 940);
    Spectrum s(layout, {10.0, 5.0}); // well below the floor
    NoiseModel m{0.12, 28.6};
    RngStream rng(4);
    for (int i = 0; i < 100; ++i)
        for (double e : apply_noise(s, m, rng).energy())
            CHECK(e >= 0.0);
}

TEST_CASE("noise model invariants") {
    CHECK_THROWS_AS(NoiseModel{-0.1, 0.0}.validate(), ValidationError);
    CHECK_THROWS_AS(NoiseModel{0.1, -1.0}.validate(), ValidationError);
}

TEST_CASE("a two-row log parses into two fingerprints") {
    std::string text = "day,condition,spot_id,x,y,sensor,timestamp";
    for (int i = 1; i <= 18; ++i)
        text += ",c" + std::to_string(i);
    text += "\n";
    text += "1,default,a,0,0,chest,0";
    for (int i = 0; i < 18; ++i)
        text += ",100";
    text += "\n1,default,b,1,0,chest,0";
    for (int i = 0; i < 18; ++i)
        text += ",50";
    text += "\n";

    Dataset d = parse_log(text);
    CHECK(d.size() == 2);
    CHECK(d.layout()->count == 18);
    CHECK(*d.layout() == *SubBandLayout::as7265x());
    CHECK(d.sensors() == std::vector<std::string>{"chest"});
    CHECK(d.spots().size() == 2);
}

TEST_CASE("a short row is rejected with its row number") {
    std::string text = "day,condition,spot_id,x,y,sensor,timestamp,c1,c2,c3\n";
    text += "1,default,a,0,0,chest,0,1,2,3\n";
    text += "1,default,a,0,0,chest,1,1,2\n"; // 17-channels-when-18 analogue
    try {
        parse_log(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 3);
    }
}

TEST_CASE("non-numeric cells and missing columns are named") {
    std::string good_header = "day,condition,spot_id,x,y,sensor,timestamp,c1\n";
    try {
        parse_log(good_header + "1,default,a,0,0,chest,0,oops\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(std::string(e.what()).find("c1") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_log("day,condition,x,y,sensor,timestamp,c1\n"), ParseError);
    CHECK_THROWS_AS(parse_log(""), ParseError);
    CHECK_THROWS_AS(parse_log(good_header), ParseError); // header but no rows
}

TEST_CASE("layout mismatch against the configured layout is rejected") {
    std::string text = "day,condition,spot_id,x,y,sensor,timestamp,c1,c2\n";
    text += "1,default,a,0,0,chest,0,1,2\n";
    CHECK_THROWS_AS(parse_log(text, SubBandLayout::as7265x()), ParseError);
    CHECK_NOTHROW(parse_log(text, SubBandLayout::evenly_spaced(2, 410, 940)));
}

TEST_CASE("serialize then parse is the identity, byte for byte") {
    Dataset d = toy_dataset();
    const std::string text = serialize_log(d);
    Dataset back = parse_log(text, d.layout());
    CHECK(back.size() == d.size());
    CHECK(serialize_log(back) == text);

    for (std::size_t i = 0; i < d.size(); ++i) {
        const Fingerprint& a = d.fingerprints()[i];
        const Fingerprint& b = back.fingerprints()[i];
        CHECK(a.spot_id == b.spot_id);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        CHECK(a.day == b.day);
        CHECK(a.condition == b.condition);
        CHECK(a.timestamp == b.timestamp);
        for (const auto& [label, spectrum] : a.spectra)
            CHECK(spectrum.energy() == b.spectra.at(label).energy());
    }
}

TEST_CASE("holding out one day partitions the dataset") {
    Dataset d = toy_dataset(3);
    auto [train, test] = split_leave_one_group_out(d, GroupKey::day, "2");
    CHECK(train.size() + test.size() == d.size());
    for (const Fingerprint& fp : test.fingerprints())
        CHECK(fp.day == 2);
    for (const Fingerprint& fp : train.fingerprints())
        CHECK(fp.day != 2);
}

TEST_CASE("holding out a condition partitions the dataset") {
    Dataset d = toy_dataset(2);
    auto [train, test] = split_leave_one_group_out(d, GroupKey::condition, "lamps");
    CHECK(train.size() + test.size() == d.size());
    for (const Fingerprint& fp : test.fingerprints())
        CHECK(fp.condition == "lamps");
}

TEST_CASE("unknown and degenerate holdout tags are rejected") {
    Dataset d = toy_dataset(1);
    CHECK_THROWS_AS(split_leave_one_group_out(d, GroupKey::day, "9"), ConfigError);
    // holding out the only day would leave no training data
    CHECK_THROWS_AS(split_leave_one_group_out(d, GroupKey::day, "1"), ConfigError);
}

TEST_CASE("dataset invariants are enforced") {
    const Scene scene = toy_scene();
    NoiseModel noise;
    auto fps = generate_dataset(scene, 2, noise, 11);

    CHECK_THROWS_AS(Dataset(scene.layout, {}), ValidationError);

    // inconsistent sensor sets
    auto broken = fps;
    broken[1].spectra.erase("wrist");
    CHECK_THROWS_AS(Dataset(scene.layout, broken), ValidationError);

    // one spot id, two coordinate claims
    broken = fps;
    broken[1].spot_id = broken[0].spot_id;
    broken[1].x = broken[0].x + 1.0;
    CHECK_THROWS_AS(Dataset(scene.layout, broken), ValidationError);

    Dataset ok(scene.layout, fps);
    CHECK(ok.days() == std::vector<int>{0});
    CHECK(ok.conditions() == std::vector<std::string>{"default"});
    CHECK(ok.sensors() == std::vector<std::string>{"chest", "wrist"});
}
