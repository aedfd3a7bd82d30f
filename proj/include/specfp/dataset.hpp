#pragma once

#include <map>
#include <string>
#include <vector>

#include "specfp/rng.hpp"
#include "specfp/scene.hpp"
#include "specfp/spectral.hpp"

namespace specfp {

/// One labeled sample: per-sensor spectra plus location and group tags.
struct Fingerprint {
    std::string spot_id;
    double x = 0.0;
    double y = 0.0;
    std::map<std::string, Spectrum> spectra; // sensor label -> spectrum, ordered by label
    int day = 0;
    std::string condition = "default";
    double timestamp = 0.0; // seconds
};

/// AS7265x-style sensor noise: +/- relative accuracy bound plus a precision
/// floor the readings are quantized to.
struct NoiseModel {
    double relative_accuracy = 0.12; // +/- bound on multiplicative error
    double precision_floor = 28.6;   // nW/cm^2; 0 disables quantization

    void validate() const;
};

/// Immutable collection of fingerprints sharing one layout and sensor set.
class Dataset {
public:
    Dataset(LayoutPtr layout, std::vector<Fingerprint> fingerprints);

    const LayoutPtr& layout() const { return layout_; }
    const std::vector<Fingerprint>& fingerprints() const { return fingerprints_; }
    std::size_t size() const { return fingerprints_.size(); }

    /// Spot table: unique (id, x, y) in first-appearance order.
    const std::vector<Spot>& spots() const { return spots_; }
    /// Sensor labels, sorted; identical for every fingerprint.
    const std::vector<std::string>& sensors() const { return sensors_; }
    /// Distinct day tags, ascending.
    std::vector<int> days() const;
    /// Distinct condition tags, in first-appearance order.
    std::vector<std::string> conditions() const;

private:
    LayoutPtr layout_;
    std::vector<Fingerprint> fingerprints_;
    std::vector<Spot> spots_;
    std::vector<std::string> sensors_;
};

/// Per band: multiply by (1+u), u ~ U[-accuracy, +accuracy], then quantize to
/// the nearest multiple of the precision floor, clamping at zero.
Spectrum apply_noise(const Spectrum& s, const NoiseModel& m, RngStream& rng);

enum class GroupKey { day, condition };

/// Partition by tag: test gets every fingerprint whose tag equals `held_out`.
/// Throws ConfigError for an unknown tag or an empty train side.
std::pair<Dataset, Dataset> split_leave_one_group_out(const Dataset& d, GroupKey key,
                                                      const std::string& held_out);

/// CSV log with columns day,condition,spot_id,x,y,sensor,timestamp,c1..cN.
/// One row per (fingerprint, sensor); shortest round-trip decimals; LF endings.
std::string serialize_log(const Dataset& d);

/// Parse a CSV log. N is inferred from the header; when `layout` is given it
/// must match, otherwise the AS7265x layout (N=18) or an evenly spaced one is
/// assumed. Throws ParseError with a row number on malformed input.
Dataset parse_log(const std::string& text, LayoutPtr layout = nullptr);

void write_log(const Dataset& d, const std::string& path);
Dataset read_log(const std::string& path, LayoutPtr layout = nullptr);

} // namespace specfp
