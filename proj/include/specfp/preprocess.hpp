#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specfp/dataset.hpp"

namespace specfp {

/// Selection of sub-band indices into a layout, sorted ascending.
struct SubBandMask {
    std::vector<int> selected;

    /// Throws ConfigError when empty, out of range, unsorted or duplicated.
    void validate(int layout_count) const;

    std::size_t size() const { return selected.size(); }

    static SubBandMask full(int layout_count);
};

struct NormalizeResult {
    std::vector<double> values;
    bool degenerate = false; // max == min: all zeros returned, flagged
};

/// Min-max normalization over the whole vector: (v - min) / (max - min).
NormalizeResult normalize(const std::vector<double>& v);

/// All masks picking exactly k bands from each of the three equal consecutive
/// color blocks of the layout. The layout count must be divisible by 3 and
/// 1 <= k <= count/3. For the 18-band layout this yields C(6,k)^3 masks.
std::vector<SubBandMask> rgb_restricted_masks(int k, int layout_count = 18);

/// `trials` masks of n distinct bands each, deterministic per seed. For
/// n == layout_count the single full mask is returned once.
std::vector<SubBandMask> random_masks(int n, int trials, std::uint64_t seed, int layout_count = 18);

enum class FeatureMode {
    spectral,  // selected sub-bands per sensor
    intensity, // one summed value per sensor
};

/// Scope of the min/max in normalization: across the whole per-sample vector
/// or independently per sensor block.
enum class NormScope { per_sample, per_sensor };

/// How a fingerprint is turned into a model input vector.
struct AssembleSpec {
    std::vector<std::string> sensors; // ordered subset; empty = all, in dataset order
    FeatureMode mode = FeatureMode::spectral;
    SubBandMask mask;                 // spectral mode only; empty = all bands
    bool normalized = true;
    NormScope scope = NormScope::per_sample;
};

/// Flat model input, sensor-major.
struct ModelInput {
    std::vector<double> values;
    bool degenerate = false;
};

/// Concatenate the selected features sensor-major and optionally normalize.
/// Throws ConfigError for unknown sensor labels or an empty sensor list.
ModelInput assemble(const Fingerprint& fp, const AssembleSpec& spec);

/// Resolve an AssembleSpec against a dataset: fills in the sensor list and
/// mask defaults and validates them. Returns the concrete spec.
AssembleSpec resolve_spec(const AssembleSpec& spec, const Dataset& d);

/// Length of the vector `assemble` produces for a resolved spec.
std::size_t input_length(const AssembleSpec& resolved);

} // namespace specfp
