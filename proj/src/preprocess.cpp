#include "specfp/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "specfp/errors.hpp"
#include "specfp/rng.hpp"

namespace specfp {

void SubBandMask::validate(int layout_count) const {
    if (selected.empty())
        throw ConfigError("mask: empty band selection");
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (selected[i] < 0 || selected[i] >= layout_count)
            throw ConfigError("mask: band index " + std::to_string(selected[i]) +
                              " outside [0, " + std::to_string(layout_count) + ")");
        if (i > 0 && selected[i] <= selected[i - 1])
            throw ConfigError("mask: band indices must be unique and ascending");
    }
}

SubBandMask SubBandMask::full(int layout_count) {
    SubBandMask m;
    m.selected.resize(static_cast<std::size_t>(layout_count));
    std::iota(m.selected.begin(), m.selected.end(), 0);
    return m;
}

NormalizeResult normalize(const std::vector<double>& v) {
    if (v.empty())
        throw ConfigError("normalize: empty vector");
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it, hi = *hi_it;
    NormalizeResult res;
    res.values.resize(v.size());
    if (hi == lo) {
        res.degenerate = true; // all-equal sample: no spectral shape left
        return res;
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < v.size(); ++i)
        res.values[i] = (v[i] - lo) / span;
    return res;
}

namespace {

// All k-subsets of {0..n-1}, lexicographic.
std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(k));
    std::iota(cur.begin(), cur.end(), 0);
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i)
            --i;
        if (i < 0)
            break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

} // namespace

std::vector<SubBandMask> rgb_restricted_masks(int k, int layout_count) {
    if (layout_count < 3 || layout_count % 3 != 0)
        throw ConfigError("rgb masks: layout count " + std::to_string(layout_count) +
                          " is not divisible into three color blocks");
    const int group = layout_count / 3;
    if (k < 1 || k > group)
        throw ConfigError("rgb masks: k must be in [1, " + std::to_string(group) + "], got " +
                          std::to_string(k));

    const std::vector<std::vector<int>> per_block = combinations(group, k);
    std::vector<SubBandMask> out;
    out.reserve(per_block.size() * per_block.size() * per_block.size());
    for (const auto& a : per_block)
        for (const auto& b : per_block)
            for (const auto& c : per_block) {
                SubBandMask m;
                m.selected.reserve(static_cast<std::size_t>(3 * k));
                for (int i : a)
                    m.selected.push_back(i);
                for (int i : b)
                    m.selected.push_back(group + i);
                for (int i : c)
                    m.selected.push_back(2 * group + i);
                out.push_back(std::move(m));
            }
    return out;
}

std::vector<SubBandMask> random_masks(int n, int trials, std::uint64_t seed, int layout_count) {
    if (n < 1 || n > layout_count)
        throw ConfigError("random masks: n must be in [1, " + std::to_string(layout_count) +
                          "], got " + std::to_string(n));
    if (trials < 1)
        throw ConfigError("random masks: trials must be >= 1");
    if (n == layout_count)
        return {SubBandMask::full(layout_count)};

    RngStream rng(seed);
    std::vector<SubBandMask> out;
    out.reserve(static_cast<std::size_t>(trials));
    std::vector<int> pool(static_cast<std::size_t>(layout_count));
    for (int t = 0; t < trials; ++t) {
        std::iota(pool.begin(), pool.end(), 0);
        SubBandMask m;
        m.selected.reserve(static_cast<std::size_t>(n));
        // Partial Fisher-Yates: draw n distinct indices.
        for (int i = 0; i < n; ++i) {
            std::size_t j = i + rng.index(pool.size() - static_cast<std::size_t>(i));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
            m.selected.push_back(pool[static_cast<std::size_t>(i)]);
        }
        std::sort(m.selected.begin(), m.selected.end());
        out.push_back(std::move(m));
    }
    return out;
}

ModelInput assemble(const Fingerprint& fp, const AssembleSpec& spec) {
    if (spec.sensors.empty())
        throw ConfigError("assemble: empty sensor list");
    if (fp.spectra.empty())
        throw ConfigError("assemble: fingerprint carries no spectra");
    const int n = fp.spectra.begin()->second.bands();

    SubBandMask mask = spec.mask;
    if (spec.mode == FeatureMode::spectral) {
        if (mask.selected.empty())
            mask = SubBandMask::full(n);
        mask.validate(n);
    }

    ModelInput out;
    const std::size_t per_sensor = spec.mode == FeatureMode::intensity ? 1 : mask.size();
    out.values.reserve(spec.sensors.size() * per_sensor);

    for (const std::string& label : spec.sensors) {
        auto it = fp.spectra.find(label);
        if (it == fp.spectra.end())
            throw ConfigError("assemble: fingerprint has no sensor '" + label + "'");
        const Spectrum& s = it->second;
        if (spec.mode == FeatureMode::intensity) {
            out.values.push_back(intensity_of(s).value);
        } else {
            for (int band : mask.selected)
                out.values.push_back(s[static_cast<std::size_t>(band)]);
        }
    }

    if (spec.normalized) {
        if (spec.scope == NormScope::per_sample) {
            NormalizeResult res = normalize(out.values);
            out.values = std::move(res.values);
            out.degenerate = res.degenerate;
        } else {
            for (std::size_t si = 0; si < spec.sensors.size(); ++si) {
                std::vector<double> block(out.values.begin() + si * per_sensor,
                                          out.values.begin() + (si + 1) * per_sensor);
                NormalizeResult res = normalize(block);
                std::copy(res.values.begin(), res.values.end(),
                          out.values.begin() + si * per_sensor);
                out.degenerate = out.degenerate || res.degenerate;
            }
        }
    }
    return out;
}

AssembleSpec resolve_spec(const AssembleSpec& spec, const Dataset& d) {
    AssembleSpec out = spec;
    if (out.sensors.empty()) {
        out.sensors = d.sensors();
    } else {
        std::set<std::string> known(d.sensors().begin(), d.sensors().end());
        std::set<std::string> seen;
        for (const std::string& label : out.sensors) {
            if (!known.count(label))
                throw ConfigError("unknown sensor '" + label + "'");
            if (!seen.insert(label).second)
                throw ConfigError("sensor '" + label + "' listed twice");
        }
    }
    if (out.mode == FeatureMode::spectral) {
        if (out.mask.selected.empty())
            out.mask = SubBandMask::full(d.layout()->count);
        out.mask.validate(d.layout()->count);
    } else {
        out.mask.selected.clear();
    }
    return out;
}

std::size_t input_length(const AssembleSpec& resolved) {
    const std::size_t per_sensor =
        resolved.mode == FeatureMode::intensity ? 1 : resolved.mask.size();
    return resolved.sensors.size() * per_sensor;
}

} // namespace specfp
