#pragma once

#include <memory>
#include <vector>

namespace specfp {

/// Sub-band layout of a spectral sensor: how many channels it reports and
/// which wavelength each channel is centered on.
struct SubBandLayout {
    int count = 0;
    std::vector<double> centers; // nm, strictly ascending
    double range_start = 0.0;    // nm
    double range_end = 0.0;      // nm

    /// Throws ValidationError if any invariant is violated.
    void validate() const;

    bool operator==(const SubBandLayout&) const = default;

    /// The 18-channel AS7265x layout, 410-940 nm.
    static std::shared_ptr<const SubBandLayout> as7265x();
    /// n channels evenly spaced across [start, end].
    static std::shared_ptr<const SubBandLayout> evenly_spaced(int n, double start, double end);
    static std::shared_ptr<const SubBandLayout> make(SubBandLayout layout);
};

using LayoutPtr = std::shared_ptr<const SubBandLayout>;

/// Per-sub-band radiant energies (nW/cm^2) tied to one layout.
class Spectrum {
public:
    Spectrum(LayoutPtr layout, std::vector<double> energy);

    static Spectrum zero(LayoutPtr layout);

    const SubBandLayout& layout() const { return *layout_; }
    const LayoutPtr& layout_ptr() const { return layout_; }
    const std::vector<double>& energy() const { return energy_; }
    double operator[](std::size_t band) const { return energy_[band]; }
    int bands() const { return layout_->count; }

    /// True if both spectra are tied to layouts that compare equal by value.
    bool same_layout(const Spectrum& other) const;

private:
    LayoutPtr layout_;
    std::vector<double> energy_;
};

/// A single scalar intensity value (nW/cm^2).
struct IntensityReading {
    double value = 0.0;
};

/// Sum of all sub-band energies.
IntensityReading intensity_of(const Spectrum& s);

/// Element-wise sum. Throws LayoutMismatchError if layouts differ.
Spectrum spectrum_add(const Spectrum& a, const Spectrum& b);

/// Element-wise scaling by k >= 0.
Spectrum spectrum_scale(const Spectrum& s, double k);

} // namespace specfp
