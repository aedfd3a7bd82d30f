#include "specfp/spectral.hpp"

#include <cmath>
#include <string>

#include "specfp/errors.hpp"

namespace specfp {

void SubBandLayout::validate() const {
    if (count < 1)
        throw ValidationError("layout: count must be >= 1, got " + std::to_string(count));
    if (static_cast<int>(centers.size()) != count)
        throw ValidationError("layout: " + std::to_string(centers.size()) + " centers for count " +
                              std::to_string(count));
    for (double c : centers)
        if (!std::isfinite(c))
            throw ValidationError("layout: non-finite center wavelength");
    for (std::size_t i = 1; i < centers.size(); ++i)
        if (centers[i] <= centers[i - 1])
            throw ValidationError("layout: centers must be strictly ascending");
    if (range_start > centers.front() || centers.back() > range_end)
        throw ValidationError("layout: centers must lie within [range_start, range_end]");
}

std::shared_ptr<const SubBandLayout> SubBandLayout::as7265x() {
    static const LayoutPtr layout = make(SubBandLayout{
        18,
        {410, 435, 460, 485, 510, 535, 560, 585, 610, 645, 680, 705, 730, 760, 810, 860, 900, 940},
        410,
        940,
    });
    return layout;
}

std::shared_ptr<const SubBandLayout> SubBandLayout::evenly_spaced(int n, double start, double end) {
    SubBandLayout layout;
    layout.count = n;
    layout.range_start = start;
    layout.range_end = end;
    if (n == 1) {
        layout.centers = {(start + end) / 2.0};
    } else {
        for (int i = 0; i < n; ++i)
            layout.centers.push_back(start + (end - start) * i / (n - 1));
    }
    return make(std::move(layout));
}

std::shared_ptr<const SubBandLayout> SubBandLayout::make(SubBandLayout layout) {
    layout.validate();
    return std::make_shared<const SubBandLayout>(std::move(layout));
}

Spectrum::Spectrum(LayoutPtr layout, std::vector<double> energy)
    : layout_(std::move(layout)), energy_(std::move(energy)) {
    if (!layout_)
        throw ValidationError("spectrum: null layout");
    if (static_cast<int>(energy_.size()) != layout_->count)
        throw ValidationError("spectrum: " + std::to_string(energy_.size()) + " energies for a " +
                              std::to_string(layout_->count) + "-band layout");
    for (double e : energy_) {
        if (!std::isfinite(e))
            throw ValidationError("spectrum: non-finite energy");
        if (e < 0.0)
            throw ValidationError("spectrum: negative energy " + std::to_string(e));
    }
}

Spectrum Spectrum::zero(LayoutPtr layout) {
    std::size_t n = layout ? static_cast<std::size_t>(layout->count) : 0;
    return Spectrum(std::move(layout), std::vector<double>(n, 0.0));
}

bool Spectrum::same_layout(const Spectrum& other) const {
    return layout_ == other.layout_ || *layout_ == *other.layout_;
}

IntensityReading intensity_of(const Spectrum& s) {
    double sum = 0.0;
    for (double e : s.energy())
        sum += e;
    return IntensityReading{sum};
}

Spectrum spectrum_add(const Spectrum& a, const Spectrum& b) {
    if (!a.same_layout(b))
        throw LayoutMismatchError("spectrum_add: operands use different sub-band layouts");
    std::vector<double> out(a.energy());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += b.energy()[i];
    return Spectrum(a.layout_ptr(), std::move(out));
}

Spectrum spectrum_scale(const Spectrum& s, double k) {
    if (!(k >= 0.0) || !std::isfinite(k))
        throw ValidationError("spectrum_scale: scale must be finite and >= 0");
    std::vector<double> out(s.energy());
    for (double& e : out)
        e *= k;
    return Spectrum(s.layout_ptr(), std::move(out));
}

} // namespace specfp
