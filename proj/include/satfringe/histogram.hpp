#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "photon_sim.hpp"

namespace satfringe {

// Arrival-difference histogram.  Deltas are folded into [0, window) with a
// configurable shift placing the nominal early peak at origin_fraction of
// the window, so all three peaks sit away from the wrap point.

/// Default analysis (fit) binning: 8 TDC grains.  An exact multiple of the
/// 81 ps timestamp quantum tiles the quantized deltas evenly (no moire
/// against the TDC grid), and at ~100 counts per peak it keeps enough counts
/// per bin that 1/max(count,1) least squares stays near-unbiased; at the raw
/// 81 ps grain the same estimator underestimates peak areas by tens of
/// percent (single-count bins dominate).
inline constexpr double default_fit_bin_s = 8 * 81e-12;

struct DeltaHistogram {
    double bin_width_s = 81e-12;
    double origin_s = 0.0;   // shift applied to delta before folding
    double window_s = 0.0;   // = bin_width * counts.size()
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const {
        std::uint64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
    double bin_left(std::size_t k) const { return static_cast<double>(k) * bin_width_s; }
    double bin_center(std::size_t k) const { return (static_cast<double>(k) + 0.5) * bin_width_s; }
};

/// The bin grid is truncated to a whole number of bins (81 ps does not
/// divide 10 ns: 123 bins cover 9.963 ns), but deltas are folded modulo the
/// requested window — the true period of the pulse train — so peak
/// positions stay exact for any bin width.  The sub-bin remainder slice
/// (e.g. [9.963, 10) ns) is absorbed into the last bin; with the default
/// origin it carries only a far tail of the late peak.
inline DeltaHistogram build_histogram(const std::vector<DetectionEvent>& events,
                                      double bin_width_s, double window_s,
                                      double origin_fraction = 0.15) {
    if (!(bin_width_s > 0.0)) throw validation_error("build_histogram: bin width must be positive");
    if (!(window_s >= bin_width_s))
        throw validation_error("build_histogram: window must hold at least one bin");
    const std::size_t nbins = static_cast<std::size_t>(std::floor(window_s / bin_width_s + 1e-9));

    DeltaHistogram h;
    h.bin_width_s = bin_width_s;
    h.window_s = static_cast<double>(nbins) * bin_width_s;
    h.origin_s = origin_fraction * window_s;
    h.counts.assign(nbins, 0);
    for (const auto& ev : events) {
        double x = std::fmod(ev.delta_s + h.origin_s, window_s);
        if (x < 0.0) x += window_s;
        std::size_t k = static_cast<std::size_t>(x / bin_width_s);
        if (k >= nbins) k = nbins - 1; // remainder slice and fp rounding
        ++h.counts[k];
    }
    return h;
}

} // namespace satfringe
