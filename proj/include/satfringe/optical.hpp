#pragma once

#include <sstream>
#include <string>

#include "constants.hpp"
#include "errors.hpp"

namespace satfringe {

/// Source + interferometer parameters shared by every stage of the pipeline.
///
/// Kept as a plain aggregate so the math routines can be exercised outside the
/// experimentally sensible regime (oracle stress cases use delay/coherence
/// ratios down to 3); `validate()` applies the pipeline-entry constraints that
/// guarantee three separable detection peaks per pulse period.
struct OpticalConfig {
    double wavelength_vacuum_m = 532e-9;
    double coherence_time_s    = 83e-12;
    double mzi_delay_s         = 3.4e-9; // unbalanced-arm delay
    double rep_period_s        = 10e-9;  // pulse repetition period

    double angular_frequency() const { return two_pi * speed_of_light / wavelength_vacuum_m; }

    void validate() const {
        std::ostringstream bad;
        if (!(wavelength_vacuum_m > 0)) bad << "wavelength_vacuum_m must be > 0; ";
        if (!(coherence_time_s > 0)) bad << "coherence_time_s must be > 0; ";
        if (!(mzi_delay_s > 0)) bad << "mzi_delay_s must be > 0; ";
        if (!(rep_period_s > 0)) bad << "rep_period_s must be > 0; ";
        if (!(mzi_delay_s > 10.0 * coherence_time_s))
            bad << "mzi_delay_s must exceed 10 x coherence_time_s (separable peaks); ";
        if (!(mzi_delay_s < 0.5 * rep_period_s))
            bad << "mzi_delay_s must be below rep_period_s / 2 (non-overlapping periods); ";
        const std::string msg = bad.str();
        if (!msg.empty())
            throw validation_error("OpticalConfig: " + msg);
    }
};

} // namespace satfringe
