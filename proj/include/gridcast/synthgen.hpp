#pragma once

#include "gridcast/series.hpp"
#include "gridcast/timeutil.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridcast {

// Data-generating process for one consumption archetype. A series is
//   load_t = base * (1 + daily(hour) + weekly(dow) + annual(doy)) + temp(T_t) + e_t
// with AR(1) noise e_t. The daily and weekly shapes carry additive window
// offsets chosen so the deterministic part hits the night_to_day and
// weekend_to_weekday ratio targets exactly; noise and weather blur the
// realized ratios slightly.
struct ArchetypeConfig {
    std::string name;
    double base_mw = 100.0;
    double daily_amplitude = 0.0;  // relative, peak mid-afternoon
    double weekly_amplitude = 0.0; // relative, peak midweek
    double annual_amplitude = 0.0; // relative, peak at the start of January
    double night_to_day = 1.0;     // target ratio, 00-05 over 12-17 local
    double weekend_to_weekday = 1.0;
    double temp_ref_c = 15.0;
    double temp_linear = 0.0; // MW per degC from temp_ref_c
    double temp_quad = 0.0;   // MW per degC^2 from temp_ref_c
    double noise_std = 0.0;   // MW, innovations of the AR(1) term
    double ar_coeff = 0.7;    // lag-1 carryover of the noise term
    double jitter = 0.0;      // relative per-series spread of the coefficients

    void validate() const;
    nlohmann::json to_json() const;
    static ArchetypeConfig from_json(const nlohmann::json& j);

    static ArchetypeConfig residential();
    static ArchetypeConfig industrial();
};

struct SynthConfig {
    std::vector<ArchetypeConfig> archetypes;
    std::size_t series_per_archetype = 8;
    int regions = 2;
    std::size_t length_hours = 0; // at least four weeks
    std::int64_t start_hour = hours_from_civil(2019, 1, 1, 0);
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static SynthConfig from_json(const nlohmann::json& j);
};

struct GroundTruth {
    std::map<std::string, std::string> archetype_of;
    std::map<std::string, std::string> drift_status; // "stable" | "drifting"
    std::map<std::string, std::size_t> clamp_count;  // positivity clamps per series
};

struct SynthResult {
    SeriesCollection collection;
    GroundTruth truth;
};

// Deterministic per seed. The shared temperature channel uses sub-stream 0;
// series i uses sub-stream 1+i, so adding or dropping series never changes
// the others. Regions are assigned round-robin. Values are clamped at 1% of
// the series' base; clamps are counted, never silent.
SynthResult generate_collection(const SynthConfig& cfg);

struct DriftEvent {
    enum class Kind { sudden, incremental, recurring };
    Kind kind = Kind::sudden;
    std::int64_t start_hour = 0;
    // sudden: multiplicative factor (> 0). incremental: ramp slope per hour,
    // factor 1 + slope*(t - start) clamped to 1 +- cap. recurring: daily
    // amplitude delta, factor 1 + magnitude*cos(2pi(h-15)/24), |magnitude| < 1.
    double magnitude = 1.0;
    double cap = 0.5;
    std::vector<std::string> affected;
};

struct DriftResult {
    SeriesCollection collection;
    std::map<std::string, std::string> labels; // every series: drifting | stable
};

// Values before the earliest event start are bit-identical to the input.
DriftResult inject_drift(const SeriesCollection& c, const std::vector<DriftEvent>& events);

// Wide-CSV emission in the same shapes the ingestion side reads.
std::string collection_to_wide_csv(const SeriesCollection& c);
std::string exogenous_to_wide_csv(const SeriesCollection& c);
std::string hierarchy_to_csv(const SeriesCollection& c);
std::string labels_to_csv(const SeriesCollection& c, const GroundTruth& truth);

} // namespace gridcast
