#pragma once

#include "gridcast/core.hpp"
#include "gridcast/series.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace gridcast {

// Feature recipe for one-step-ahead supervised samples. The warmup window is
// fixed at 168 hours: every lag and moving-average window must fit inside it,
// so a series of length l yields exactly l - 168 rows.
inline constexpr int kWarmupHours = 168;

struct ExogenousFeature {
    std::string channel;
    bool at_target = true; // value read at the target hour (forecast-available)
    int lag = 0;           // used when at_target is false
    bool add_square = false;
};

struct FeatureSpec {
    std::vector<int> lags = {1, 2, 3, 24, 48, 72, 96, 120, 144, 168};
    std::vector<int> poly_lags = {1, 24};
    std::vector<int> poly_degrees = {2, 3};
    std::vector<int> ma_windows = {3, 12, 24, 72, 168};
    int ema_span = 168;
    bool calendar_hour = true;
    bool calendar_dow = true;
    bool calendar_month = true;
    // Calendar columns, holidays, and the pandemic flag are evaluated in
    // local time = UTC + this offset.
    int local_time_offset_hours = 0;
    std::set<std::int64_t> holidays; // local day indices
    bool has_pandemic_interval = false;
    std::int64_t pandemic_start_day = 0; // local day indices, inclusive
    std::int64_t pandemic_end_day = 0;
    std::vector<ExogenousFeature> exogenous = {
        {"temperature", /*at_target=*/true, /*lag=*/0, /*add_square=*/true}};
    std::vector<std::pair<std::string, std::string>> interactions = {
        {"lag_1", "mave_168"}, {"temperature", "hour_sin"}};

    void validate() const;
    std::vector<std::string> feature_names() const;
    // Stable textual form; equal specs produce equal strings. Feeds the hash
    // that keys cached artifacts and run manifests.
    std::string canonical_string() const;
    std::uint64_t hash() const { return fnv1a64(canonical_string()); }

    nlohmann::json to_json() const;
    static FeatureSpec from_json(const nlohmann::json& j);

    // Same recipe without exogenous columns or the temperature interaction,
    // for collections that carry no channels.
    FeatureSpec without_exogenous() const;
};

struct SampleSet {
    Matrix X;
    std::vector<double> y;
    std::vector<std::string> feature_names;
    std::vector<std::string> series_ids;    // per row
    std::vector<std::int64_t> target_hours; // per row
    // Per column: true when the column reads an exogenous value at the target
    // hour (directly or through an interaction). Everything else depends only
    // on values strictly before the target.
    std::vector<bool> at_target;

    std::size_t rows() const { return X.rows; }
    std::size_t cols() const { return X.cols; }
    std::size_t col_index(const std::string& name) const;
};

// Builds one row per target hour tau in [168, l). Load-derived columns read
// values at times <= tau-1 only; the EMA runs from the start of `values`.
SampleSet build_samples(const std::string& series_id, std::span<const double> values,
                        std::int64_t start_hour,
                        const std::map<std::string, std::vector<double>>& exogenous,
                        const FeatureSpec& spec);

// Rows whose target hour lies in [from_hour, to_hour], order preserved.
SampleSet filter_by_target_range(const SampleSet& s, std::int64_t from_hour,
                                 std::int64_t to_hour);

// Concatenates sample sets row-wise; schemas must match exactly.
SampleSet pool_samples(const std::vector<SampleSet>& parts);

struct HeterogeneityProfile {
    double seasonality_index = 0.0;
    double total_variation = 0.0;
    double night_to_day = 1.0;
    double weekend_to_weekday = 1.0;
};

// Shape statistics of a raw hourly series. Night is local 00:00-05:59, day
// is 12:00-17:59, the weekend is Saturday + Sunday. A constant series maps
// to (0, 0, 1, 1) exactly.
HeterogeneityProfile heterogeneity_profile(std::span<const double> values,
                                           std::int64_t start_hour,
                                           int local_time_offset_hours);

} // namespace gridcast
