#pragma once

#include "gridcast/core.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridcast {

// A set of hourly load series on a shared clock. All series and exogenous
// channels start at start_hour; lengths may differ only by trailing
// truncation. Values are finite after ingestion; gaps have been resolved.
// Collections are treated as immutable once built.
struct SeriesCollection {
    std::int64_t start_hour = 0; // hours since 1970-01-01T00:00
    std::map<std::string, std::vector<double>> series;
    std::map<std::string, std::vector<double>> exogenous;
    std::map<std::string, std::string> hierarchy; // series id -> region id

    std::size_t max_length() const;
    // Hour index of the last sample of the longest series.
    std::int64_t end_hour() const;
};

enum class GapPolicy { reject, forward_fill };

struct IngestConfig {
    GapPolicy gap_policy = GapPolicy::forward_fill;
    int max_gap_hours = 3;
};

// Wide CSV: header `timestamp,<id>,<id>,...`, one row per hour, timestamps
// strictly increasing. A missing row is a gap in every column; an empty cell
// is a gap in that column only; empty cells after a column's last value are
// trailing truncation, not gaps. Gaps are forward-filled up to
// max_gap_hours or rejected, per config.
SeriesCollection ingest_wide_csv(const std::string& path, const IngestConfig& cfg);

// Same shape as the load CSV; columns become exogenous channels. The file
// must start at the same timestamp as the collection.
void attach_exogenous_csv(SeriesCollection& c, const std::string& path,
                          const IngestConfig& cfg);

// Two-column CSV `series_id,region_id`.
void attach_hierarchy_csv(SeriesCollection& c, const std::string& path);

// Inclusive end timestamps of the train and validation windows, as hour
// indices. The test window always runs to the end of the collection so the
// three views partition every series.
struct SplitSpec {
    std::int64_t train_end = 0;
    std::int64_t val_end = 0;
    std::int64_t test_end = 0;
};

struct SplitViews {
    SeriesCollection train, val, test;
};

SplitViews split_by_time(const SeriesCollection& c, const SplitSpec& s);

// Copy of the [from_hour, to_hour] window (inclusive) of every series and
// channel, clipped to each one's extent. Series with no data in the window
// are dropped. Used to hand evaluation windows their 168 hours of context.
SeriesCollection slice_collection(const SeriesCollection& c, std::int64_t from_hour,
                                  std::int64_t to_hour);

struct MinMax {
    double min = 0.0;
    double max = 0.0;
};

// Per-series and per-channel min-max statistics, fit on the training view
// only. Values map to (v - min) / (max - min); out-of-range values (drift)
// are never clipped.
class Normalizer {
public:
    static Normalizer fit(const SeriesCollection& train);

    bool fitted() const { return fitted_; }
    const MinMax& series_stats(const std::string& id) const;
    const MinMax& channel_stats(const std::string& name) const;

    static double apply_value(const MinMax& mm, double v);
    static double invert_value(const MinMax& mm, double v);

    // Normalizes every series and exogenous channel.
    SeriesCollection apply(const SeriesCollection& c) const;

    std::vector<double> invert_series(const std::string& id,
                                      std::span<const double> values) const;

    nlohmann::json to_json() const;
    static Normalizer from_json(const nlohmann::json& j);

private:
    bool fitted_ = false;
    std::map<std::string, MinMax> series_;
    std::map<std::string, MinMax> channels_;
};

SeriesCollection minmax_normalize(const SeriesCollection& c, const Normalizer& n);

enum class AggregateLevel { area_to_region, region_to_system };

// Element-wise sums on the raw (un-normalized) scale. area_to_region groups
// by hierarchy label and errors on a missing label; region_to_system sums
// every series into a single "system" series. Members of a group are summed
// up to the shortest member's length. Exogenous channels carry over.
SeriesCollection aggregate_sum(const SeriesCollection& c, AggregateLevel level);

} // namespace gridcast
