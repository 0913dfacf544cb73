#pragma once

#include "gridcast/core.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gridcast {

struct PointMetrics {
    double fb = 0.0;       // (sum yhat - sum y) / (sum yhat + sum y)
    double nmae_pct = 0.0; // 100 * MAE / max(y)
    double mse = 0.0;
    double mae = 0.0;
    double mape_pct = 0.0;           // points with |y| <= 1e-6 excluded
    double mape_unguarded_pct = 0.0; // only exact zeros excluded
    std::size_t n = 0;
    std::size_t mape_excluded = 0;
    std::size_t mape_unguarded_excluded = 0;
};

inline constexpr double kMapeGuard = 1e-6;

// Point metrics on the normalized scale. Errors: length mismatch, empty
// input, or max(y) <= 0 (nMAE undefined).
PointMetrics compute_metrics(std::span<const double> y, std::span<const double> yhat);

struct SeriesMetricsRow {
    std::string series_id;
    PointMetrics m;
};

struct MetricReport {
    std::string paradigm; // "local" | "global" | "clusterwise"
    std::string model;    // "ridge" | "gbdt"
    std::string variant;  // cluster variant or ""
    int K = 0;
    std::uint64_t seed = 0;
    std::string window; // "val" | "test"
    std::vector<SeriesMetricsRow> rows;
};

struct Aggregate {
    double min = 0.0, mean = 0.0, max = 0.0;
};

Aggregate aggregate_nmae(const MetricReport& r);

struct PeakRow {
    std::string series_id;
    std::string period; // "2021-07" or "2021"
    double actual_peak = 0.0;
    double predicted_at_peak = 0.0;
    double error_pct = 0.0;
    std::int64_t peak_hour = 0;
};

enum class PeakPeriod { monthly, annual };

struct PeakReport {
    std::vector<PeakRow> rows;
    std::vector<std::string> skipped; // incomplete or degenerate periods
};

// Per complete calendar period: the actual peak (earliest hour on ties) and
// the prediction at that same hour, error as a percentage of the peak.
// Partial periods at the edges of the window are skipped and logged.
PeakReport peak_error(const std::string& series_id, std::span<const double> actual,
                      std::span<const double> predicted, std::int64_t start_hour,
                      PeakPeriod period, int local_time_offset_hours = 0);

struct DriftSegmentRow {
    std::string segment; // "drifting" | "stable"
    double local_mean_nmae = 0.0;
    double global_mean_nmae = 0.0;
    double change_pct = 0.0; // 100 * (local - global) / local
    std::size_t n_series = 0;
};

struct DriftReport {
    std::vector<DriftSegmentRow> rows;
};

// Compares local vs global nMAE within drifting and stable segments. Both
// reports must cover the same series; every series needs a label.
DriftReport drift_segment_report(const MetricReport& local_report,
                                 const MetricReport& global_report,
                                 const std::map<std::string, std::string>& labels);

struct CoherencyReport {
    std::vector<double> gap; // sum of area forecasts minus system forecast
    double summary = 0.0;    // mean |gap| / mean system actual
};

CoherencyReport coherency_gap(const std::vector<std::vector<double>>& area_forecasts,
                              std::span<const double> system_forecast,
                              std::span<const double> system_actual);

} // namespace gridcast
