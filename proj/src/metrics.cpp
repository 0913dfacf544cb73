#include "gridcast/metrics.hpp"

#include "gridcast/timeutil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gridcast {

PointMetrics compute_metrics(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size())
        throw EvalError("metrics: actual and predicted lengths differ");
    if (y.empty()) throw EvalError("metrics: empty window");

    PointMetrics pm;
    pm.n = y.size();
    double sum_y = 0.0, sum_yhat = 0.0, sum_abs = 0.0, sum_sq = 0.0;
    double max_y = y[0];
    double ape_sum = 0.0, ape_unguarded_sum = 0.0;
    std::size_t ape_n = 0, ape_unguarded_n = 0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double e = yhat[t] - y[t];
        sum_y += y[t];
        sum_yhat += yhat[t];
        sum_abs += std::fabs(e);
        sum_sq += e * e;
        max_y = std::max(max_y, y[t]);
        if (std::fabs(y[t]) > kMapeGuard) {
            ape_sum += std::fabs(e / y[t]);
            ++ape_n;
        }
        if (y[t] != 0.0) {
            ape_unguarded_sum += std::fabs(e / y[t]);
            ++ape_unguarded_n;
        }
    }
    if (!(max_y > 0.0)) throw EvalError("metrics: max(actual) must be positive for nMAE");
    const double denom = sum_yhat + sum_y;
    if (denom == 0.0) throw EvalError("metrics: sum(actual) + sum(predicted) is zero");

    pm.fb = (sum_yhat - sum_y) / denom;
    pm.mae = sum_abs / static_cast<double>(pm.n);
    pm.mse = sum_sq / static_cast<double>(pm.n);
    pm.nmae_pct = 100.0 * pm.mae / max_y;
    pm.mape_excluded = pm.n - ape_n;
    pm.mape_unguarded_excluded = pm.n - ape_unguarded_n;
    // All points excluded leaves the mean over an empty set; reported as zero
    // with the exclusion count carrying the caveat.
    pm.mape_pct = ape_n ? 100.0 * ape_sum / static_cast<double>(ape_n) : 0.0;
    pm.mape_unguarded_pct =
        ape_unguarded_n ? 100.0 * ape_unguarded_sum / static_cast<double>(ape_unguarded_n) : 0.0;
    return pm;
}

Aggregate aggregate_nmae(const MetricReport& r) {
    if (r.rows.empty()) throw EvalError("metrics: report has no rows");
    Aggregate a;
    a.min = r.rows[0].m.nmae_pct;
    a.max = a.min;
    double sum = 0.0;
    for (const auto& row : r.rows) {
        a.min = std::min(a.min, row.m.nmae_pct);
        a.max = std::max(a.max, row.m.nmae_pct);
        sum += row.m.nmae_pct;
    }
    a.mean = sum / static_cast<double>(r.rows.size());
    return a;
}

namespace {

std::string period_label(const CivilTime& ct, PeakPeriod period) {
    char buf[16];
    if (period == PeakPeriod::monthly)
        std::snprintf(buf, sizeof buf, "%04d-%02d", ct.year, ct.month);
    else
        std::snprintf(buf, sizeof buf, "%04d", ct.year);
    return buf;
}

// First hour of the period containing `hour` and the first hour of the next
// period, both in local time expressed as UTC hour indices.
std::pair<std::int64_t, std::int64_t> period_bounds(std::int64_t hour, PeakPeriod period,
                                                    int offset) {
    const CivilTime ct = civil_from_hours(hour + offset);
    CivilTime lo{ct.year, ct.month, 1, 0, 0};
    CivilTime hi = lo;
    if (period == PeakPeriod::monthly) {
        hi.month += 1;
        if (hi.month > 12) {
            hi.month = 1;
            hi.year += 1;
        }
    } else {
        lo.month = 1;
        hi = lo;
        hi.year += 1;
    }
    return {hours_from_civil(lo.year, lo.month, 1, 0) - offset,
            hours_from_civil(hi.year, hi.month, 1, 0) - offset};
}

} // namespace

PeakReport peak_error(const std::string& series_id, std::span<const double> actual,
                      std::span<const double> predicted, std::int64_t start_hour,
                      PeakPeriod period, int local_time_offset_hours) {
    if (actual.size() != predicted.size())
        throw EvalError("peak_error: actual and predicted lengths differ");
    PeakReport report;
    if (actual.empty()) return report;

    const std::int64_t end_hour = start_hour + static_cast<std::int64_t>(actual.size());
    std::int64_t cursor = start_hour;
    while (cursor < end_hour) {
        auto [lo, hi] = period_bounds(cursor, period, local_time_offset_hours);
        const std::string label =
            period_label(civil_from_hours(lo + local_time_offset_hours), period);
        if (lo < start_hour || hi > end_hour) {
            report.skipped.push_back(series_id + " " + label + ": incomplete period");
            cursor = hi;
            continue;
        }
        std::size_t best = static_cast<std::size_t>(lo - start_hour);
        for (std::int64_t h = lo + 1; h < hi; ++h) {
            const auto idx = static_cast<std::size_t>(h - start_hour);
            if (actual[idx] > actual[best]) best = idx; // strict: earliest peak wins ties
        }
        if (!(actual[best] > 0.0)) {
            report.skipped.push_back(series_id + " " + label + ": non-positive peak");
            cursor = hi;
            continue;
        }
        PeakRow row;
        row.series_id = series_id;
        row.period = label;
        row.actual_peak = actual[best];
        row.predicted_at_peak = predicted[best];
        row.error_pct = 100.0 * std::fabs(predicted[best] - actual[best]) / actual[best];
        row.peak_hour = start_hour + static_cast<std::int64_t>(best);
        report.rows.push_back(std::move(row));
        cursor = hi;
    }
    return report;
}

DriftReport drift_segment_report(const MetricReport& local_report,
                                 const MetricReport& global_report,
                                 const std::map<std::string, std::string>& labels) {
    std::map<std::string, double> local_nmae;
    for (const auto& row : local_report.rows) local_nmae[row.series_id] = row.m.nmae_pct;

    std::map<std::string, std::pair<double, std::size_t>> local_acc, global_acc;
    for (const auto& row : global_report.rows) {
        auto lit = local_nmae.find(row.series_id);
        if (lit == local_nmae.end())
            throw EvalError("drift report: series '" + row.series_id + "' missing from local report");
        auto lab = labels.find(row.series_id);
        if (lab == labels.end())
            throw EvalError("drift report: series '" + row.series_id + "' has no segment label");
        auto& la = local_acc[lab->second];
        la.first += lit->second;
        la.second += 1;
        auto& ga = global_acc[lab->second];
        ga.first += row.m.nmae_pct;
        ga.second += 1;
    }
    if (local_report.rows.size() != global_report.rows.size())
        throw EvalError("drift report: local and global reports cover different series");

    DriftReport out;
    for (const auto& [segment, la] : local_acc) {
        const auto& ga = global_acc.at(segment);
        DriftSegmentRow row;
        row.segment = segment;
        row.n_series = la.second;
        row.local_mean_nmae = la.first / static_cast<double>(la.second);
        row.global_mean_nmae = ga.first / static_cast<double>(ga.second);
        if (row.local_mean_nmae == 0.0)
            throw EvalError("drift report: local nMAE is zero in segment '" + segment + "'");
        row.change_pct =
            100.0 * (row.local_mean_nmae - row.global_mean_nmae) / row.local_mean_nmae;
        out.rows.push_back(std::move(row));
    }
    return out;
}

CoherencyReport coherency_gap(const std::vector<std::vector<double>>& area_forecasts,
                              std::span<const double> system_forecast,
                              std::span<const double> system_actual) {
    if (area_forecasts.empty()) throw EvalError("coherency: no area forecasts");
    const std::size_t len = system_forecast.size();
    if (system_actual.size() != len)
        throw EvalError("coherency: system forecast and actual lengths differ");
    if (len == 0) throw EvalError("coherency: empty window");
    for (const auto& a : area_forecasts)
        if (a.size() != len) throw EvalError("coherency: area forecast length differs from system");

    CoherencyReport rep;
    rep.gap.resize(len);
    double abs_sum = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
        double s = 0.0;
        for (const auto& a : area_forecasts) s += a[t];
        rep.gap[t] = s - system_forecast[t];
        abs_sum += std::fabs(rep.gap[t]);
    }
    const double actual_mean = shifted_mean(system_actual);
    if (!(actual_mean > 0.0)) throw EvalError("coherency: system actual mean must be positive");
    rep.summary = (abs_sum / static_cast<double>(len)) / actual_mean;
    return rep;
}

} // namespace gridcast
