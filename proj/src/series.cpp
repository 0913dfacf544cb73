#include "gridcast/series.hpp"

#include "gridcast/csv.hpp"
#include "gridcast/timeutil.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace gridcast {

namespace {

double parse_double_cell(const std::string& cell, const std::string& where) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw DataError("non-numeric cell '" + cell + "' at " + where);
    return v;
}

struct WideFile {
    std::int64_t start_hour = 0;
    std::int64_t n_hours = 0; // timeline length including missing rows
    std::vector<std::string> names;
    // column-major, aligned to the timeline; present[j][t] marks real cells
    std::vector<std::vector<double>> values;
    std::vector<std::vector<bool>> present;
};

WideFile parse_wide(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 2 || table.header[0] != "timestamp")
        throw DataError("'" + path +
                        "': header must be `timestamp` followed by at least one column");
    if (table.rows.empty()) throw DataError("'" + path + "' has no data rows");

    std::vector<std::int64_t> stamps(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        stamps[r] = parse_hour_timestamp(table.rows[r][0]);
        if (r > 0 && stamps[r] <= stamps[r - 1])
            throw DataError("'" + path + "': timestamps not strictly increasing at " +
                            table.rows[r][0]);
    }

    WideFile wf;
    wf.start_hour = stamps.front();
    wf.n_hours = stamps.back() - stamps.front() + 1;
    const std::size_t n_cols = table.header.size() - 1;
    const std::size_t L = static_cast<std::size_t>(wf.n_hours);
    wf.names.assign(table.header.begin() + 1, table.header.end());
    for (std::size_t j = 0; j < n_cols; ++j) {
        if (wf.names[j].empty()) throw DataError("'" + path + "': empty column name");
        wf.values.emplace_back(L, 0.0);
        wf.present.emplace_back(L, false);
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto t = static_cast<std::size_t>(stamps[r] - wf.start_hour);
        for (std::size_t j = 0; j < n_cols; ++j) {
            const std::string& cell = table.rows[r][j + 1];
            if (cell.empty()) continue;
            wf.values[j][t] = parse_double_cell(
                cell, path + " row " + table.rows[r][0] + " column " + wf.names[j]);
            wf.present[j][t] = true;
        }
    }
    return wf;
}

// Resolves gaps in one timeline-aligned column and truncates trailing
// absence, per the gap policy.
std::vector<double> resolve_column(const WideFile& wf, std::size_t j,
                                   const IngestConfig& cfg, const std::string& path) {
    const auto& present = wf.present[j];
    const auto& raw = wf.values[j];
    const std::string& name = wf.names[j];

    std::size_t last = present.size();
    for (std::size_t t = present.size(); t-- > 0;) {
        if (present[t]) {
            last = t;
            break;
        }
    }
    if (last == present.size())
        throw DataError("'" + path + "': series '" + name + "' has no values");

    std::vector<double> out(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    std::size_t t = 0;
    while (t <= last) {
        if (present[t]) {
            ++t;
            continue;
        }
        std::size_t run_end = t;
        while (run_end <= last && !present[run_end]) ++run_end;
        const std::size_t run_len = run_end - t;
        const std::string at = format_hour_timestamp(wf.start_hour + static_cast<std::int64_t>(t));
        if (t == 0)
            throw DataError("'" + path + "': series '" + name +
                            "' starts with a gap at " + at);
        if (cfg.gap_policy == GapPolicy::reject)
            throw DataError("'" + path + "': gap in series '" + name + "' at " + at);
        if (run_len > static_cast<std::size_t>(cfg.max_gap_hours))
            throw DataError("'" + path + "': gap of " + std::to_string(run_len) +
                            " hours in series '" + name + "' starting at " + at +
                            " exceeds the forward-fill limit of " +
                            std::to_string(cfg.max_gap_hours));
        const double fill = out[t - 1];
        for (std::size_t k = t; k < run_end; ++k) out[k] = fill;
        t = run_end;
    }
    return out;
}

std::vector<double> slice(const std::vector<double>& v, std::int64_t series_start,
                          std::int64_t from_hour, std::int64_t to_hour /*inclusive*/) {
    const auto len = static_cast<std::int64_t>(v.size());
    std::int64_t lo = std::max<std::int64_t>(from_hour - series_start, 0);
    std::int64_t hi = std::min(to_hour - series_start + 1, len);
    if (lo >= hi) return {};
    return {v.begin() + lo, v.begin() + hi};
}

} // namespace

std::size_t SeriesCollection::max_length() const {
    std::size_t m = 0;
    for (const auto& [id, v] : series) m = std::max(m, v.size());
    for (const auto& [id, v] : exogenous) m = std::max(m, v.size());
    return m;
}

std::int64_t SeriesCollection::end_hour() const {
    return start_hour + static_cast<std::int64_t>(max_length()) - 1;
}

SeriesCollection ingest_wide_csv(const std::string& path, const IngestConfig& cfg) {
    if (cfg.max_gap_hours < 0) throw ConfigError("max_gap_hours must be >= 0");
    const WideFile wf = parse_wide(path);
    SeriesCollection c;
    c.start_hour = wf.start_hour;
    for (std::size_t j = 0; j < wf.names.size(); ++j) {
        if (c.series.count(wf.names[j]))
            throw DataError("'" + path + "': duplicate column '" + wf.names[j] + "'");
        c.series[wf.names[j]] = resolve_column(wf, j, cfg, path);
    }
    return c;
}

void attach_exogenous_csv(SeriesCollection& c, const std::string& path,
                          const IngestConfig& cfg) {
    const WideFile wf = parse_wide(path);
    if (wf.start_hour != c.start_hour)
        throw DataError("'" + path + "': channel start " +
                        format_hour_timestamp(wf.start_hour) +
                        " does not match collection start " +
                        format_hour_timestamp(c.start_hour));
    for (std::size_t j = 0; j < wf.names.size(); ++j) {
        if (c.exogenous.count(wf.names[j]) || c.series.count(wf.names[j]))
            throw DataError("'" + path + "': duplicate channel '" + wf.names[j] + "'");
        c.exogenous[wf.names[j]] = resolve_column(wf, j, cfg, path);
    }
}

void attach_hierarchy_csv(SeriesCollection& c, const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() != 2 || table.header[0] != "series_id" ||
        table.header[1] != "region_id")
        throw DataError("'" + path + "': header must be `series_id,region_id`");
    for (const auto& row : table.rows) {
        if (row[0].empty() || row[1].empty())
            throw DataError("'" + path + "': empty id in hierarchy row");
        c.hierarchy[row[0]] = row[1];
    }
}

SplitViews split_by_time(const SeriesCollection& c, const SplitSpec& s) {
    if (!(s.train_end < s.val_end && s.val_end < s.test_end))
        throw ConfigError("split must satisfy train_end < val_end < test_end");
    if (s.train_end < c.start_hour)
        throw ConfigError("train_end " + format_hour_timestamp(s.train_end) +
                          " is before the collection start");
    if (s.test_end != c.end_hour())
        throw ConfigError("test_end " + format_hour_timestamp(s.test_end) +
                          " must be the collection's final sample " +
                          format_hour_timestamp(c.end_hour()) +
                          " so the views partition every series");

    SplitViews views;
    views.train.start_hour = c.start_hour;
    views.val.start_hour = s.train_end + 1;
    views.test.start_hour = s.val_end + 1;
    auto cut = [&](const std::map<std::string, std::vector<double>>& src,
                   auto member) {
        for (const auto& [id, v] : src) {
            (views.train.*member)[id] = slice(v, c.start_hour, c.start_hour, s.train_end);
            (views.val.*member)[id] = slice(v, c.start_hour, s.train_end + 1, s.val_end);
            (views.test.*member)[id] = slice(v, c.start_hour, s.val_end + 1, s.test_end);
        }
    };
    cut(c.series, &SeriesCollection::series);
    cut(c.exogenous, &SeriesCollection::exogenous);
    views.train.hierarchy = c.hierarchy;
    views.val.hierarchy = c.hierarchy;
    views.test.hierarchy = c.hierarchy;
    return views;
}

SeriesCollection slice_collection(const SeriesCollection& c, std::int64_t from_hour,
                                  std::int64_t to_hour) {
    if (from_hour < c.start_hour || from_hour > to_hour)
        throw ConfigError("slice window [" + format_hour_timestamp(from_hour) + ", " +
                          format_hour_timestamp(to_hour) + "] is not inside the collection");
    SeriesCollection out;
    out.start_hour = from_hour;
    for (const auto& [id, v] : c.series) {
        auto w = slice(v, c.start_hour, from_hour, to_hour);
        if (!w.empty()) out.series[id] = std::move(w);
    }
    for (const auto& [id, v] : c.exogenous) {
        auto w = slice(v, c.start_hour, from_hour, to_hour);
        if (!w.empty()) out.exogenous[id] = std::move(w);
    }
    out.hierarchy = c.hierarchy;
    return out;
}

Normalizer Normalizer::fit(const SeriesCollection& train) {
    Normalizer n;
    auto fit_map = [](const std::map<std::string, std::vector<double>>& src,
                      std::map<std::string, MinMax>& dst, const char* kind) {
        for (const auto& [id, v] : src) {
            if (v.empty())
                throw DataError(std::string(kind) + " '" + id + "' is empty in the training view");
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            if (!(*hi > *lo))
                throw DataError(std::string(kind) + " '" + id +
                                "' is constant over the training view; min-max scaling is undefined");
            dst[id] = MinMax{*lo, *hi};
        }
    };
    fit_map(train.series, n.series_, "series");
    fit_map(train.exogenous, n.channels_, "channel");
    n.fitted_ = true;
    return n;
}

const MinMax& Normalizer::series_stats(const std::string& id) const {
    if (!fitted_) throw DataError("normalizer is not fitted");
    auto it = series_.find(id);
    if (it == series_.end()) throw DataError("normalizer has no statistics for series '" + id + "'");
    return it->second;
}

const MinMax& Normalizer::channel_stats(const std::string& name) const {
    if (!fitted_) throw DataError("normalizer is not fitted");
    auto it = channels_.find(name);
    if (it == channels_.end())
        throw DataError("normalizer has no statistics for channel '" + name + "'");
    return it->second;
}

double Normalizer::apply_value(const MinMax& mm, double v) {
    return (v - mm.min) / (mm.max - mm.min);
}

double Normalizer::invert_value(const MinMax& mm, double v) {
    return v * (mm.max - mm.min) + mm.min;
}

SeriesCollection Normalizer::apply(const SeriesCollection& c) const {
    if (!fitted_) throw DataError("normalizer is not fitted");
    SeriesCollection out;
    out.start_hour = c.start_hour;
    out.hierarchy = c.hierarchy;
    for (const auto& [id, v] : c.series) {
        const MinMax& mm = series_stats(id);
        auto& dst = out.series[id];
        dst.reserve(v.size());
        for (double x : v) dst.push_back(apply_value(mm, x));
    }
    for (const auto& [id, v] : c.exogenous) {
        const MinMax& mm = channel_stats(id);
        auto& dst = out.exogenous[id];
        dst.reserve(v.size());
        for (double x : v) dst.push_back(apply_value(mm, x));
    }
    return out;
}

std::vector<double> Normalizer::invert_series(const std::string& id,
                                              std::span<const double> values) const {
    const MinMax& mm = series_stats(id);
    std::vector<double> out;
    out.reserve(values.size());
    for (double x : values) out.push_back(invert_value(mm, x));
    return out;
}

nlohmann::json Normalizer::to_json() const {
    nlohmann::json j;
    j["series"] = nlohmann::json::object();
    j["channels"] = nlohmann::json::object();
    for (const auto& [id, mm] : series_) j["series"][id] = {{"min", mm.min}, {"max", mm.max}};
    for (const auto& [id, mm] : channels_) j["channels"][id] = {{"min", mm.min}, {"max", mm.max}};
    return j;
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
    Normalizer n;
    for (const auto& [id, mm] : j.at("series").items())
        n.series_[id] = MinMax{mm.at("min").get<double>(), mm.at("max").get<double>()};
    for (const auto& [id, mm] : j.at("channels").items())
        n.channels_[id] = MinMax{mm.at("min").get<double>(), mm.at("max").get<double>()};
    n.fitted_ = true;
    return n;
}

SeriesCollection minmax_normalize(const SeriesCollection& c, const Normalizer& n) {
    return n.apply(c);
}

SeriesCollection aggregate_sum(const SeriesCollection& c, AggregateLevel level) {
    SeriesCollection out;
    out.start_hour = c.start_hour;
    out.exogenous = c.exogenous;
    if (level == AggregateLevel::region_to_system) {
        std::vector<double> sum;
        std::size_t min_len = std::numeric_limits<std::size_t>::max();
        for (const auto& [id, v] : c.series) min_len = std::min(min_len, v.size());
        if (c.series.empty()) throw DataError("nothing to aggregate");
        sum.assign(min_len, 0.0);
        for (const auto& [id, v] : c.series)
            for (std::size_t t = 0; t < min_len; ++t) sum[t] += v[t];
        out.series["system"] = std::move(sum);
        return out;
    }
    std::map<std::string, std::size_t> group_len;
    for (const auto& [id, v] : c.series) {
        auto it = c.hierarchy.find(id);
        if (it == c.hierarchy.end())
            throw DataError("series '" + id + "' has no region label");
        auto [git, inserted] = group_len.try_emplace(it->second, v.size());
        if (!inserted) git->second = std::min(git->second, v.size());
    }
    for (const auto& [region, len] : group_len) {
        out.series[region].assign(len, 0.0);
        out.hierarchy[region] = "system";
    }
    for (const auto& [id, v] : c.series) {
        const std::string& region = c.hierarchy.at(id);
        auto& dst = out.series[region];
        for (std::size_t t = 0; t < dst.size(); ++t) dst[t] += v[t];
    }
    return out;
}

} // namespace gridcast
