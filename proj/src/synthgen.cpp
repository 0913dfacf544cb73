#include "gridcast/synthgen.hpp"

#include "gridcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gridcast {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double daily_shape(int hour) { return std::cos(kTwoPi * (hour - 15) / 24.0); }
double weekly_shape(int dow) { return std::cos(kTwoPi * (dow - 2) / 7.0); }

// Mean of the daily shape over the night (00-05) and day (12-17) windows and
// of the weekly shape over weekdays and the weekend. Used to solve for the
// additive window offsets that land the deterministic ratios on target.
struct ShapeMeans {
    double night, day, weekday, weekend;
};

ShapeMeans shape_means() {
    ShapeMeans m{0, 0, 0, 0};
    for (int h = 0; h < 6; ++h) m.night += daily_shape(h) / 6.0;
    for (int h = 12; h < 18; ++h) m.day += daily_shape(h) / 6.0;
    for (int d = 0; d < 5; ++d) m.weekday += weekly_shape(d) / 5.0;
    for (int d = 5; d < 7; ++d) m.weekend += weekly_shape(d) / 2.0;
    return m;
}

// (1 + amp*shape_mean_b + offset) / (1 + amp*shape_mean_a) == ratio
double window_offset(double ratio, double amp, double mean_a, double mean_b) {
    return ratio * (1.0 + amp * mean_a) - 1.0 - amp * mean_b;
}

struct HourContext {
    int hour;
    int dow;
    double annual_phase; // [0, 2pi) across the civil year
};

HourContext hour_context(std::int64_t hour) {
    const CivilTime ct = civil_from_hours(hour);
    const std::int64_t year_start = hours_from_civil(ct.year, 1, 1, 0);
    const double year_len = (is_leap_year(ct.year) ? 8784.0 : 8760.0);
    return {ct.hour, ct.dow, kTwoPi * static_cast<double>(hour - year_start) / year_len};
}

std::string zero_padded(const std::string& prefix, std::size_t index, std::size_t count) {
    int width = 2;
    for (std::size_t c = 100; c < count; c *= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, index);
    return prefix + buf;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("synth: " + what);
}

} // namespace

void ArchetypeConfig::validate() const {
    require(!name.empty(), "archetype name must be non-empty");
    require(base_mw > 0.0, "base level must be positive");
    require(daily_amplitude >= 0.0 && weekly_amplitude >= 0.0 && annual_amplitude >= 0.0,
            "amplitudes must be non-negative");
    require(night_to_day > 0.0 && weekend_to_weekday > 0.0, "ratio targets must be positive");
    require(noise_std >= 0.0, "noise std must be non-negative");
    require(ar_coeff >= 0.0 && ar_coeff < 1.0, "AR coefficient must be in [0, 1)");
    require(jitter >= 0.0 && jitter < 1.0, "jitter must be in [0, 1)");
    require(std::isfinite(temp_ref_c) && std::isfinite(temp_linear) && std::isfinite(temp_quad),
            "temperature response must be finite");
}

nlohmann::json ArchetypeConfig::to_json() const {
    return {{"name", name},
            {"base_mw", base_mw},
            {"daily_amplitude", daily_amplitude},
            {"weekly_amplitude", weekly_amplitude},
            {"annual_amplitude", annual_amplitude},
            {"night_to_day", night_to_day},
            {"weekend_to_weekday", weekend_to_weekday},
            {"temp_ref_c", temp_ref_c},
            {"temp_linear", temp_linear},
            {"temp_quad", temp_quad},
            {"noise_std", noise_std},
            {"ar_coeff", ar_coeff},
            {"jitter", jitter}};
}

ArchetypeConfig ArchetypeConfig::from_json(const nlohmann::json& j) {
    ArchetypeConfig a;
    a.name = j.at("name").get<std::string>();
    a.base_mw = j.at("base_mw").get<double>();
    a.daily_amplitude = j.at("daily_amplitude").get<double>();
    a.weekly_amplitude = j.at("weekly_amplitude").get<double>();
    a.annual_amplitude = j.at("annual_amplitude").get<double>();
    a.night_to_day = j.at("night_to_day").get<double>();
    a.weekend_to_weekday = j.at("weekend_to_weekday").get<double>();
    a.temp_ref_c = j.at("temp_ref_c").get<double>();
    a.temp_linear = j.at("temp_linear").get<double>();
    a.temp_quad = j.at("temp_quad").get<double>();
    a.noise_std = j.at("noise_std").get<double>();
    a.ar_coeff = j.at("ar_coeff").get<double>();
    a.jitter = j.at("jitter").get<double>();
    a.validate();
    return a;
}

ArchetypeConfig ArchetypeConfig::residential() {
    ArchetypeConfig a;
    a.name = "residential";
    a.base_mw = 120.0;
    a.daily_amplitude = 0.25;
    a.weekly_amplitude = 0.04;
    a.annual_amplitude = 0.12;
    a.night_to_day = 0.78;
    a.weekend_to_weekday = 0.93;
    a.temp_quad = 0.03; // heating and cooling both raise load
    a.noise_std = 3.0;
    a.jitter = 0.05;
    return a;
}

ArchetypeConfig ArchetypeConfig::industrial() {
    ArchetypeConfig a;
    a.name = "industrial";
    a.base_mw = 400.0;
    a.daily_amplitude = 0.03;
    a.weekly_amplitude = 0.01;
    a.annual_amplitude = 0.02;
    a.night_to_day = 1.0;
    a.weekend_to_weekday = 1.0;
    a.temp_quad = 0.004;
    a.noise_std = 5.0;
    a.jitter = 0.05;
    return a;
}

void SynthConfig::validate() const {
    require(!archetypes.empty(), "at least one archetype required");
    for (const auto& a : archetypes) a.validate();
    require(series_per_archetype >= 1, "series_per_archetype must be at least 1");
    require(regions >= 1, "regions must be at least 1");
    require(length_hours >= 24u * 28u, "length must be at least four weeks");
}

nlohmann::json SynthConfig::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : archetypes) arr.push_back(a.to_json());
    return {{"archetypes", arr},
            {"series_per_archetype", series_per_archetype},
            {"regions", regions},
            {"length_hours", length_hours},
            {"start_hour", start_hour},
            {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
    SynthConfig c;
    c.archetypes.clear();
    for (const auto& a : j.at("archetypes")) c.archetypes.push_back(ArchetypeConfig::from_json(a));
    c.series_per_archetype = j.at("series_per_archetype").get<std::size_t>();
    c.regions = j.at("regions").get<int>();
    c.length_hours = j.at("length_hours").get<std::size_t>();
    c.start_hour = j.at("start_hour").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

SynthResult generate_collection(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n_series = cfg.archetypes.size() * cfg.series_per_archetype;
    const std::size_t len = cfg.length_hours;

    std::vector<HourContext> ctx(len);
    for (std::size_t t = 0; t < len; ++t)
        ctx[t] = hour_context(cfg.start_hour + static_cast<std::int64_t>(t));

    // One synthetic climate shared by every series: cold annual trough at the
    // start of January, afternoon daily peak, AR(1) weather noise.
    std::vector<double> temperature(len);
    {
        Rng rng = Rng::sub_stream(cfg.seed, 0);
        double e = 0.0;
        for (std::size_t t = 0; t < len; ++t) {
            e = 0.9 * e + rng.normal(0.0, 1.2);
            temperature[t] = 3.0 - 16.0 * std::cos(ctx[t].annual_phase) +
                             4.0 * std::cos(kTwoPi * (ctx[t].hour - 16) / 24.0) + e;
        }
    }

    const ShapeMeans sm = shape_means();

    SynthResult out;
    out.collection.start_hour = cfg.start_hour;
    out.collection.exogenous["temperature"] = temperature;

    for (std::size_t a = 0; a < cfg.archetypes.size(); ++a) {
        const ArchetypeConfig& arch = cfg.archetypes[a];
        for (std::size_t s = 0; s < cfg.series_per_archetype; ++s) {
            const std::size_t g = a * cfg.series_per_archetype + s;
            const std::string id = zero_padded("area", g, n_series);
            Rng rng = Rng::sub_stream(cfg.seed, 1 + g);

            // Jitter first, noise after: the draw layout per series is fixed.
            const double base = arch.base_mw * (1.0 + arch.jitter * rng.uniform(-1.0, 1.0));
            const double daily =
                arch.daily_amplitude * (1.0 + arch.jitter * rng.uniform(-1.0, 1.0));
            const double weekly =
                arch.weekly_amplitude * (1.0 + arch.jitter * rng.uniform(-1.0, 1.0));
            const double annual =
                arch.annual_amplitude * (1.0 + arch.jitter * rng.uniform(-1.0, 1.0));
            const double tquad = arch.temp_quad * (1.0 + arch.jitter * rng.uniform(-1.0, 1.0));

            const double night_off = window_offset(arch.night_to_day, daily, sm.day, sm.night);
            const double weekend_off =
                window_offset(arch.weekend_to_weekday, weekly, sm.weekday, sm.weekend);
            const double floor = 0.01 * base;

            std::vector<double> v(len);
            std::size_t clamps = 0;
            double e = 0.0;
            for (std::size_t t = 0; t < len; ++t) {
                const HourContext& h = ctx[t];
                double shape = 1.0 + daily * daily_shape(h.hour) + weekly * weekly_shape(h.dow) +
                               annual * std::cos(h.annual_phase);
                if (h.hour < 6) shape += night_off;
                if (h.dow >= 5) shape += weekend_off;
                const double dt = temperature[t] - arch.temp_ref_c;
                e = arch.ar_coeff * e + (arch.noise_std > 0.0 ? rng.normal(0.0, arch.noise_std)
                                                              : 0.0);
                double x = base * shape + arch.temp_linear * dt + tquad * dt * dt + e;
                if (x < floor) {
                    x = floor;
                    ++clamps;
                }
                v[t] = x;
            }
            out.collection.series[id] = std::move(v);
            out.collection.hierarchy[id] =
                "region" + std::to_string(g % static_cast<std::size_t>(cfg.regions));
            out.truth.archetype_of[id] = arch.name;
            out.truth.drift_status[id] = "stable";
            out.truth.clamp_count[id] = clamps;
        }
    }
    return out;
}

DriftResult inject_drift(const SeriesCollection& c, const std::vector<DriftEvent>& events) {
    DriftResult out;
    out.collection = c;
    for (const auto& [id, v] : c.series) out.labels[id] = "stable";

    for (const auto& ev : events) {
        if (ev.start_hour < c.start_hour || ev.start_hour > c.end_hour())
            throw ConfigError("drift: event start outside the collection range");
        if (ev.kind == DriftEvent::Kind::sudden && !(ev.magnitude > 0.0))
            throw ConfigError("drift: sudden factor must be positive");
        if (ev.kind == DriftEvent::Kind::incremental && !(ev.cap > 0.0 && ev.cap < 1.0))
            throw ConfigError("drift: incremental cap must be in (0, 1)");
        if (ev.kind == DriftEvent::Kind::recurring && !(std::fabs(ev.magnitude) < 1.0))
            throw ConfigError("drift: recurring amplitude delta must satisfy |delta| < 1");
        if (ev.affected.empty()) throw ConfigError("drift: event affects no series");

        for (const auto& id : ev.affected) {
            auto it = out.collection.series.find(id);
            if (it == out.collection.series.end())
                throw ConfigError("drift: unknown series '" + id + "'");
            std::vector<double>& v = it->second;
            const std::int64_t start_idx = ev.start_hour - c.start_hour;
            for (std::size_t t = static_cast<std::size_t>(start_idx); t < v.size(); ++t) {
                const double dt = static_cast<double>(t) - static_cast<double>(start_idx);
                double factor = 1.0;
                switch (ev.kind) {
                case DriftEvent::Kind::sudden: factor = ev.magnitude; break;
                case DriftEvent::Kind::incremental:
                    factor = 1.0 + std::clamp(ev.magnitude * dt, -ev.cap, ev.cap);
                    break;
                case DriftEvent::Kind::recurring: {
                    const int hour = civil_from_hours(c.start_hour + static_cast<std::int64_t>(t)).hour;
                    factor = 1.0 + ev.magnitude * daily_shape(hour);
                    break;
                }
                }
                v[t] *= factor;
            }
            out.labels[id] = "drifting";
        }
    }
    return out;
}

namespace {

std::string wide_csv(const SeriesCollection& c,
                     const std::map<std::string, std::vector<double>>& columns) {
    std::string text = "timestamp";
    std::size_t len = 0;
    for (const auto& [id, v] : columns) {
        text += "," + id;
        len = std::max(len, v.size());
    }
    text += "\n";
    for (std::size_t t = 0; t < len; ++t) {
        text += format_hour_timestamp(c.start_hour + static_cast<std::int64_t>(t));
        for (const auto& [id, v] : columns) {
            text += ",";
            if (t < v.size()) text += format_double(v[t]);
        }
        text += "\n";
    }
    return text;
}

} // namespace

std::string collection_to_wide_csv(const SeriesCollection& c) {
    return wide_csv(c, c.series);
}

std::string exogenous_to_wide_csv(const SeriesCollection& c) {
    return wide_csv(c, c.exogenous);
}

std::string hierarchy_to_csv(const SeriesCollection& c) {
    std::string text = "series_id,region_id\n";
    for (const auto& [id, region] : c.hierarchy) text += id + "," + region + "\n";
    return text;
}

std::string labels_to_csv(const SeriesCollection& c, const GroundTruth& truth) {
    std::string text = "series_id,archetype,region,drift_status\n";
    for (const auto& [id, v] : c.series) {
        const auto arch = truth.archetype_of.find(id);
        const auto drift = truth.drift_status.find(id);
        const auto region = c.hierarchy.find(id);
        text += id + "," + (arch == truth.archetype_of.end() ? "" : arch->second) + "," +
                (region == c.hierarchy.end() ? "" : region->second) + "," +
                (drift == truth.drift_status.end() ? "stable" : drift->second) + "\n";
    }
    return text;
}

} // namespace gridcast
