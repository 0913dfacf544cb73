#include "gridcast/csv.hpp"
#include "gridcast/series.hpp"
#include "gridcast/synthgen.hpp"
#include "gridcast/timeutil.hpp"

#include "support/testutil.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace gridcast;

namespace {

// One archetype with every stochastic and exogenous term switched off.
ArchetypeConfig silent_archetype(const std::string& name = "flat") {
    ArchetypeConfig a;
    a.name = name;
    a.base_mw = 100.0;
    a.daily_amplitude = 0.0;
    a.weekly_amplitude = 0.0;
    a.annual_amplitude = 0.0;
    a.night_to_day = 1.0;
    a.weekend_to_weekday = 1.0;
    a.temp_linear = 0.0;
    a.temp_quad = 0.0;
    a.noise_std = 0.0;
    a.jitter = 0.0;
    return a;
}

SynthConfig small_config(std::vector<ArchetypeConfig> archetypes,
                         std::size_t per = 2, std::size_t hours = 24 * 35) {
    SynthConfig cfg;
    cfg.archetypes = std::move(archetypes);
    cfg.series_per_archetype = per;
    cfg.regions = 2;
    cfg.length_hours = hours;
    cfg.seed = 7;
    return cfg;
}

double window_ratio(const std::vector<double>& v, std::int64_t start, bool weekend) {
    double in_sum = 0.0, out_sum = 0.0;
    std::size_t in_n = 0, out_n = 0;
    for (std::size_t t = 0; t < v.size(); ++t) {
        const CivilTime ct = civil_from_hours(start + static_cast<std::int64_t>(t));
        if (weekend) {
            if (ct.dow >= 5) { in_sum += v[t]; ++in_n; }
            else { out_sum += v[t]; ++out_n; }
        } else {
            if (ct.hour < 6) { in_sum += v[t]; ++in_n; }
            else if (ct.hour >= 12 && ct.hour < 18) { out_sum += v[t]; ++out_n; }
        }
    }
    return (in_sum / static_cast<double>(in_n)) / (out_sum / static_cast<double>(out_n));
}

} // namespace

TEST_CASE("generation is deterministic per seed") {
    SynthConfig cfg = small_config({ArchetypeConfig::residential(),
                                    ArchetypeConfig::industrial()});
    SynthResult a = generate_collection(cfg);
    SynthResult b = generate_collection(cfg);
    CHECK(a.collection.series == b.collection.series);
    CHECK(a.collection.exogenous == b.collection.exogenous);
    CHECK(a.truth.archetype_of == b.truth.archetype_of);

    cfg.seed = 8;
    SynthResult c = generate_collection(cfg);
    CHECK(a.collection.series.at("area00") != c.collection.series.at("area00"));
}

TEST_CASE("adding series never disturbs the existing ones") {
    SynthConfig three = small_config({ArchetypeConfig::residential()}, 3);
    SynthConfig five = small_config({ArchetypeConfig::residential()}, 5);
    SynthResult a = generate_collection(three);
    SynthResult b = generate_collection(five);
    REQUIRE(a.collection.series.size() == 3);
    REQUIRE(b.collection.series.size() == 5);
    for (const auto& [id, v] : a.collection.series)
        CHECK(b.collection.series.at(id) == v); // bit-identical
    CHECK(b.collection.exogenous.at("temperature") ==
          a.collection.exogenous.at("temperature"));
}

TEST_CASE("with everything switched off the series is the base, exactly") {
    SynthResult r = generate_collection(small_config({silent_archetype()}, 1));
    const auto& v = r.collection.series.at("area00");
    for (double x : v) CHECK(x == 100.0);
    CHECK(r.truth.clamp_count.at("area00") == 0);
    CHECK(r.truth.drift_status.at("area00") == "stable");
}

TEST_CASE("the night-to-day ratio target is hit exactly by the deterministic part") {
    ArchetypeConfig a = silent_archetype("shaped");
    a.daily_amplitude = 0.3;
    a.night_to_day = 0.7;
    SynthResult r = generate_collection(small_config({a}, 1));
    const double measured =
        window_ratio(r.collection.series.at("area00"), r.collection.start_hour, false);
    CHECK(measured == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("the weekend-to-weekday ratio target is hit exactly over whole weeks") {
    ArchetypeConfig a = silent_archetype("weekly");
    a.weekly_amplitude = 0.1;
    a.weekend_to_weekday = 0.85;
    SynthResult r = generate_collection(small_config({a}, 1, 24 * 35)); // 5 weeks
    const double measured =
        window_ratio(r.collection.series.at("area00"), r.collection.start_hour, true);
    CHECK(measured == doctest::Approx(0.85).epsilon(1e-9));
}

TEST_CASE("the stock archetypes are separable by shape statistics") {
    SynthConfig cfg = small_config({ArchetypeConfig::residential(),
                                    ArchetypeConfig::industrial()},
                                   4, 24 * 60);
    SynthResult r = generate_collection(cfg);
    double res_si = 0.0, ind_si = 0.0;
    int res_n = 0, ind_n = 0;
    for (const auto& [id, v] : r.collection.series) {
        HeterogeneityProfile p = heterogeneity_profile(v, r.collection.start_hour, 0);
        if (r.truth.archetype_of.at(id) == "residential") {
            res_si += p.seasonality_index;
            ++res_n;
            CHECK(p.night_to_day < 1.0);
        } else {
            ind_si += p.seasonality_index;
            ++ind_n;
        }
    }
    res_si /= res_n;
    ind_si /= ind_n;
    CHECK(res_si > 3.0 * ind_si);
}

TEST_CASE("values are clamped at one percent of the base and counted") {
    ArchetypeConfig a = silent_archetype("noisy");
    a.base_mw = 1.0;
    a.noise_std = 5.0; // innovations dwarf the base
    a.ar_coeff = 0.0;
    SynthResult r = generate_collection(small_config({a}, 1));
    const auto& v = r.collection.series.at("area00");
    const double floor = 0.01 * 1.0;
    double lo = *std::min_element(v.begin(), v.end());
    CHECK(lo == floor);
    CHECK(r.truth.clamp_count.at("area00") > 0);
    for (double x : v) CHECK(x >= floor);
}

TEST_CASE("regions are assigned round-robin and land in the hierarchy") {
    SynthConfig cfg = small_config({silent_archetype()}, 4);
    cfg.regions = 2;
    SynthResult r = generate_collection(cfg);
    CHECK(r.collection.hierarchy.at("area00") == "region0");
    CHECK(r.collection.hierarchy.at("area01") == "region1");
    CHECK(r.collection.hierarchy.at("area02") == "region0");
    CHECK(r.collection.hierarchy.at("area03") == "region1");
}

TEST_CASE("synth config validation") {
    SynthConfig cfg = small_config({silent_archetype()});
    cfg.length_hours = 24 * 27; // one day short of four weeks
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config({});
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config({silent_archetype()});
    cfg.series_per_archetype = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    ArchetypeConfig bad = silent_archetype();
    bad.ar_coeff = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = silent_archetype();
    bad.night_to_day = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config serialization round trips") {
    SynthConfig cfg = small_config({ArchetypeConfig::residential()});
    SynthConfig back = SynthConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    SynthResult a = generate_collection(cfg);
    SynthResult b = generate_collection(back);
    CHECK(a.collection.series == b.collection.series);
}

// ---- drift injection ----

TEST_CASE("a sudden event scales the tail and leaves the head bit-identical") {
    SynthResult base = generate_collection(
        small_config({ArchetypeConfig::residential()}, 3));
    const std::int64_t start = base.collection.start_hour + 400;
    DriftEvent ev;
    ev.kind = DriftEvent::Kind::sudden;
    ev.start_hour = start;
    ev.magnitude = 0.8;
    ev.affected = {"area00", "area01"};
    DriftResult r = inject_drift(base.collection, {ev});

    const auto& orig = base.collection.series.at("area00");
    const auto& moved = r.collection.series.at("area00");
    for (std::size_t t = 0; t < 400; ++t) CHECK(moved[t] == orig[t]);
    for (std::size_t t = 400; t < orig.size(); ++t) CHECK(moved[t] == orig[t] * 0.8);
    CHECK(r.collection.series.at("area02") == base.collection.series.at("area02"));
    CHECK(r.labels.at("area00") == "drifting");
    CHECK(r.labels.at("area01") == "drifting");
    CHECK(r.labels.at("area02") == "stable");
}

TEST_CASE("an incremental event with zero slope is the identity") {
    SynthResult base = generate_collection(small_config({silent_archetype()}, 1));
    DriftEvent ev;
    ev.kind = DriftEvent::Kind::incremental;
    ev.start_hour = base.collection.start_hour + 100;
    ev.magnitude = 0.0;
    ev.cap = 0.5;
    ev.affected = {"area00"};
    DriftResult r = inject_drift(base.collection, {ev});
    CHECK(r.collection.series.at("area00") == base.collection.series.at("area00"));
    CHECK(r.labels.at("area00") == "drifting"); // labeled by the event, not the effect
}

TEST_CASE("an incremental ramp saturates at the cap") {
    SynthResult base = generate_collection(small_config({silent_archetype()}, 1));
    const std::size_t start_idx = 100;
    DriftEvent ev;
    ev.kind = DriftEvent::Kind::incremental;
    ev.start_hour = base.collection.start_hour + static_cast<std::int64_t>(start_idx);
    ev.magnitude = -0.01; // down 1% per hour
    ev.cap = 0.3;
    ev.affected = {"area00"};
    DriftResult r = inject_drift(base.collection, {ev});
    const auto& orig = base.collection.series.at("area00");
    const auto& moved = r.collection.series.at("area00");
    CHECK(moved[start_idx] == orig[start_idx]); // dt = 0
    CHECK(moved[start_idx + 10] ==
          doctest::Approx(orig[start_idx + 10] * 0.9).epsilon(1e-12));
    // far past the cap: factor pinned at 1 - 0.3
    CHECK(moved[start_idx + 500] == orig[start_idx + 500] * 0.7);
}

TEST_CASE("a recurring event reshapes the day with a cosine bump") {
    SynthResult base = generate_collection(small_config({silent_archetype()}, 1));
    DriftEvent ev;
    ev.kind = DriftEvent::Kind::recurring;
    ev.start_hour = base.collection.start_hour; // whole range
    ev.magnitude = 0.2;
    ev.affected = {"area00"};
    DriftResult r = inject_drift(base.collection, {ev});
    const auto& orig = base.collection.series.at("area00");
    const auto& moved = r.collection.series.at("area00");
    for (std::size_t t = 0; t < orig.size(); ++t) {
        const int hour =
            civil_from_hours(base.collection.start_hour + static_cast<std::int64_t>(t)).hour;
        const double factor =
            1.0 + 0.2 * std::cos(2.0 * M_PI * (hour - 15) / 24.0);
        CHECK(moved[t] == doctest::Approx(orig[t] * factor).epsilon(1e-12));
    }
    // Mid-afternoon gains the full 20%, deep night loses.
    const std::size_t t15 = 15;
    CHECK(moved[t15] == doctest::Approx(orig[t15] * 1.2).epsilon(1e-12));
    const std::size_t t3 = 3;
    CHECK(moved[t3] == doctest::Approx(orig[t3] * 0.8).epsilon(1e-12));
}

TEST_CASE("drift event validation") {
    SynthResult base = generate_collection(small_config({silent_archetype()}, 1));
    DriftEvent ev;
    ev.affected = {"area00"};
    ev.start_hour = base.collection.start_hour - 5;
    CHECK_THROWS_AS(inject_drift(base.collection, {ev}), ConfigError);
    ev.start_hour = base.collection.start_hour;
    ev.kind = DriftEvent::Kind::sudden;
    ev.magnitude = 0.0;
    CHECK_THROWS_AS(inject_drift(base.collection, {ev}), ConfigError);
    ev.magnitude = 0.8;
    ev.affected = {"nope"};
    CHECK_THROWS_AS(inject_drift(base.collection, {ev}), ConfigError);
    ev.affected = {};
    CHECK_THROWS_AS(inject_drift(base.collection, {ev}), ConfigError);
    DriftEvent rec;
    rec.kind = DriftEvent::Kind::recurring;
    rec.start_hour = base.collection.start_hour;
    rec.magnitude = 1.0;
    rec.affected = {"area00"};
    CHECK_THROWS_AS(inject_drift(base.collection, {rec}), ConfigError);
    DriftEvent inc;
    inc.kind = DriftEvent::Kind::incremental;
    inc.start_hour = base.collection.start_hour;
    inc.magnitude = 0.01;
    inc.cap = 1.5;
    inc.affected = {"area00"};
    CHECK_THROWS_AS(inject_drift(base.collection, {inc}), ConfigError);
}

// ---- emission and re-ingestion ----

TEST_CASE("emitted CSVs ingest back into the same collection") {
    testutil::TempDir tmp;
    SynthConfig cfg = small_config({ArchetypeConfig::residential(),
                                    ArchetypeConfig::industrial()},
                                   2);
    SynthResult r = generate_collection(cfg);
    write_text_file(tmp.file("loads.csv"), collection_to_wide_csv(r.collection));
    write_text_file(tmp.file("temperature.csv"), exogenous_to_wide_csv(r.collection));
    write_text_file(tmp.file("hierarchy.csv"), hierarchy_to_csv(r.collection));

    SeriesCollection round = ingest_wide_csv(tmp.file("loads.csv"), {});
    attach_exogenous_csv(round, tmp.file("temperature.csv"), {});
    attach_hierarchy_csv(round, tmp.file("hierarchy.csv"));

    CHECK(round.start_hour == r.collection.start_hour);
    CHECK(round.hierarchy == r.collection.hierarchy);
    REQUIRE(round.series.size() == r.collection.series.size());
    // Values pass through a 10-significant-digit text form.
    for (const auto& [id, v] : r.collection.series) {
        const auto& w = round.series.at(id);
        REQUIRE(w.size() == v.size());
        for (std::size_t t = 0; t < v.size(); ++t)
            CHECK(w[t] == doctest::Approx(v[t]).epsilon(1e-9));
    }
    const auto& temp = r.collection.exogenous.at("temperature");
    const auto& temp2 = round.exogenous.at("temperature");
    for (std::size_t t = 0; t < temp.size(); ++t)
        CHECK(temp2[t] == doctest::Approx(temp[t]).epsilon(1e-9));
}

TEST_CASE("the labels file names every series with archetype and status") {
    SynthConfig cfg = small_config({ArchetypeConfig::residential()}, 2);
    SynthResult r = generate_collection(cfg);
    std::string text = labels_to_csv(r.collection, r.truth);
    CHECK(text.find("series_id,archetype,region,drift_status") == 0);
    CHECK(text.find("area00,residential,region0,stable") != std::string::npos);
    CHECK(text.find("area01,residential,region1,stable") != std::string::npos);
}
