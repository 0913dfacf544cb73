#include "gridcast/csv.hpp"
#include "gridcast/rng.hpp"
#include "gridcast/series.hpp"
#include "gridcast/timeutil.hpp"

#include "support/testutil.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace gridcast;
using testutil::TempDir;

namespace {

std::string stamp(std::int64_t h) { return format_hour_timestamp(h); }

// Wide load CSV with the given per-series cell texts; "" leaves a cell empty
// and a missing row is produced by listing the hour in `skip_rows`.
std::string wide_csv(std::int64_t start, const std::vector<std::string>& ids,
                     const std::vector<std::vector<std::string>>& cells,
                     const std::vector<std::size_t>& skip_rows = {}) {
    std::string out = "timestamp";
    for (const auto& id : ids) out += "," + id;
    out += "\n";
    for (std::size_t t = 0; t < cells.size(); ++t) {
        bool skip = false;
        for (std::size_t s : skip_rows) skip = skip || s == t;
        if (skip) continue;
        out += stamp(start + static_cast<std::int64_t>(t));
        for (const auto& cell : cells[t]) out += "," + cell;
        out += "\n";
    }
    return out;
}

std::vector<std::vector<std::string>> numeric_grid(std::size_t rows, std::size_t cols) {
    std::vector<std::vector<std::string>> g(rows, std::vector<std::string>(cols));
    for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t j = 0; j < cols; ++j)
            g[t][j] = std::to_string(100 + 10 * j + t);
    return g;
}

} // namespace

TEST_CASE("ingest reads a clean two-series file") {
    TempDir tmp;
    const std::int64_t start = testutil::h2019();
    write_text_file(tmp.file("l.csv"), wide_csv(start, {"s1", "s2"}, numeric_grid(48, 2)));
    SeriesCollection c = ingest_wide_csv(tmp.file("l.csv"), {});
    CHECK(c.start_hour == start);
    REQUIRE(c.series.size() == 2);
    CHECK(c.series.at("s1").size() == 48);
    CHECK(c.series.at("s2").size() == 48);
    CHECK(c.series.at("s1")[0] == 100.0);
    CHECK(c.series.at("s2")[47] == 157.0);
    CHECK(c.max_length() == 48);
    CHECK(c.end_hour() == start + 47);
}

TEST_CASE("a missing row is a gap in every column") {
    TempDir tmp;
    const std::int64_t start = testutil::h2019();
    // Row for hour 5 is absent.
    write_text_file(tmp.file("l.csv"),
                    wide_csv(start, {"s1"}, numeric_grid(10, 1), {5}));

    IngestConfig reject{GapPolicy::reject, 3};
    CHECK_THROWS_WITH_AS(ingest_wide_csv(tmp.file("l.csv"), reject),
                         doctest::Contains(stamp(start + 5).c_str()), DataError);

    SeriesCollection c = ingest_wide_csv(tmp.file("l.csv"), {});
    REQUIRE(c.series.at("s1").size() == 10);
    CHECK(c.series.at("s1")[5] == c.series.at("s1")[4]); // forward filled
    CHECK(c.series.at("s1")[6] == 106.0);                // later values intact
}

TEST_CASE("an empty cell is a gap in that column only") {
    TempDir tmp;
    const std::int64_t start = testutil::h2019();
    auto grid = numeric_grid(8, 2);
    grid[3][0] = ""; // s1 misses hour 3, s2 does not
    write_text_file(tmp.file("l.csv"), wide_csv(start, {"s1", "s2"}, grid));
    SeriesCollection c = ingest_wide_csv(tmp.file("l.csv"), {});
    CHECK(c.series.at("s1")[3] == c.series.at("s1")[2]);
    CHECK(c.series.at("s2")[3] == 113.0);
}

TEST_CASE("gaps longer than the fill limit are rejected") {
    TempDir tmp;
    const std::int64_t start = testutil::h2019();
    auto grid = numeric_grid(12, 1);
    for (std::size_t t = 4; t < 8; ++t) grid[t][0] = ""; // 4-hour gap
    write_text_file(tmp.file("l.csv"), wide_csv(start, {"s1"}, grid));
    CHECK_THROWS_WITH_AS(ingest_wide_csv(tmp.file("l.csv"), IngestConfig{GapPolicy::forward_fill, 3}),
                         doctest::Contains("gap of 4 hours"), DataError);
    SeriesCollection c = ingest_wide_csv(tmp.file("l.csv"), IngestConfig{GapPolicy::forward_fill, 4});
    CHECK(c.series.at("s1")[7] == c.series.at("s1")[3]);
}

TEST_CASE("trailing empty cells are truncation, not gaps") {
    TempDir tmp;
    const std::int64_t start = testutil::h2019();
    auto grid = numeric_grid(10, 2);
    grid[8][1] = "";
    grid[9][1] = ""; // s2 simply ends two hours early
    write_text_file(tmp.file("l.csv"), wide_csv(start, {"s1", "s2"}, grid));
    SeriesCollection c = ingest_wide_csv(tmp.file("l.csv"), IngestConfig{GapPolicy::reject, 0});
    CHECK(c.series.at("s1").size() == 10);
    CHECK(c.series.at("s2").size() == 8);
    CHECK(c.max_length() == 10);
}

TEST_CASE("ingest rejects malformed input") {
    TempDir tmp;
    const std::int64_t start = testutil::h2019();

    write_text_file(tmp.file("dup.csv"),
                    "timestamp,s1\n" + stamp(start) + ",1\n" + stamp(start) + ",2\n");
    CHECK_THROWS_AS(ingest_wide_csv(tmp.file("dup.csv"), {}), DataError);

    write_text_file(tmp.file("back.csv"),
                    "timestamp,s1\n" + stamp(start + 1) + ",1\n" + stamp(start) + ",2\n");
    CHECK_THROWS_AS(ingest_wide_csv(tmp.file("back.csv"), {}), DataError);

    write_text_file(tmp.file("bad.csv"),
                    "timestamp,s1\n" + stamp(start) + ",not_a_number\n");
    CHECK_THROWS_AS(ingest_wide_csv(tmp.file("bad.csv"), {}), DataError);

    write_text_file(tmp.file("halfhour.csv"), "timestamp,s1\n2019-01-01T00:30:00,1\n");
    CHECK_THROWS_AS(ingest_wide_csv(tmp.file("halfhour.csv"), {}), DataError);

    write_text_file(tmp.file("leading.csv"),
                    "timestamp,s1\n" + stamp(start) + ",\n" + stamp(start + 1) + ",2\n");
    CHECK_THROWS_WITH_AS(ingest_wide_csv(tmp.file("leading.csv"), {}),
                         doctest::Contains("starts with a gap"), DataError);

    write_text_file(tmp.file("empty.csv"), "timestamp,s1\n");
    CHECK_THROWS_AS(ingest_wide_csv(tmp.file("empty.csv"), {}), DataError);
}

TEST_CASE("exogenous channels attach on the shared clock") {
    TempDir tmp;
    const std::int64_t start = testutil::h2019();
    write_text_file(tmp.file("l.csv"), wide_csv(start, {"s1"}, numeric_grid(24, 1)));
    write_text_file(tmp.file("t.csv"), wide_csv(start, {"temperature"}, numeric_grid(24, 1)));
    SeriesCollection c = ingest_wide_csv(tmp.file("l.csv"), {});
    attach_exogenous_csv(c, tmp.file("t.csv"), {});
    REQUIRE(c.exogenous.count("temperature") == 1);
    CHECK(c.exogenous.at("temperature").size() == 24);

    write_text_file(tmp.file("off.csv"),
                    wide_csv(start + 1, {"temperature"}, numeric_grid(24, 1)));
    SeriesCollection c2 = ingest_wide_csv(tmp.file("l.csv"), {});
    CHECK_THROWS_AS(attach_exogenous_csv(c2, tmp.file("off.csv"), {}), DataError);

    SeriesCollection c3 = ingest_wide_csv(tmp.file("l.csv"), {});
    attach_exogenous_csv(c3, tmp.file("t.csv"), {});
    CHECK_THROWS_WITH_AS(attach_exogenous_csv(c3, tmp.file("t.csv"), {}),
                         doctest::Contains("duplicate channel"), DataError);
}

TEST_CASE("hierarchy attaches from a two-column file") {
    TempDir tmp;
    const std::int64_t start = testutil::h2019();
    write_text_file(tmp.file("l.csv"), wide_csv(start, {"s1", "s2"}, numeric_grid(24, 2)));
    write_text_file(tmp.file("h.csv"), "series_id,region_id\ns1,north\ns2,south\n");
    SeriesCollection c = ingest_wide_csv(tmp.file("l.csv"), {});
    attach_hierarchy_csv(c, tmp.file("h.csv"));
    CHECK(c.hierarchy.at("s1") == "north");
    CHECK(c.hierarchy.at("s2") == "south");

    write_text_file(tmp.file("badh.csv"), "region,series\ns1,north\n");
    CHECK_THROWS_AS(attach_hierarchy_csv(c, tmp.file("badh.csv")), DataError);
}

TEST_CASE("split partitions every series and reconstructs it exactly") {
    SeriesCollection c;
    c.start_hour = testutil::h2019();
    std::vector<double> v(100);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = static_cast<double>(t);
    c.series["s1"] = v;
    c.exogenous["temperature"] = v;

    SplitSpec s{c.start_hour + 59, c.start_hour + 79, c.start_hour + 99};
    SplitViews views = split_by_time(c, s);
    CHECK(views.train.series.at("s1").size() == 60);
    CHECK(views.val.series.at("s1").size() == 20);
    CHECK(views.test.series.at("s1").size() == 20);
    CHECK(views.train.start_hour == c.start_hour);
    CHECK(views.val.start_hour == c.start_hour + 60);
    CHECK(views.test.start_hour == c.start_hour + 80);
    CHECK(views.val.series.at("s1")[0] == 60.0);
    CHECK(views.test.series.at("s1")[19] == 99.0);
    CHECK(views.train.exogenous.at("temperature").size() == 60);

    std::vector<double> rebuilt = views.train.series.at("s1");
    rebuilt.insert(rebuilt.end(), views.val.series.at("s1").begin(),
                   views.val.series.at("s1").end());
    rebuilt.insert(rebuilt.end(), views.test.series.at("s1").begin(),
                   views.test.series.at("s1").end());
    CHECK(rebuilt == v);

    SplitSpec bad{c.start_hour + 79, c.start_hour + 59, c.start_hour + 99};
    CHECK_THROWS_AS(split_by_time(c, bad), ConfigError);
    SplitSpec early{c.start_hour - 10, c.start_hour + 79, c.start_hour + 99};
    CHECK_THROWS_AS(split_by_time(c, early), ConfigError);
}

TEST_CASE("slice_collection clips to each member's extent") {
    SeriesCollection c = testutil::wavy_collection(2, 50);
    c.series["short"] = std::vector<double>(10, 5.0);
    SeriesCollection w = slice_collection(c, c.start_hour + 5, c.start_hour + 20);
    CHECK(w.start_hour == c.start_hour + 5);
    CHECK(w.series.at("a0").size() == 16); // inclusive window
    CHECK(w.series.at("a0")[0] == c.series.at("a0")[5]);
    CHECK(w.series.at("short").size() == 5); // clipped at its own end
    SeriesCollection past = slice_collection(c, c.start_hour + 100, c.start_hour + 120);
    CHECK(past.series.empty()); // nothing in range is dropped, not an error
    CHECK_THROWS_AS(slice_collection(c, c.start_hour + 20, c.start_hour + 5), ConfigError);
}

TEST_CASE("normalizer maps the training range onto [0, 1] without clipping") {
    SeriesCollection train;
    train.start_hour = 0;
    train.series["s"] = {10.0, 20.0, 30.0};
    Normalizer n = Normalizer::fit(train);
    const MinMax& mm = n.series_stats("s");
    CHECK(Normalizer::apply_value(mm, 10.0) == 0.0);
    CHECK(Normalizer::apply_value(mm, 20.0) == 0.5);
    CHECK(Normalizer::apply_value(mm, 30.0) == 1.0);
    CHECK(Normalizer::apply_value(mm, 40.0) == 1.5); // drift passes through unclipped

    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        double v = rng.uniform(-50.0, 90.0);
        double round = Normalizer::invert_value(mm, Normalizer::apply_value(mm, v));
        CHECK(round == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("normalizer statistics come from the training view only") {
    SeriesCollection c = testutil::wavy_collection(1, 300);
    SplitSpec s{c.start_hour + 199, c.start_hour + 249, c.start_hour + 299};
    SplitViews v1 = split_by_time(c, s);
    Normalizer n1 = Normalizer::fit(v1.train);

    // Scribble over the evaluation windows; the statistics must not move.
    for (std::size_t t = 200; t < 300; ++t) c.series.at("a0")[t] *= 10.0;
    SplitViews v2 = split_by_time(c, s);
    Normalizer n2 = Normalizer::fit(v2.train);
    CHECK(n1.series_stats("a0").min == n2.series_stats("a0").min);
    CHECK(n1.series_stats("a0").max == n2.series_stats("a0").max);
}

TEST_CASE("normalizer rejects constant and empty training series") {
    SeriesCollection flat;
    flat.start_hour = 0;
    flat.series["s"] = std::vector<double>(24, 7.0);
    CHECK_THROWS_WITH_AS(Normalizer::fit(flat), doctest::Contains("constant"), DataError);
}

TEST_CASE("normalizer applies to whole collections and round trips as json") {
    SeriesCollection c = testutil::wavy_collection(2, 200);
    Normalizer n = Normalizer::fit(c);
    SeriesCollection normed = n.apply(c);
    for (const auto& [id, v] : normed.series) {
        double lo = *std::min_element(v.begin(), v.end());
        double hi = *std::max_element(v.begin(), v.end());
        CHECK(lo == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(hi == doctest::Approx(1.0).epsilon(1e-12));
    }
    // invert(apply(x)) == x within float noise
    auto back = n.invert_series("a0", normed.series.at("a0"));
    for (std::size_t t = 0; t < back.size(); ++t)
        CHECK(back[t] == doctest::Approx(c.series.at("a0")[t]).epsilon(1e-12));

    Normalizer n2 = Normalizer::from_json(n.to_json());
    CHECK(n2.series_stats("a0").min == n.series_stats("a0").min);
    CHECK(n2.series_stats("a1").max == n.series_stats("a1").max);
    CHECK(n2.channel_stats("temperature").min == n.channel_stats("temperature").min);
}

TEST_CASE("aggregation sums element-wise on the raw scale") {
    SeriesCollection c;
    c.start_hour = 0;
    c.series["a"] = {1.0, 2.0, 3.0};
    c.series["b"] = {4.0, 5.0, 6.0};
    c.hierarchy["a"] = "r1";
    c.hierarchy["b"] = "r1";

    SeriesCollection region = aggregate_sum(c, AggregateLevel::area_to_region);
    REQUIRE(region.series.size() == 1);
    CHECK(region.series.at("r1") == std::vector<double>{5.0, 7.0, 9.0});

    SeriesCollection system = aggregate_sum(c, AggregateLevel::region_to_system);
    REQUIRE(system.series.count("system") == 1);
    CHECK(system.series.at("system") == std::vector<double>{5.0, 7.0, 9.0});
}

TEST_CASE("aggregation truncates to the shortest member and keeps channels") {
    SeriesCollection c;
    c.start_hour = 0;
    c.series["a"] = {1.0, 2.0, 3.0, 4.0};
    c.series["b"] = {10.0, 20.0};
    c.hierarchy["a"] = "r";
    c.hierarchy["b"] = "r";
    c.exogenous["temperature"] = {0.0, 1.0, 2.0, 3.0};
    SeriesCollection region = aggregate_sum(c, AggregateLevel::area_to_region);
    CHECK(region.series.at("r") == std::vector<double>{11.0, 22.0});
    CHECK(region.exogenous.at("temperature").size() == 4);

    SeriesCollection no_label;
    no_label.start_hour = 0;
    no_label.series["a"] = {1.0};
    CHECK_THROWS_AS(aggregate_sum(no_label, AggregateLevel::area_to_region), DataError);
}

TEST_CASE("aggregation is linear in its inputs") {
    SeriesCollection c = testutil::wavy_collection(4, 60, false);
    SeriesCollection sys1 = aggregate_sum(c, AggregateLevel::region_to_system);
    SeriesCollection scaled = c;
    for (auto& [id, v] : scaled.series)
        for (double& x : v) x *= 3.0;
    SeriesCollection sys3 = aggregate_sum(scaled, AggregateLevel::region_to_system);
    for (std::size_t t = 0; t < sys1.series.at("system").size(); ++t)
        CHECK(sys3.series.at("system")[t] ==
              doctest::Approx(3.0 * sys1.series.at("system")[t]).epsilon(1e-12));
}
