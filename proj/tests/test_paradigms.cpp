#include "gridcast/paradigms.hpp"
#include "gridcast/metrics.hpp"
#include "gridcast/timeutil.hpp"

#include "support/testutil.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

using namespace gridcast;

namespace {

FeatureSpec bare_spec() {
    FeatureSpec s;
    s.exogenous.clear();
    s.interactions.clear();
    return s;
}

Hyperparams ridge_hp(double alpha) {
    Hyperparams hp = Hyperparams::local_defaults();
    hp.alpha = alpha;
    return hp;
}

// Six wavy series over 40 days with a temperature channel; splits fall on
// whole days so the training window holds several full weekly cycles.
struct Fixture {
    SeriesCollection raw;
    SplitViews views;
    SeriesCollection eval_slice; // warmup context + val + test targets
    std::int64_t val_start;

    Fixture() : raw(testutil::wavy_collection(6, 960)) {
        const std::int64_t s = raw.start_hour;
        views = split_by_time(raw, SplitSpec{s + 671, s + 815, s + 959});
        val_start = s + 672;
        eval_slice = slice_collection(raw, val_start - 168, s + 959);
    }
};

const Fixture& fx() {
    static Fixture f;
    return f;
}

bool same_doubles(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

} // namespace

TEST_CASE("the local ensemble carries one model per series") {
    const Fixture& f = fx();
    LocalEnsemble le = train_local(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                   ridge_hp(1.0), 2);
    CHECK(le.models.size() == 6);
    CHECK(model_count(le) == 6);
    for (const auto& [id, m] : le.models) {
        INFO("series ", id);
        CHECK(m.kind() == ModelKind::ridge);
    }
}

TEST_CASE("local fits are independent: removing a neighbour changes nothing") {
    const Fixture& f = fx();
    SeriesCollection pruned = f.raw;
    pruned.series.erase("a3");
    SplitViews pv = split_by_time(pruned, SplitSpec{f.raw.start_hour + 671,
                                                    f.raw.start_hour + 815,
                                                    f.raw.start_hour + 959});

    LocalEnsemble all = train_local(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                    ridge_hp(1.0), 2);
    LocalEnsemble five = train_local(pv.train, FeatureSpec{}, ModelKind::ridge,
                                     ridge_hp(1.0), 2);

    ForecastResult ra = forecast_series(all, "a0", f.eval_slice);
    ForecastResult rb = forecast_series(five, "a0", f.eval_slice);
    CHECK(same_doubles(ra.yhat, rb.yhat));
    CHECK(same_doubles(ra.y, rb.y));

    // The pruned ensemble never saw a3 even though the eval window has it.
    CHECK_THROWS_AS(forecast_series(five, "a3", f.eval_slice), DataError);
}

TEST_CASE("the global model pools every sample row across series") {
    const Fixture& f = fx();
    GlobalModel g = train_global(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                 ridge_hp(1.0), 2);
    // 672 training hours leave 672 - 168 rows per series, six series pooled.
    CHECK(g.pooled_rows == 6 * (672 - 168));
    CHECK(model_count(g) == 1);
}

TEST_CASE("cluster-wise training with K = 1 reproduces the pooled model") {
    const Fixture& f = fx();
    GlobalModel g = train_global(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                 ridge_hp(1.0), 2);
    ForecastResult gf = forecast_series(g, "a2", f.eval_slice);

    for (ClusterVariant v : {ClusterVariant::model_based, ClusterVariant::instance,
                             ClusterVariant::weighted_instance}) {
        INFO("variant ", to_string(v));
        ClusterwiseModel cw = train_clusterwise(f.views.train, FeatureSpec{},
                                                ModelKind::ridge, ridge_hp(1.0), v, 1,
                                                /*seed=*/5, 2);
        CHECK(cw.K == 1);
        CHECK(model_count(cw) == 1);
        CHECK(cw.models.at(0).to_json() == g.model.to_json());
        ForecastResult cf = forecast_series(cw, "a2", f.eval_slice);
        CHECK(same_doubles(cf.yhat, gf.yhat));
    }
}

TEST_CASE("pooling eight copies with an eightfold penalty leaves ridge alone") {
    SeriesCollection one;
    one.start_hour = testutil::h2019();
    one.series["a0"] = testutil::wavy_series(672, 100.0, 20.0, 0.4);

    SeriesCollection eight;
    eight.start_hour = one.start_hour;
    for (int i = 0; i < 8; ++i)
        eight.series["b" + std::to_string(i)] = one.series.at("a0");

    FeatureSpec spec = bare_spec();
    LocalEnsemble le = train_local(one, spec, ModelKind::ridge, ridge_hp(2.0), 1);
    GlobalModel g = train_global(eight, spec, ModelKind::ridge, ridge_hp(16.0), 1);

    const RidgeModel& a = le.models.at("a0").as_ridge();
    const RidgeModel& b = g.model.as_ridge();
    REQUIRE(a.theta.size() == b.theta.size());
    for (std::size_t j = 0; j < a.theta.size(); ++j) {
        INFO("coefficient ", j);
        CHECK(std::abs(a.theta[j] - b.theta[j]) < 1e-10);
    }
    CHECK(std::abs(a.intercept - b.intercept) < 1e-10);
}

TEST_CASE("forecasts cover exactly the hours past the warmup context") {
    const Fixture& f = fx();
    GlobalModel g = train_global(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                 ridge_hp(1.0), 2);
    ForecastResult r = forecast_series(g, "a1", f.eval_slice);

    const std::size_t window = f.eval_slice.series.at("a1").size();
    REQUIRE(r.yhat.size() == window - 168);
    CHECK(r.target_hours.front() == f.val_start);
    CHECK(r.target_hours.back() == f.raw.start_hour + 959);
    for (std::size_t i = 0; i < r.yhat.size(); ++i) {
        REQUIRE(std::isfinite(r.yhat[i]));
        // Actuals come back on the original scale, untouched.
        CHECK(r.y[i] == f.raw.series.at("a1")[672 - 168 + 168 + i]);
    }

    CHECK_THROWS_AS(forecast_series(g, "nope", f.eval_slice), DataError);
}

TEST_CASE("a noiseless periodic generator is forecast almost exactly") {
    const Fixture& f = fx();
    LocalEnsemble le = train_local(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                   ridge_hp(1e-8), 2);
    ForecastResult r = forecast_series(le, "a0", f.eval_slice);
    PointMetrics m = compute_metrics(r.y, r.yhat);
    // lag_168 alone reproduces a 168-periodic signal.
    CHECK(m.nmae_pct < 0.1);
}

TEST_CASE("zero-shot on the training window reproduces the in-sample forecast") {
    const Fixture& f = fx();
    ZeroShotInput in;
    in.series_id = "a4";
    in.values = f.raw.series.at("a4");
    in.start_hour = f.raw.start_hour;
    in.exogenous["temperature"] = f.raw.exogenous.at("temperature");
    in.eval_start_hour = f.val_start; // history is exactly the training window

    GlobalModel g = train_global(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                 ridge_hp(1.0), 2);
    ForecastResult want = forecast_series(g, "a4", f.eval_slice);
    ForecastResult got = zero_shot_forecast(g, in);
    CHECK(got.target_hours == want.target_hours);
    CHECK(same_doubles(got.yhat, want.yhat));
    CHECK(same_doubles(got.y, want.y));

    for (ClusterVariant v : {ClusterVariant::model_based, ClusterVariant::instance}) {
        INFO("variant ", to_string(v));
        ClusterwiseModel cw = train_clusterwise(f.views.train, FeatureSpec{},
                                                ModelKind::ridge, ridge_hp(1.0), v, 2,
                                                /*seed=*/9, 2);
        ForecastResult cw_want = forecast_series(cw, "a4", f.eval_slice);
        ForecastResult cw_got = zero_shot_forecast(cw, in);
        CHECK(same_doubles(cw_got.yhat, cw_want.yhat));
    }
}

TEST_CASE("zero-shot needs a week of history plus one target") {
    const Fixture& f = fx();
    GlobalModel g = train_global(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                 ridge_hp(1.0), 2);

    ZeroShotInput in;
    in.series_id = "fresh";
    in.values = testutil::wavy_series(200, 55.0, 9.0, 1.1);
    in.start_hour = f.raw.start_hour;
    in.exogenous["temperature"] = f.raw.exogenous.at("temperature");

    in.eval_start_hour = in.start_hour + 168; // one hour short of usable history
    CHECK_THROWS_WITH_AS(zero_shot_forecast(g, in), doctest::Contains("history"),
                         DataError);

    in.eval_start_hour = in.start_hour + 169;
    ForecastResult r = zero_shot_forecast(g, in);
    CHECK(r.yhat.size() == 200 - 169);
    CHECK(r.target_hours.front() == in.eval_start_hour);
    for (double v : r.yhat) CHECK(std::isfinite(v));

    in.eval_start_hour = in.start_hour + 200; // nothing left to score
    CHECK_THROWS_AS(zero_shot_forecast(g, in), DataError);

    LocalEnsemble le = train_local(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                   ridge_hp(1.0), 2);
    in.eval_start_hour = in.start_hour + 169;
    CHECK_THROWS_AS(zero_shot_forecast(le, in), ConfigError);
}

TEST_CASE("paradigm bundles survive a round trip through disk") {
    const Fixture& f = fx();
    testutil::TempDir tmp;

    LocalEnsemble le = train_local(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                   ridge_hp(1.0), 2);
    GlobalModel g = train_global(f.views.train, FeatureSpec{}, ModelKind::ridge,
                                 ridge_hp(1.0), 2);
    ClusterwiseModel cw = train_clusterwise(f.views.train, FeatureSpec{},
                                            ModelKind::ridge, ridge_hp(1.0),
                                            ClusterVariant::model_based, 2, 9, 2);

    const std::vector<std::pair<std::string, Paradigm>> all = {
        {"local", le}, {"global", g}, {"clusterwise", cw}};
    for (const auto& [name, p] : all) {
        INFO("paradigm ", name);
        const std::string dir = tmp.file(name);
        save_paradigm(p, dir);
        Paradigm q = load_paradigm(dir);
        CHECK(model_count(q) == model_count(p));
        ForecastResult want = forecast_series(p, "a5", f.eval_slice);
        ForecastResult got = forecast_series(q, "a5", f.eval_slice);
        CHECK(same_doubles(got.yhat, want.yhat));
    }

    // Clusters and notes are part of the bundle.
    Paradigm q = load_paradigm(tmp.file("clusterwise"));
    const auto& qc = std::get<ClusterwiseModel>(q);
    CHECK(qc.K == cw.K);
    CHECK(qc.notes == cw.notes);
    REQUIRE(qc.series_clusters.has_value());
    CHECK(qc.series_clusters->cluster_of_series == cw.series_clusters->cluster_of_series);

    std::filesystem::remove(tmp.file("global/models.json"));
    CHECK_THROWS_AS(load_paradigm(tmp.file("global")), DataError);
}

TEST_CASE("undersized row clusters are merged until every model has enough rows") {
    // 4 series x 480h leave 1248 pooled rows. Asking for 6 row clusters with a
    // 312-row floor (2 * min_samples_leaf) makes at least one merge inevitable:
    // the smallest of six clusters holds at most 208 rows.
    SeriesCollection c = testutil::wavy_collection(4, 480, false);
    Hyperparams hp;
    hp.n_estimators = 10;
    hp.learning_rate = 0.3;
    hp.max_depth = 2;
    hp.max_leaves = 4;
    hp.min_samples_leaf = 156;

    ClusterwiseModel cw = train_clusterwise(c, bare_spec(), ModelKind::gbdt, hp,
                                            ClusterVariant::instance, 6, 3, 2);

    CHECK(cw.K < 6);
    CHECK(cw.K >= 1);
    CHECK(!cw.notes.empty());
    for (const auto& note : cw.notes) {
        INFO(note);
        CHECK(note.find("below the") != std::string::npos);
        CHECK(note.find("reassigned") != std::string::npos);
    }
    REQUIRE(cw.instance_clusters.has_value());
    CHECK(cw.instance_clusters->K == cw.K);
    CHECK(cw.models.size() == static_cast<std::size_t>(cw.K));
    CHECK(*std::max_element(cw.instance_clusters->row_cluster.begin(),
                            cw.instance_clusters->row_cluster.end()) == cw.K - 1);

    // The merged paradigm still forecasts.
    SeriesCollection ev = slice_collection(c, c.start_hour + 200, c.start_hour + 479);
    ForecastResult r = forecast_series(cw, "a0", ev);
    CHECK(r.yhat.size() == 280 - 168);
    for (double v : r.yhat) CHECK(std::isfinite(v));

    // The merged bundle round-trips too.
    testutil::TempDir tmp;
    save_paradigm(cw, tmp.file("merged"));
    Paradigm q = load_paradigm(tmp.file("merged"));
    ForecastResult rq = forecast_series(q, "a0", ev);
    CHECK(same_doubles(rq.yhat, r.yhat));
}

TEST_CASE("recursive forecasting is an explicit opt-in") {
    // A slow trend on top of the daily shape keeps every rolling-mean column
    // honestly non-constant; an exactly 168-periodic series would leave
    // mave_168 constant up to rounding dust and make feedback ill-posed.
    SeriesCollection c;
    c.start_hour = testutil::h2019();
    for (int i = 0; i < 2; ++i) {
        std::vector<double> v(500);
        for (std::size_t t = 0; t < v.size(); ++t)
            v[t] = 100.0 + 10.0 * i +
                   20.0 * std::sin(2.0 * M_PI * static_cast<double>(t % 24) / 24.0) +
                   0.01 * static_cast<double>(t);
        c.series["a" + std::to_string(i)] = v;
    }
    GlobalModel g = train_global(c, bare_spec(), ModelKind::ridge, ridge_hp(1.0), 1);

    CHECK_THROWS_AS(forecast_recursive(g, "a0", c, 24, false), ConfigError);
    CHECK_THROWS_AS(forecast_recursive(g, "a0", c, 0, true), ConfigError);
    CHECK_THROWS_AS(forecast_recursive(g, "missing", c, 24, true), DataError);

    std::vector<double> path = forecast_recursive(g, "a0", c, 24, true);
    REQUIRE(path.size() == 24);
    for (double v : path) {
        REQUIRE(std::isfinite(v));
        // A periodic series forecast stays in the neighbourhood of its range.
        CHECK(v > 0.0);
        CHECK(v < 300.0);
    }
}

TEST_CASE("training guards reject empty and malformed inputs") {
    SeriesCollection empty;
    empty.start_hour = testutil::h2019();
    CHECK_THROWS_AS(train_global(empty, bare_spec(), ModelKind::ridge, ridge_hp(1.0), 1),
                    DataError);
    CHECK_THROWS_AS(train_local(empty, bare_spec(), ModelKind::ridge, ridge_hp(1.0), 1),
                    DataError);

    SeriesCollection c = testutil::wavy_collection(3, 400, false);
    CHECK_THROWS_AS(train_clusterwise(c, bare_spec(), ModelKind::ridge, ridge_hp(1.0),
                                      ClusterVariant::model_based, -1, 1, 1),
                    ConfigError);
    CHECK_THROWS_AS(train_clusterwise(c, bare_spec(), ModelKind::ridge, ridge_hp(1.0),
                                      ClusterVariant::model_based, 4, 1, 1),
                    TrainError);
}
