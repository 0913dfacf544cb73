#include "gridcast/paradigms.hpp"

#include "gridcast/csv.hpp"
#include "gridcast/timeutil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>

#include <json.hpp>

namespace gridcast {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

std::vector<std::string> sorted_ids(const SeriesCollection& c) {
    std::vector<std::string> ids;
    ids.reserve(c.series.size());
    for (const auto& [id, v] : c.series) ids.push_back(id); // map order: ascending
    return ids;
}

// One SampleSet per series, ascending id order. Row order inside and across
// series is what pool_samples concatenates, so the pooled layout is
// deterministic: by series id, then time.
std::vector<SampleSet> per_series_samples(const SeriesCollection& norm,
                                          const std::vector<std::string>& ids,
                                          const FeatureSpec& spec, int threads) {
    std::vector<SampleSet> out(ids.size());
    parallel_for(ids.size(), threads, [&](std::size_t i) {
        out[i] = build_samples(ids[i], norm.series.at(ids[i]), norm.start_hour,
                               norm.exogenous, spec);
    });
    return out;
}

std::size_t min_rows_for(ModelKind kind, const Hyperparams& hp) {
    return kind == ModelKind::gbdt ? static_cast<std::size_t>(2 * hp.min_samples_leaf) : 1;
}

// Boosting rounds for throwaway per-series fits (cluster discovery, zero-shot
// routing): the per-series default, not the pooled-budget one.
Hyperparams discovery_hyperparams(const Hyperparams& hp) {
    Hyperparams d = hp;
    d.n_estimators = Hyperparams::local_defaults().n_estimators;
    return d;
}

FittedModel fit_labeled(const SampleSet& s, ModelKind kind, const Hyperparams& hp,
                        const std::string& label) {
    try {
        return fit_model(s, kind, hp, 0);
    } catch (const TrainError& e) {
        throw TrainError(label + ": " + e.what());
    }
}

const FeatureSpec& spec_of(const Paradigm& p) {
    return std::visit([](const auto& m) -> const FeatureSpec& { return m.spec; }, p);
}

const Normalizer& normalizer_of(const Paradigm& p) {
    return std::visit([](const auto& m) -> const Normalizer& { return m.normalizer; }, p);
}

std::set<std::string> referenced_channels(const FeatureSpec& spec) {
    std::set<std::string> names;
    for (const auto& ex : spec.exogenous) names.insert(ex.channel);
    return names;
}

std::vector<double> apply_minmax(const MinMax& mm, std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Normalizer::apply_value(mm, v[i]);
    return out;
}

MinMax fit_minmax(std::span<const double> v, const std::string& what) {
    if (v.empty()) throw DataError(what + " is empty; min-max scaling is undefined");
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (!(*hi > *lo))
        throw DataError(what + " is constant; min-max scaling is undefined");
    return MinMax{*lo, *hi};
}

std::vector<double> predict_instance_rows(const ClusterwiseModel& cw, const SampleSet& s) {
    std::vector<double> yhat(s.rows());
    for (std::size_t r = 0; r < s.rows(); ++r) {
        const int c = route_instance(*cw.instance_clusters, s.X.row(r));
        yhat[r] = cw.models.at(c).predict_row(s.X.row(r));
    }
    return yhat;
}

ForecastResult assemble_result(const std::string& id, const SampleSet& s,
                               std::vector<double> yhat_norm, const MinMax& mm,
                               std::span<const double> raw, std::int64_t raw_start) {
    ForecastResult r;
    r.series_id = id;
    r.target_hours = s.target_hours;
    r.y_norm = s.y;
    r.yhat_norm = std::move(yhat_norm);
    r.yhat.resize(r.yhat_norm.size());
    r.y.resize(r.yhat_norm.size());
    for (std::size_t i = 0; i < r.yhat_norm.size(); ++i) {
        r.yhat[i] = Normalizer::invert_value(mm, r.yhat_norm[i]);
        r.y[i] = raw[static_cast<std::size_t>(r.target_hours[i] - raw_start)];
    }
    return r;
}

} // namespace

ClusterVariant cluster_variant_from_string(const std::string& s) {
    if (s == "model-based") return ClusterVariant::model_based;
    if (s == "instance") return ClusterVariant::instance;
    if (s == "weighted-instance") return ClusterVariant::weighted_instance;
    throw ConfigError("unknown cluster variant '" + s +
                      "' (expected model-based, instance, or weighted-instance)");
}

std::string to_string(ClusterVariant v) {
    switch (v) {
    case ClusterVariant::model_based: return "model-based";
    case ClusterVariant::instance: return "instance";
    case ClusterVariant::weighted_instance: return "weighted-instance";
    }
    return "?";
}

std::size_t model_count(const Paradigm& p) {
    return std::visit(overloaded{[](const LocalEnsemble& m) { return m.models.size(); },
                                 [](const GlobalModel&) { return std::size_t{1}; },
                                 [](const ClusterwiseModel& m) { return m.models.size(); }},
                      p);
}

LocalEnsemble train_local(const SeriesCollection& train, const FeatureSpec& spec,
                          ModelKind kind, const Hyperparams& hp, int threads) {
    spec.validate();
    hp.validate();
    if (train.series.empty()) throw DataError("training view has no series");

    LocalEnsemble le;
    le.spec = spec;
    le.kind = kind;
    le.hp = hp;
    le.normalizer = Normalizer::fit(train);
    const SeriesCollection norm = le.normalizer.apply(train);
    const auto ids = sorted_ids(norm);

    std::vector<FittedModel> fitted(ids.size());
    parallel_for(ids.size(), threads, [&](std::size_t i) {
        const SampleSet s = build_samples(ids[i], norm.series.at(ids[i]), norm.start_hour,
                                          norm.exogenous, spec);
        fitted[i] = fit_labeled(s, kind, hp, "series '" + ids[i] + "'");
    });
    for (std::size_t i = 0; i < ids.size(); ++i) le.models[ids[i]] = std::move(fitted[i]);
    return le;
}

GlobalModel train_global(const SeriesCollection& train, const FeatureSpec& spec,
                         ModelKind kind, const Hyperparams& hp, int threads) {
    spec.validate();
    hp.validate();
    if (train.series.empty()) throw DataError("training view has no series");

    GlobalModel g;
    g.spec = spec;
    g.kind = kind;
    g.hp = hp;
    g.normalizer = Normalizer::fit(train);
    const SeriesCollection norm = g.normalizer.apply(train);
    const auto ids = sorted_ids(norm);
    const auto parts = per_series_samples(norm, ids, spec, threads);

    std::size_t expected = 0;
    for (const auto& p : parts) expected += p.rows();
    const SampleSet pooled = pool_samples(parts);
    if (pooled.rows() != expected)
        throw TrainError("pooled row count does not equal the sum of member sample counts");

    g.model = fit_labeled(pooled, kind, hp, "pooled fit");
    g.pooled_rows = pooled.rows();
    return g;
}

ClusterwiseModel train_clusterwise(const SeriesCollection& train, const FeatureSpec& spec,
                                   ModelKind kind, const Hyperparams& hp,
                                   ClusterVariant variant, int K, std::uint64_t seed,
                                   int threads) {
    spec.validate();
    hp.validate();
    if (train.series.empty()) throw DataError("training view has no series");
    if (K < 0) throw ConfigError("K must be >= 0 (0 picks K by silhouette)");

    ClusterwiseModel cw;
    cw.spec = spec;
    cw.kind = kind;
    cw.hp = hp;
    cw.variant = variant;
    cw.seed = seed;
    cw.normalizer = Normalizer::fit(train);
    const SeriesCollection norm = cw.normalizer.apply(train);
    const auto ids = sorted_ids(norm);
    const auto samples = per_series_samples(norm, ids, spec, threads);
    const std::size_t min_rows = min_rows_for(kind, hp);

    if (variant == ClusterVariant::model_based) {
        SeriesClusters sc =
            model_based_tsc(norm, spec, kind, discovery_hyperparams(hp), K, seed, threads);

        const int k0 = sc.K;
        std::vector<std::vector<std::size_t>> members(k0); // indices into ids, ascending
        for (std::size_t i = 0; i < ids.size(); ++i)
            members[static_cast<std::size_t>(sc.cluster_of_series.at(ids[i]))].push_back(i);
        std::vector<std::size_t> rows(k0, 0);
        for (int c = 0; c < k0; ++c)
            for (auto i : members[c]) rows[c] += samples[i].rows();
        std::vector<bool> alive(k0, true);
        auto alive_count = [&] { return std::count(alive.begin(), alive.end(), true); };

        for (;;) {
            int dead = -1;
            for (int c = 0; c < k0; ++c)
                if (alive[c] && rows[c] < min_rows) {
                    dead = c;
                    break;
                }
            if (dead < 0) break;
            if (alive_count() == 1)
                throw TrainError("every cluster is below the " + std::to_string(min_rows) +
                                 "-row minimum for " + to_string(kind));
            int best = -1;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k0; ++c) {
                if (!alive[c] || c == dead) continue;
                double d2 = 0.0;
                for (std::size_t j = 0; j < sc.centroids.cols; ++j) {
                    const double d = sc.centroids(static_cast<std::size_t>(dead), j) -
                                     sc.centroids(static_cast<std::size_t>(c), j);
                    d2 += d * d;
                }
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            cw.notes.push_back("cluster " + std::to_string(dead) + " (" +
                               std::to_string(members[dead].size()) + " series, " +
                               std::to_string(rows[dead]) + " rows) below the " +
                               std::to_string(min_rows) + "-row minimum; merged into cluster " +
                               std::to_string(best));
            std::vector<std::size_t> merged;
            std::merge(members[best].begin(), members[best].end(), members[dead].begin(),
                       members[dead].end(), std::back_inserter(merged));
            members[best] = std::move(merged);
            rows[best] += rows[dead];
            members[dead].clear();
            rows[dead] = 0;
            alive[dead] = false;
        }

        std::vector<int> remap(k0, -1);
        int nk = 0;
        for (int c = 0; c < k0; ++c)
            if (alive[c]) remap[c] = nk++;
        Matrix cents(static_cast<std::size_t>(nk), sc.centroids.cols);
        for (int c = 0; c < k0; ++c)
            if (alive[c])
                std::copy(sc.centroids.row(static_cast<std::size_t>(c)).begin(),
                          sc.centroids.row(static_cast<std::size_t>(c)).end(),
                          cents.row(static_cast<std::size_t>(remap[c])).begin());
        for (int c = 0; c < k0; ++c)
            for (auto i : members[c]) sc.cluster_of_series[ids[i]] = remap[c];
        sc.centroids = std::move(cents);
        sc.K = nk;

        std::vector<std::vector<std::size_t>> final_members;
        for (int c = 0; c < k0; ++c)
            if (alive[c]) final_members.push_back(std::move(members[c]));

        std::vector<FittedModel> fits(static_cast<std::size_t>(nk));
        parallel_for(static_cast<std::size_t>(nk), threads, [&](std::size_t c) {
            std::vector<SampleSet> parts;
            parts.reserve(final_members[c].size());
            for (auto i : final_members[c]) parts.push_back(samples[i]);
            fits[c] = fit_labeled(pool_samples(parts), kind, hp,
                                  "cluster " + std::to_string(c));
        });

        cw.series_clusters = std::move(sc);
        cw.K = nk;
        for (int c = 0; c < nk; ++c) cw.models[c] = std::move(fits[static_cast<std::size_t>(c)]);
        return cw;
    }

    // Instance variants cluster the pooled rows.
    const SampleSet pooled = pool_samples(samples);
    InstanceClusters ic;
    if (variant == ClusterVariant::weighted_instance) {
        const FittedModel importance_model = fit_labeled(pooled, kind, hp, "importance fit");
        ic = weighted_instance_tsc(pooled, importance_model, K, seed);
    } else {
        ic = instance_tsc_uniform(pooled, K, seed);
    }

    const int k0 = ic.K;
    std::vector<std::size_t> counts(k0, 0);
    for (int c : ic.row_cluster) counts[static_cast<std::size_t>(c)] += 1;
    std::vector<bool> alive(k0, true);
    auto alive_count = [&] { return std::count(alive.begin(), alive.end(), true); };
    auto nearest_alive = [&](std::span<const double> x) {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k0; ++c) {
            if (!alive[c]) continue;
            double d2 = 0.0;
            for (std::size_t j = 0; j < ic.centroids.cols; ++j) {
                const double d = x[j] - ic.centroids(static_cast<std::size_t>(c), j);
                d2 += ic.weights[j] * d * d;
            }
            if (d2 < best_d2) {
                best_d2 = d2;
                best = c;
            }
        }
        return best;
    };

    for (;;) {
        int dead = -1;
        for (int c = 0; c < k0; ++c)
            if (alive[c] && counts[c] < min_rows) {
                dead = c;
                break;
            }
        if (dead < 0) break;
        if (alive_count() == 1)
            throw TrainError("every instance cluster is below the " + std::to_string(min_rows) +
                             "-row minimum for " + to_string(kind));
        cw.notes.push_back("instance cluster " + std::to_string(dead) + " (" +
                           std::to_string(counts[dead]) + " rows) below the " +
                           std::to_string(min_rows) +
                           "-row minimum; rows reassigned to the remaining clusters");
        alive[dead] = false;
        counts[dead] = 0;
        for (std::size_t r = 0; r < ic.row_cluster.size(); ++r) {
            if (ic.row_cluster[r] != dead) continue;
            const int c = nearest_alive(pooled.X.row(r));
            ic.row_cluster[r] = c;
            counts[static_cast<std::size_t>(c)] += 1;
        }
    }

    std::vector<int> remap(k0, -1);
    int nk = 0;
    for (int c = 0; c < k0; ++c)
        if (alive[c]) remap[c] = nk++;
    Matrix cents(static_cast<std::size_t>(nk), ic.centroids.cols);
    for (int c = 0; c < k0; ++c)
        if (alive[c])
            std::copy(ic.centroids.row(static_cast<std::size_t>(c)).begin(),
                      ic.centroids.row(static_cast<std::size_t>(c)).end(),
                      cents.row(static_cast<std::size_t>(remap[c])).begin());
    for (auto& c : ic.row_cluster) c = remap[c];
    ic.centroids = std::move(cents);
    ic.K = nk;

    std::vector<SampleSet> csets(static_cast<std::size_t>(nk));
    for (int c = 0; c < nk; ++c) {
        SampleSet& sub = csets[static_cast<std::size_t>(c)];
        sub.feature_names = pooled.feature_names;
        sub.at_target = pooled.at_target;
        std::size_t n_c = 0;
        for (int rc : ic.row_cluster) n_c += (rc == c);
        sub.X = Matrix(n_c, pooled.cols());
        sub.y.reserve(n_c);
        sub.series_ids.reserve(n_c);
        sub.target_hours.reserve(n_c);
        std::size_t w = 0;
        for (std::size_t r = 0; r < pooled.rows(); ++r) {
            if (ic.row_cluster[r] != c) continue;
            std::copy(pooled.X.row(r).begin(), pooled.X.row(r).end(), sub.X.row(w).begin());
            sub.y.push_back(pooled.y[r]);
            sub.series_ids.push_back(pooled.series_ids[r]);
            sub.target_hours.push_back(pooled.target_hours[r]);
            ++w;
        }
    }
    std::vector<FittedModel> fits(static_cast<std::size_t>(nk));
    parallel_for(static_cast<std::size_t>(nk), threads, [&](std::size_t c) {
        fits[c] = fit_labeled(csets[c], kind, hp, "instance cluster " + std::to_string(c));
    });

    cw.instance_clusters = std::move(ic);
    cw.K = nk;
    for (int c = 0; c < nk; ++c) cw.models[c] = std::move(fits[static_cast<std::size_t>(c)]);
    return cw;
}

ForecastResult forecast_series(const Paradigm& p, const std::string& series_id,
                               const SeriesCollection& eval_raw) {
    const FeatureSpec& spec = spec_of(p);
    const Normalizer& nz = normalizer_of(p);

    auto it = eval_raw.series.find(series_id);
    if (it == eval_raw.series.end())
        throw DataError("series '" + series_id + "' is not in the evaluation data");
    const MinMax& mm = nz.series_stats(series_id);
    const std::vector<double> vnorm = apply_minmax(mm, it->second);

    std::map<std::string, std::vector<double>> exog_norm;
    for (const auto& name : referenced_channels(spec)) {
        auto ch = eval_raw.exogenous.find(name);
        if (ch == eval_raw.exogenous.end()) continue; // build_samples reports it
        exog_norm[name] = apply_minmax(nz.channel_stats(name), ch->second);
    }

    const SampleSet s = build_samples(series_id, vnorm, eval_raw.start_hour, exog_norm, spec);

    std::vector<double> yhat_norm = std::visit(
        overloaded{[&](const LocalEnsemble& m) {
                       auto mit = m.models.find(series_id);
                       if (mit == m.models.end())
                           throw DataError("series '" + series_id +
                                           "' is not part of the local ensemble");
                       return mit->second.predict(s.X);
                   },
                   [&](const GlobalModel& m) { return m.model.predict(s.X); },
                   [&](const ClusterwiseModel& m) {
                       if (m.variant == ClusterVariant::model_based) {
                           const int c = m.series_clusters->cluster_of(series_id);
                           return m.models.at(c).predict(s.X);
                       }
                       return predict_instance_rows(m, s);
                   }},
        p);

    return assemble_result(series_id, s, std::move(yhat_norm), mm, it->second,
                           eval_raw.start_hour);
}

ForecastResult zero_shot_forecast(const Paradigm& p, const ZeroShotInput& in) {
    if (std::holds_alternative<LocalEnsemble>(p))
        throw ConfigError("zero-shot forecasting needs a shared model, not a local ensemble");
    const FeatureSpec& spec = spec_of(p);
    const Normalizer& nz = normalizer_of(p);

    const std::int64_t hist_len64 = in.eval_start_hour - in.start_hour;
    if (hist_len64 < kWarmupHours + 1)
        throw DataError("zero-shot series '" + in.series_id + "' has " +
                        std::to_string(hist_len64) + " hours of history before " +
                        format_hour_timestamp(in.eval_start_hour) + "; need at least " +
                        std::to_string(kWarmupHours + 1));
    const auto hist_len = static_cast<std::size_t>(hist_len64);
    if (in.values.size() <= hist_len)
        throw DataError("zero-shot series '" + in.series_id +
                        "' has no values in the evaluation window");

    // Own-history normalization: statistics come from the pre-evaluation part
    // of the unseen series, never from its future.
    const MinMax mm = fit_minmax(std::span(in.values).first(hist_len),
                                 "zero-shot history of '" + in.series_id + "'");

    const std::size_t win = hist_len - static_cast<std::size_t>(kWarmupHours);
    const std::int64_t window_start = in.start_hour + static_cast<std::int64_t>(win);
    const std::vector<double> window_norm =
        apply_minmax(mm, std::span(in.values).subspan(win));

    std::map<std::string, MinMax> channel_mm;
    std::map<std::string, std::vector<double>> exog_window, exog_hist;
    for (const auto& name : referenced_channels(spec)) {
        auto ch = in.exogenous.find(name);
        if (ch == in.exogenous.end()) continue;
        MinMax cmm;
        try {
            cmm = nz.channel_stats(name);
        } catch (const DataError&) {
            cmm = fit_minmax(
                std::span(ch->second).first(std::min(ch->second.size(), hist_len)),
                "zero-shot history of channel '" + name + "'");
        }
        channel_mm[name] = cmm;
        if (ch->second.size() > win)
            exog_window[name] = apply_minmax(cmm, std::span(ch->second).subspan(win));
        exog_hist[name] =
            apply_minmax(cmm, std::span(ch->second).first(std::min(ch->second.size(), hist_len)));
    }

    const SampleSet s =
        build_samples(in.series_id, window_norm, window_start, exog_window, spec);

    std::vector<double> yhat_norm;
    if (const auto* g = std::get_if<GlobalModel>(&p)) {
        yhat_norm = g->model.predict(s.X);
    } else {
        const auto& cw = std::get<ClusterwiseModel>(p);
        if (cw.variant == ClusterVariant::model_based) {
            // Route by refitting a throwaway local model on the history and
            // assigning its coefficients to the nearest cluster centroid.
            const std::vector<double> hist_norm =
                apply_minmax(mm, std::span(in.values).first(hist_len));
            int c;
            try {
                const SampleSet hs = build_samples(in.series_id, hist_norm, in.start_hour,
                                                   exog_hist, spec);
                const FittedModel local =
                    fit_model(hs, cw.kind, discovery_hyperparams(cw.hp), 0);
                c = cw.series_clusters->route_coefficients(local.importance_vector());
            } catch (const TrainError& e) {
                throw TrainError("zero-shot routing for '" + in.series_id + "': " + e.what());
            } catch (const DataError& e) {
                throw DataError("zero-shot routing for '" + in.series_id + "': " + e.what());
            }
            yhat_norm = cw.models.at(c).predict(s.X);
        } else {
            yhat_norm = predict_instance_rows(cw, s);
        }
    }

    return assemble_result(in.series_id, s, std::move(yhat_norm), mm, in.values,
                           in.start_hour);
}

std::vector<double> forecast_recursive(const Paradigm& p, const std::string& series_id,
                                       const SeriesCollection& history_raw, int horizon,
                                       bool enable_recursive) {
    if (!enable_recursive)
        throw ConfigError("recursive multi-step forecasting is opt-in and unvalidated; "
                          "pass enable_recursive=true to use it anyway");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    const FeatureSpec& spec = spec_of(p);
    const Normalizer& nz = normalizer_of(p);

    auto it = history_raw.series.find(series_id);
    if (it == history_raw.series.end())
        throw DataError("series '" + series_id + "' is not in the history");
    const MinMax& mm = nz.series_stats(series_id);
    std::vector<double> vnorm = apply_minmax(mm, it->second);

    std::map<std::string, std::vector<double>> exog_norm;
    for (const auto& name : referenced_channels(spec)) {
        auto ch = history_raw.exogenous.find(name);
        if (ch == history_raw.exogenous.end()) continue;
        if (ch->second.size() < it->second.size() + static_cast<std::size_t>(horizon))
            throw DataError("channel '" + name + "' must extend " + std::to_string(horizon) +
                            " hours past the series for recursive forecasting");
        exog_norm[name] = apply_minmax(nz.channel_stats(name), ch->second);
    }

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int step = 0; step < horizon; ++step) {
        vnorm.push_back(0.0); // placeholder target; features never read it
        const SampleSet s =
            build_samples(series_id, vnorm, history_raw.start_hour, exog_norm, spec);
        const std::size_t last = s.rows() - 1;
        double pred = std::visit(
            overloaded{[&](const LocalEnsemble& m) {
                           return m.models.at(series_id).predict_row(s.X.row(last));
                       },
                       [&](const GlobalModel& m) { return m.model.predict_row(s.X.row(last)); },
                       [&](const ClusterwiseModel& m) {
                           if (m.variant == ClusterVariant::model_based) {
                               const int c = m.series_clusters->cluster_of(series_id);
                               return m.models.at(c).predict_row(s.X.row(last));
                           }
                           const int c = route_instance(*m.instance_clusters, s.X.row(last));
                           return m.models.at(c).predict_row(s.X.row(last));
                       }},
            p);
        vnorm.back() = pred;
        out.push_back(Normalizer::invert_value(mm, pred));
    }
    return out;
}

namespace {

std::string spec_hash_hex(const FeatureSpec& spec) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(spec.hash()));
    return buf;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::string& path) {
    return nlohmann::json::parse(read_text_file(path));
}

} // namespace

void save_paradigm(const Paradigm& p, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    nlohmann::json models = nlohmann::json::object();

    std::visit(overloaded{
                   [&](const LocalEnsemble& m) {
                       manifest["paradigm"] = "local";
                       manifest["model"] = to_string(m.kind);
                       manifest["hp"] = m.hp.to_json();
                       for (const auto& [id, fm] : m.models) models[id] = fm.to_json();
                   },
                   [&](const GlobalModel& m) {
                       manifest["paradigm"] = "global";
                       manifest["model"] = to_string(m.kind);
                       manifest["hp"] = m.hp.to_json();
                       manifest["pooled_rows"] = m.pooled_rows;
                       models["global"] = m.model.to_json();
                   },
                   [&](const ClusterwiseModel& m) {
                       manifest["paradigm"] = "clusterwise";
                       manifest["model"] = to_string(m.kind);
                       manifest["hp"] = m.hp.to_json();
                       manifest["variant"] = to_string(m.variant);
                       manifest["K"] = m.K;
                       manifest["seed"] = m.seed;
                       manifest["notes"] = m.notes;
                       for (const auto& [c, fm] : m.models)
                           models[std::to_string(c)] = fm.to_json();
                       if (m.series_clusters)
                           write_json(dir + "/clusters.json", m.series_clusters->to_json());
                       else
                           write_json(dir + "/clusters.json", m.instance_clusters->to_json());
                   }},
               p);
    manifest["spec_hash"] = spec_hash_hex(spec_of(p));

    write_json(dir + "/manifest.json", manifest);
    write_json(dir + "/spec.json", spec_of(p).to_json());
    write_json(dir + "/normalizer.json", normalizer_of(p).to_json());
    write_json(dir + "/models.json", models);
}

Paradigm load_paradigm(const std::string& dir) {
    try {
        const nlohmann::json manifest = read_json(dir + "/manifest.json");
        const FeatureSpec spec = FeatureSpec::from_json(read_json(dir + "/spec.json"));
        Normalizer nz = Normalizer::from_json(read_json(dir + "/normalizer.json"));
        const nlohmann::json models = read_json(dir + "/models.json");
        const ModelKind kind = model_kind_from_string(manifest.at("model").get<std::string>());
        const Hyperparams hp = Hyperparams::from_json(manifest.at("hp"));
        const std::string paradigm = manifest.at("paradigm").get<std::string>();

        if (paradigm == "local") {
            LocalEnsemble m;
            m.spec = spec;
            m.normalizer = std::move(nz);
            m.kind = kind;
            m.hp = hp;
            for (const auto& [id, j] : models.items())
                m.models[id] = FittedModel::from_json(j);
            return m;
        }
        if (paradigm == "global") {
            GlobalModel m;
            m.spec = spec;
            m.normalizer = std::move(nz);
            m.kind = kind;
            m.hp = hp;
            m.model = FittedModel::from_json(models.at("global"));
            m.pooled_rows = manifest.at("pooled_rows").get<std::size_t>();
            return m;
        }
        if (paradigm == "clusterwise") {
            ClusterwiseModel m;
            m.spec = spec;
            m.normalizer = std::move(nz);
            m.kind = kind;
            m.hp = hp;
            m.variant = cluster_variant_from_string(manifest.at("variant").get<std::string>());
            m.K = manifest.at("K").get<int>();
            m.seed = manifest.at("seed").get<std::uint64_t>();
            m.notes = manifest.at("notes").get<std::vector<std::string>>();
            const nlohmann::json clusters = read_json(dir + "/clusters.json");
            if (m.variant == ClusterVariant::model_based)
                m.series_clusters = SeriesClusters::from_json(clusters);
            else
                m.instance_clusters = InstanceClusters::from_json(clusters);
            for (const auto& [key, j] : models.items())
                m.models[std::stoi(key)] = FittedModel::from_json(j);
            return m;
        }
        throw DataError("paradigm bundle '" + dir + "': unknown paradigm '" + paradigm + "'");
    } catch (const nlohmann::json::exception& e) {
        throw DataError("paradigm bundle '" + dir + "': " + e.what());
    }
}

} // namespace gridcast
