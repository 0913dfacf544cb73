#include "gridcast/pipeline.hpp"

#include "gridcast/csv.hpp"
#include "gridcast/metrics.hpp"
#include "gridcast/paradigms.hpp"
#include "gridcast/synthgen.hpp"
#include "gridcast/timeutil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace gridcast {

namespace {

namespace fs = std::filesystem;

struct Ctx {
    const RunConfig& cfg;
    std::string dir;
    std::map<std::string, std::string> files; // relative path -> content

    SeriesCollection raw;
    GroundTruth truth;
    bool have_truth = false;
    SplitSpec split;
    SplitViews views;
    std::int64_t wstart = 0, wend = 0; // evaluation window, inclusive

    std::map<std::string, Paradigm> paradigms;
    std::map<std::string, MetricReport> reports;
    std::map<std::string, std::map<std::string, ForecastResult>> forecasts;
};

const std::vector<std::string> kParadigmOrder = {"local", "global", "clusterwise"};

std::vector<std::string> series_ids(const SeriesCollection& c) {
    std::vector<std::string> ids;
    for (const auto& [id, v] : c.series) ids.push_back(id);
    return ids;
}

// ---- data -----------------------------------------------------------------

void stage_data(Ctx& c) {
    const RunConfig& cfg = c.cfg;
    if (cfg.source == "synth") {
        SynthResult sr = generate_collection(cfg.synth_config());
        std::size_t clamps = 0;
        for (const auto& [id, n] : sr.truth.clamp_count) clamps += n;
        if (cfg.drift != "none") {
            DriftEvent ev;
            ev.kind = cfg.drift == "sudden"        ? DriftEvent::Kind::sudden
                      : cfg.drift == "incremental" ? DriftEvent::Kind::incremental
                                                   : DriftEvent::Kind::recurring;
            ev.start_hour = sr.collection.start_hour +
                            static_cast<std::int64_t>(std::floor(
                                static_cast<double>(cfg.length_hours) * cfg.drift_start_frac));
            ev.magnitude = cfg.drift_magnitude;
            ev.cap = cfg.drift_cap;
            if (cfg.drift_affected.empty()) {
                const auto ids = series_ids(sr.collection);
                const std::size_t half = std::max<std::size_t>(1, ids.size() / 2);
                ev.affected.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(half));
            } else {
                ev.affected = cfg.drift_affected;
            }
            DriftResult dr = inject_drift(sr.collection, {ev});
            sr.collection = std::move(dr.collection);
            sr.truth.drift_status = std::move(dr.labels);
        }
        c.raw = std::move(sr.collection);
        c.truth = std::move(sr.truth);
        c.have_truth = true;
        std::cout << "data: generated " << c.raw.series.size() << " series, "
                  << c.raw.max_length() << " hours, " << clamps << " positivity clamps\n";
    } else {
        c.raw = ingest_wide_csv(cfg.load_csv, cfg.ingest_config());
        if (!cfg.temperature_csv.empty())
            attach_exogenous_csv(c.raw, cfg.temperature_csv, cfg.ingest_config());
        if (!cfg.hierarchy_csv.empty()) attach_hierarchy_csv(c.raw, cfg.hierarchy_csv);
        std::cout << "data: ingested " << c.raw.series.size() << " series, "
                  << c.raw.max_length() << " hours, " << c.raw.exogenous.size()
                  << " channels\n";
    }
}

void stage_write_data(Ctx& c) {
    c.files["loads.csv"] = collection_to_wide_csv(c.raw);
    if (!c.raw.exogenous.empty()) c.files["temperature.csv"] = exogenous_to_wide_csv(c.raw);
    if (!c.raw.hierarchy.empty()) c.files["hierarchy.csv"] = hierarchy_to_csv(c.raw);
    c.files["labels.csv"] = labels_to_csv(c.raw, c.truth);
}

// ---- profile ----------------------------------------------------------------

void stage_profile(Ctx& c) {
    std::string text = "series_id,seasonality_index,total_variation,night_to_day,"
                       "weekend_to_weekday\n";
    for (const auto& [id, v] : c.raw.series) {
        const HeterogeneityProfile p =
            heterogeneity_profile(v, c.raw.start_hour, c.cfg.features.local_time_offset_hours);
        text += id + "," + format_double(p.seasonality_index) + "," +
                format_double(p.total_variation) + "," + format_double(p.night_to_day) + "," +
                format_double(p.weekend_to_weekday) + "\n";
    }
    c.files["profile.csv"] = std::move(text);
    std::cout << "profile: " << c.raw.series.size() << " series\n";
}

// ---- split + train ------------------------------------------------------------

void stage_split(Ctx& c) {
    c.split = c.cfg.resolve_split(c.raw);
    c.views = split_by_time(c.raw, c.split);
    if (c.cfg.eval_window == "val") {
        c.wstart = c.split.train_end + 1;
        c.wend = c.split.val_end;
    } else {
        c.wstart = c.split.val_end + 1;
        c.wend = c.split.test_end;
    }
    std::cout << "split: train to " << format_hour_timestamp(c.split.train_end) << ", eval ["
              << format_hour_timestamp(c.wstart) << ", " << format_hour_timestamp(c.wend)
              << "]\n";
}

std::vector<std::string> wanted_paradigms(const RunConfig& cfg) {
    if (cfg.which == "all") return kParadigmOrder;
    return {cfg.which};
}

void stage_train(Ctx& c) {
    const RunConfig& cfg = c.cfg;
    const ModelKind kind = cfg.kind();
    for (const auto& name : wanted_paradigms(cfg)) {
        if (name == "local") {
            c.paradigms.emplace(name, train_local(c.views.train, cfg.features, kind,
                                                  cfg.hyperparams(false), cfg.threads));
        } else if (name == "global") {
            c.paradigms.emplace(name, train_global(c.views.train, cfg.features, kind,
                                                   cfg.hyperparams(true), cfg.threads));
        } else {
            ClusterwiseModel cw = train_clusterwise(
                c.views.train, cfg.features, kind, cfg.hyperparams(true),
                cluster_variant_from_string(cfg.variant), cfg.K, cfg.seed, cfg.threads);
            if (cw.series_clusters) {
                std::string map_text = "series_id,cluster\n";
                for (const auto& [id, cl] : cw.series_clusters->cluster_of_series)
                    map_text += id + "," + std::to_string(cl) + "\n";
                c.files["cluster_map.csv"] = std::move(map_text);
            }
            if (!cw.notes.empty()) {
                std::string notes;
                for (const auto& n : cw.notes) notes += n + "\n";
                c.files["cluster_notes.txt"] = std::move(notes);
            }
            c.paradigms.emplace(name, std::move(cw));
        }
        save_paradigm(c.paradigms.at(name), c.dir + "/bundle-" + name);
        std::cout << "train " << name << ": " << model_count(c.paradigms.at(name))
                  << " model(s)\n";
    }
}

// ---- evaluate -------------------------------------------------------------------

void stage_evaluate(Ctx& c) {
    const RunConfig& cfg = c.cfg;
    const SeriesCollection eval_slice =
        slice_collection(c.raw, c.wstart - kWarmupHours, c.wend);
    const auto ids = series_ids(c.raw);

    std::string metrics_text = "series_id,paradigm,model,FB,nMAE_pct,MSE,MAPE_pct\n";
    std::string detail_text =
        "series_id,paradigm,model,FB,nMAE_pct,MSE,MAPE_pct,MAPE_unguarded_pct,MAE,n,"
        "mape_excluded,mape_unguarded_excluded\n";

    for (const auto& name : kParadigmOrder) {
        auto pit = c.paradigms.find(name);
        if (pit == c.paradigms.end()) continue;
        std::vector<ForecastResult> results(ids.size());
        parallel_for(ids.size(), cfg.threads, [&](std::size_t i) {
            results[i] = forecast_series(pit->second, ids[i], eval_slice);
        });

        MetricReport report;
        report.paradigm = name;
        report.model = cfg.model_kind;
        report.variant = name == "clusterwise" ? cfg.variant : "";
        report.K = name == "clusterwise" ? std::get<ClusterwiseModel>(pit->second).K : 0;
        report.seed = cfg.seed;
        report.window = cfg.eval_window;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const ForecastResult& r = results[i];
            const PointMetrics m = compute_metrics(r.y_norm, r.yhat_norm);
            report.rows.push_back({ids[i], m});
            metrics_text += ids[i] + "," + name + "," + cfg.model_kind + "," +
                            format_double(m.fb) + "," + format_double(m.nmae_pct) + "," +
                            format_double(m.mse) + "," + format_double(m.mape_pct) + "\n";
            detail_text += ids[i] + "," + name + "," + cfg.model_kind + "," +
                           format_double(m.fb) + "," + format_double(m.nmae_pct) + "," +
                           format_double(m.mse) + "," + format_double(m.mape_pct) + "," +
                           format_double(m.mape_unguarded_pct) + "," + format_double(m.mae) +
                           "," + std::to_string(m.n) + "," + std::to_string(m.mape_excluded) +
                           "," + std::to_string(m.mape_unguarded_excluded) + "\n";
            c.forecasts[name][ids[i]] = std::move(results[i]);
        }
        const Aggregate agg = aggregate_nmae(report);
        std::cout << "evaluate " << name << ": nMAE% min " << format_double(agg.min)
                  << " mean " << format_double(agg.mean) << " max " << format_double(agg.max)
                  << "\n";
        c.reports.emplace(name, std::move(report));
    }
    c.files["metrics.csv"] = std::move(metrics_text);
    c.files["metrics_detail.csv"] = std::move(detail_text);
}

// ---- peaks ---------------------------------------------------------------------

// peaks.csv has no paradigm column, so it covers one paradigm: the shared
// model when one was trained, the local ensemble otherwise.
void stage_peaks(Ctx& c) {
    const auto period = c.cfg.peak();
    if (!period) return;
    std::string chosen;
    for (const auto* name : {"global", "clusterwise", "local"})
        if (c.forecasts.count(name)) {
            chosen = name;
            break;
        }
    if (chosen.empty()) return;

    std::string text = "series_id,period,actual_peak,predicted_at_peak,error_pct\n";
    std::string skipped;
    std::size_t n_rows = 0;
    for (const auto& [id, r] : c.forecasts.at(chosen)) {
        if (r.target_hours.empty()) continue;
        const PeakReport pr = peak_error(id, r.y, r.yhat, r.target_hours.front(), *period,
                                         c.cfg.features.local_time_offset_hours);
        for (const auto& row : pr.rows) {
            text += row.series_id + "," + row.period + "," + format_double(row.actual_peak) +
                    "," + format_double(row.predicted_at_peak) + "," +
                    format_double(row.error_pct) + "\n";
            ++n_rows;
        }
        for (const auto& s : pr.skipped) skipped += s + "\n";
    }
    c.files["peaks.csv"] = std::move(text);
    if (!skipped.empty()) c.files["peaks_skipped.txt"] = std::move(skipped);
    std::cout << "peaks (" << chosen << "): " << n_rows << " period(s)\n";
}

// ---- drift ----------------------------------------------------------------------

std::map<std::string, std::string> drift_label_map(const Ctx& c) {
    const RunConfig& cfg = c.cfg;
    std::map<std::string, std::string> labels;
    if (cfg.drift_labels == "none") return labels;
    if (cfg.drift_labels == "synth") {
        if (c.have_truth) labels = c.truth.drift_status;
        return labels;
    }
    const CsvTable table = read_csv(cfg.drift_labels);
    std::size_t id_col = table.header.size(), status_col = table.header.size();
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (table.header[j] == "series_id") id_col = j;
        if (table.header[j] == "drift_status") status_col = j;
    }
    if (id_col == table.header.size() || status_col == table.header.size())
        throw DataError("'" + cfg.drift_labels + "': need series_id and drift_status columns");
    for (const auto& row : table.rows) labels[row[id_col]] = row[status_col];
    return labels;
}

void stage_drift(Ctx& c) {
    if (!c.reports.count("local") || !c.reports.count("global")) {
        std::cout << "drift: skipped (needs both local and global paradigms)\n";
        return;
    }
    const auto labels = drift_label_map(c);
    if (labels.empty()) {
        std::cout << "drift: skipped (no labels)\n";
        return;
    }
    const DriftReport dr =
        drift_segment_report(c.reports.at("local"), c.reports.at("global"), labels);
    std::string text = "segment,n_series,local_mean_nMAE_pct,global_mean_nMAE_pct,change_pct\n";
    for (const auto& row : dr.rows)
        text += row.segment + "," + std::to_string(row.n_series) + "," +
                format_double(row.local_mean_nmae) + "," + format_double(row.global_mean_nmae) +
                "," + format_double(row.change_pct) + "\n";
    c.files["drift.csv"] = std::move(text);
    std::cout << "drift: " << dr.rows.size() << " segment(s)\n";
}

// ---- zero-shot + coherency ---------------------------------------------------------

void stage_zeroshot(Ctx& c, bool required) {
    const RunConfig& cfg = c.cfg;
    if (c.raw.hierarchy.empty()) {
        if (required) throw ConfigError("zero-shot evaluation needs a hierarchy");
        std::cout << "zeroshot: skipped (no hierarchy)\n";
        return;
    }
    std::string shared;
    for (const auto* name : {"global", "clusterwise"})
        if (c.paradigms.count(name)) {
            shared = name;
            break;
        }
    if (shared.empty()) {
        if (required) throw ConfigError("zero-shot evaluation needs a shared paradigm");
        std::cout << "zeroshot: skipped (needs a shared paradigm)\n";
        return;
    }
    const Paradigm& p = c.paradigms.at(shared);

    const SeriesCollection regions = aggregate_sum(c.raw, AggregateLevel::area_to_region);
    const SeriesCollection system = aggregate_sum(c.raw, AggregateLevel::region_to_system);

    auto window_values = [&](const std::vector<double>& v, std::int64_t start) {
        const auto upto = static_cast<std::size_t>(c.wend - start + 1);
        return std::vector<double>(
            v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(upto, v.size())));
    };
    auto zs_input = [&](const std::string& id, const SeriesCollection& src) {
        ZeroShotInput in;
        in.series_id = id;
        in.values = window_values(src.series.at(id), src.start_hour);
        in.start_hour = src.start_hour;
        for (const auto& [name, v] : src.exogenous)
            in.exogenous[name] = window_values(v, src.start_hour);
        in.eval_start_hour = c.wstart;
        return in;
    };

    std::map<std::string, ForecastResult> zs;
    for (const auto& [id, v] : regions.series)
        zs[id] = zero_shot_forecast(p, zs_input(id, regions));
    zs["system"] = zero_shot_forecast(p, zs_input("system", system));

    std::string text = "series_id,paradigm,model,FB,nMAE_pct,MSE,MAPE_pct\n";
    const std::string tag = "zeroshot-" + shared;
    for (const auto& [id, r] : zs) {
        const PointMetrics m = compute_metrics(r.y_norm, r.yhat_norm);
        text += id + "," + tag + "," + cfg.model_kind + "," + format_double(m.fb) + "," +
                format_double(m.nmae_pct) + "," + format_double(m.mse) + "," +
                format_double(m.mape_pct) + "\n";
    }
    c.files["zeroshot_metrics.csv"] = std::move(text);

    // Coherency: the sum of the trained paradigm's per-series forecasts
    // against the system's own zero-shot forecast, on the original scale.
    std::vector<std::vector<double>> area_forecasts;
    for (const auto& [id, r] : c.forecasts.at(shared)) area_forecasts.push_back(r.yhat);
    const ForecastResult& sys = zs.at("system");
    const CoherencyReport cr = coherency_gap(area_forecasts, sys.yhat, sys.y);

    std::string gap_text = "timestamp,gap\n";
    for (std::size_t t = 0; t < cr.gap.size(); ++t)
        gap_text += format_hour_timestamp(sys.target_hours[t]) + "," +
                    format_double(cr.gap[t]) + "\n";
    c.files["coherency.csv"] = std::move(gap_text);
    c.files["coherency_summary.txt"] =
        "mean_abs_gap_over_mean_system_actual = " + format_double(cr.summary) +
        "\nnote: zero-shot aggregates are normalized with their own pre-evaluation history\n";
    std::cout << "zeroshot (" << shared << "): " << zs.size()
              << " aggregate series, coherency " << format_double(cr.summary) << "\n";
}

// ---- report ----------------------------------------------------------------------

struct TextCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

TextCsv parse_csv_text(const std::string& text) {
    TextCsv t;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t p = 0;
        while (p <= line.size()) {
            std::size_t comma = line.find(',', p);
            if (comma == std::string::npos) comma = line.size();
            cells.push_back(line.substr(p, comma - p));
            p = comma + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

// report.txt is rendered purely from the emitted files, so the report
// subcommand can rebuild it from a run directory without retraining.
void stage_report(Ctx& c) {
    std::string r;
    r += "run " + c.cfg.run_id() + "\n";
    r += "model " + c.cfg.model_kind + ", paradigms " + c.cfg.which + ", eval window " +
         c.cfg.eval_window + "\n\n";

    auto have = [&](const char* name) { return c.files.count(name) != 0; };

    if (have("metrics.csv")) {
        const TextCsv m = parse_csv_text(c.files.at("metrics.csv"));
        // columns: series_id,paradigm,model,FB,nMAE_pct,MSE,MAPE_pct
        std::map<std::string, std::vector<double>> nmae_by_paradigm;
        for (const auto& row : m.rows)
            nmae_by_paradigm[row[1]].push_back(std::strtod(row[4].c_str(), nullptr));
        r += "[metrics] nMAE% by paradigm (min / mean / max over series)\n";
        for (const auto& name : kParadigmOrder) {
            auto it = nmae_by_paradigm.find(name);
            if (it == nmae_by_paradigm.end()) continue;
            const auto& v = it->second;
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            r += "  " + name + ": " + format_double(*std::min_element(v.begin(), v.end())) +
                 " / " + format_double(mean) + " / " +
                 format_double(*std::max_element(v.begin(), v.end())) + "\n";
        }
        r += "\n";
    }

    if (have("cluster_map.csv")) {
        const TextCsv cm = parse_csv_text(c.files.at("cluster_map.csv"));
        std::map<std::string, std::size_t> sizes;
        for (const auto& row : cm.rows) sizes[row[1]] += 1;
        r += "[clusters] " + std::to_string(sizes.size()) + " cluster(s):";
        for (const auto& [cl, n] : sizes) r += " " + cl + "=" + std::to_string(n);
        r += "\n";
        if (have("cluster_notes.txt")) r += c.files.at("cluster_notes.txt");
        r += "\n";
    }

    if (have("peaks.csv")) {
        const TextCsv pk = parse_csv_text(c.files.at("peaks.csv"));
        if (!pk.rows.empty()) {
            double mean = 0.0;
            for (const auto& row : pk.rows)
                mean += std::fabs(std::strtod(row[4].c_str(), nullptr));
            mean /= static_cast<double>(pk.rows.size());
            r += "[peaks] " + std::to_string(pk.rows.size()) +
                 " period(s), mean |error| at the actual peak: " + format_double(mean) +
                 "%\n\n";
        }
    }

    if (have("drift.csv")) {
        r += "[drift] change% = 100*(local - global)/local, positive favours global\n";
        const TextCsv dr = parse_csv_text(c.files.at("drift.csv"));
        for (const auto& row : dr.rows)
            r += "  " + row[0] + " (" + row[1] + " series): local " + row[2] + ", global " +
                 row[3] + ", change " + row[4] + "%\n";
        r += "\n";
    }

    if (have("coherency_summary.txt"))
        r += "[coherency] " + c.files.at("coherency_summary.txt") + "\n";

    if (have("zeroshot_metrics.csv")) {
        const TextCsv zm = parse_csv_text(c.files.at("zeroshot_metrics.csv"));
        r += "[zeroshot] nMAE% per aggregate series\n";
        for (const auto& row : zm.rows) r += "  " + row[0] + ": " + row[4] + "\n";
        r += "\n";
    }

    c.files["report.txt"] = std::move(r);
}

// ---- output ------------------------------------------------------------------------

void load_existing(Ctx& c) {
    if (!fs::exists(c.dir + "/metrics.csv"))
        throw DataError("run directory '" + c.dir +
                        "' has no metrics.csv; run `run` or `evaluate` first");
    for (const char* name : {"metrics.csv", "cluster_map.csv", "cluster_notes.txt",
                             "peaks.csv", "drift.csv", "coherency_summary.txt",
                             "zeroshot_metrics.csv"})
        if (fs::exists(c.dir + "/" + name)) c.files[name] = read_text_file(c.dir + "/" + name);
}

RunOutcome flush(Ctx& c, const std::string& original_config_text) {
    c.files["config.ini"] = original_config_text;
    c.files["effective_config.ini"] = c.cfg.canonical_ini();
    fs::create_directories(c.dir);
    for (const auto& [rel, content] : c.files) write_text_file(c.dir + "/" + rel, content);

    std::vector<std::string> rels;
    for (const auto& entry : fs::recursive_directory_iterator(c.dir)) {
        if (!entry.is_regular_file()) continue;
        std::string rel = fs::relative(entry.path(), c.dir).generic_string();
        if (rel == "manifest.txt") continue;
        rels.push_back(std::move(rel));
    }
    std::sort(rels.begin(), rels.end());
    std::string manifest;
    char hex[24];
    for (const auto& rel : rels) {
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(read_text_file(c.dir + "/" + rel))));
        manifest += std::string(hex) + "  " + rel + "\n";
    }
    write_text_file(c.dir + "/manifest.txt", manifest);
    rels.push_back("manifest.txt");
    std::sort(rels.begin(), rels.end());
    std::cout << "wrote " << c.dir << " (" << rels.size() << " files)\n";
    return {c.dir, std::move(rels)};
}

} // namespace

RunOutcome run_pipeline(const RunConfig& cfg, const std::string& subcommand,
                        const std::string& original_config_text) {
    static const std::vector<std::string> known = {"ingest",   "synth",  "profile",
                                                   "train",    "evaluate", "peaks",
                                                   "zeroshot", "report", "run"};
    if (std::find(known.begin(), known.end(), subcommand) == known.end())
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    const std::string& sub = subcommand;

    Ctx c{cfg};
    c.dir = cfg.out_dir + "/" + cfg.run_id();

    if (sub == "report") {
        load_existing(c);
        stage_report(c);
        return flush(c, original_config_text);
    }

    if (sub == "synth" && cfg.source != "synth")
        throw ConfigError("the synth subcommand needs data.source = synth");

    stage_data(c);
    if (sub == "ingest") {
        std::cout << "ingest only; nothing written\n";
        return {};
    }
    if (cfg.source == "synth") stage_write_data(c);
    if (sub == "synth") return flush(c, original_config_text);

    stage_profile(c);
    if (sub == "profile") return flush(c, original_config_text);

    stage_split(c);
    stage_train(c);
    if (sub == "train") return flush(c, original_config_text);

    stage_evaluate(c);
    if (sub == "evaluate") return flush(c, original_config_text);

    if (sub == "peaks" || sub == "run") stage_peaks(c);
    if (sub == "peaks") return flush(c, original_config_text);

    if (sub == "run") stage_drift(c);

    if (sub == "zeroshot" || (sub == "run" && cfg.hierarchy_eval))
        stage_zeroshot(c, /*required=*/sub == "zeroshot");
    if (sub == "zeroshot") return flush(c, original_config_text);

    stage_report(c);
    return flush(c, original_config_text);
}

} // namespace gridcast
