#pragma once

#include "gridcast/featurizer.hpp"
#include "gridcast/metrics.hpp"
#include "gridcast/models.hpp"
#include "gridcast/series.hpp"
#include "gridcast/synthgen.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridcast {

// Experiment description, read from an INI file with [data] [synth] [split]
// [features] [model] [paradigm] [eval] [output] [run] sections. Parsing is
// strict: an unknown section or key, a duplicate key, or an invalid value is
// a ConfigError before any work starts. The effective configuration
// round-trips: parse(canonical_ini()) yields the same canonical_ini().
struct RunConfig {
    // [data]
    std::string source = "synth"; // synth | csv
    std::string load_csv;
    std::string temperature_csv;
    std::string hierarchy_csv;
    std::string gap_policy = "forward_fill"; // forward_fill | reject
    int max_gap_hours = 3;

    // [synth]
    std::vector<std::string> synth_archetypes = {"residential", "industrial"};
    std::size_t series_per_archetype = 8;
    int regions = 2;
    std::size_t length_hours = 8760;
    std::string start_date = "2019-01-01";
    std::uint64_t synth_seed = 1;
    std::string drift = "none"; // none | sudden | incremental | recurring
    double drift_start_frac = 0.75;
    double drift_magnitude = 0.8;
    double drift_cap = 0.5;
    std::vector<std::string> drift_affected; // empty: first half of the series

    // [split]
    bool split_by_stamp = false;
    std::string train_end_stamp;
    std::string val_end_stamp;
    double train_frac = 0.7;
    double val_frac = 0.15;

    // [features]
    FeatureSpec features;

    // [model]
    std::string model_kind = "ridge"; // ridge | gbdt
    double alpha = 1.0;
    int n_estimators = 0; // 0: 200 for local fits, 1000 for pooled fits
    double learning_rate = 0.1;
    int max_depth = 4;
    int max_leaves = 32;
    int min_samples_leaf = 20;

    // [paradigm]
    std::string which = "all"; // local | global | clusterwise | all
    std::string variant = "model-based";
    int K = 0; // 0 picks K by silhouette
    std::uint64_t seed = 42;

    // [eval]
    std::string eval_window = "test";   // val | test
    std::string peak_period = "monthly"; // monthly | annual | none
    std::string drift_labels = "synth";  // synth | none | <csv path>
    bool hierarchy_eval = true;

    // [output]
    std::string out_dir = "out";

    // [run]. Execution detail: absent from the canonical form, so the
    // thread count never moves the run id.
    int threads = 1;

    void validate() const;
    std::string canonical_ini() const;
    // 16 hex digits of the canonical effective configuration; names the
    // output directory so identical configs land in the same place.
    std::string run_id() const;

    ModelKind kind() const { return model_kind_from_string(model_kind); }
    IngestConfig ingest_config() const;
    SynthConfig synth_config() const;
    // Effective hyperparameters; paradigm chooses the boosting budget when
    // n_estimators is 0.
    Hyperparams hyperparams(bool pooled) const;
    SplitSpec resolve_split(const SeriesCollection& c) const;
    std::optional<PeakPeriod> peak() const;

    // overrides: "section.key=value" entries applied on top of the file.
    static RunConfig from_ini_text(const std::string& text,
                                   const std::vector<std::string>& overrides = {});
};

} // namespace gridcast
