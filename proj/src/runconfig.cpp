#include "gridcast/runconfig.hpp"

#include "gridcast/timeutil.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>

namespace gridcast {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

const std::set<std::string> kSections = {"data",  "synth",    "split",  "features", "model",
                                         "paradigm", "eval", "output", "run"};

using Ini = std::map<std::string, std::map<std::string, std::string>>;

Ini parse_ini(const std::string& text) {
    Ini ini;
    std::string section;
    std::size_t lineno = 0, pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            if (ini.count(section))
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": duplicate section [" + section + "]");
            ini[section];
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected `key = value`");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": key outside any section");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (ini[section].count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                              section + "." + key + "'");
        ini[section][key] = trim(t.substr(eq + 1));
    }
    return ini;
}

void apply_override(Ini& ini, const std::string& ov) {
    const std::size_t eq = ov.find('=');
    const std::size_t dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override '" + ov + "' must look like section.key=value");
    const std::string sec = trim(ov.substr(0, dot));
    const std::string key = trim(ov.substr(dot + 1, eq - dot - 1));
    if (sec.empty() || key.empty())
        throw ConfigError("override '" + ov + "' must look like section.key=value");
    ini[sec][key] = trim(ov.substr(eq + 1));
}

// Hands out values and remembers what was asked for; anything left over at
// the end is an unknown key.
class Reader {
public:
    explicit Reader(Ini ini) : ini_(std::move(ini)) {
        for (const auto& [sec, kv] : ini_)
            if (!kSections.count(sec)) throw ConfigError("unknown section [" + sec + "]");
    }

    std::optional<std::string> take(const std::string& sec, const std::string& key) {
        auto s = ini_.find(sec);
        if (s == ini_.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        std::string v = k->second;
        s->second.erase(k);
        return v;
    }

    void finish() const {
        for (const auto& [sec, kv] : ini_)
            for (const auto& [key, value] : kv)
                throw ConfigError("unknown key '" + sec + "." + key + "'");
    }

private:
    Ini ini_;
};

int to_int(const std::string& v, const std::string& where) {
    int out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(where + ": '" + v + "' is not an integer");
    return out;
}

std::uint64_t to_u64(const std::string& v, const std::string& where) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(where + ": '" + v + "' is not a non-negative integer");
    return out;
}

double to_double(const std::string& v, const std::string& where) {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out))
        throw ConfigError(where + ": '" + v + "' is not a finite number");
    return out;
}

bool to_bool(const std::string& v, const std::string& where) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(where + ": '" + v + "' must be true or false");
}

// Dates and stamps inside the config are configuration mistakes, not data
// problems; rethrow under the key that holds them.
std::int64_t to_date(const std::string& v, const std::string& where) {
    try {
        return parse_date(v);
    } catch (const DataError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::int64_t to_stamp(const std::string& v, const std::string& where) {
    try {
        return parse_hour_timestamp(v);
    } catch (const DataError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    if (v.empty() || v == "none") return out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const std::size_t c = v.find(',', pos);
        out.push_back(trim(v.substr(pos, c == std::string::npos ? c : c - pos)));
        if (out.back().empty()) throw ConfigError("empty entry in list '" + v + "'");
        pos = c == std::string::npos ? v.size() + 1 : c + 1;
    }
    return out;
}

std::vector<int> to_int_list(const std::string& v, const std::string& where) {
    std::vector<int> out;
    for (const auto& item : split_list(v)) out.push_back(to_int(item, where));
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += items[i];
    }
    return out.empty() ? "none" : out;
}

std::string join_ints(const std::vector<int>& items) {
    std::vector<std::string> s;
    s.reserve(items.size());
    for (int v : items) s.push_back(std::to_string(v));
    return join(s);
}

} // namespace

RunConfig RunConfig::from_ini_text(const std::string& text,
                                   const std::vector<std::string>& overrides) {
    Ini ini = parse_ini(text);
    for (const auto& ov : overrides) apply_override(ini, ov);
    Reader r{std::move(ini)};
    RunConfig c;

    if (auto v = r.take("data", "source")) c.source = *v;
    if (auto v = r.take("data", "load_csv")) c.load_csv = *v;
    if (auto v = r.take("data", "temperature_csv")) c.temperature_csv = *v;
    if (auto v = r.take("data", "hierarchy_csv")) c.hierarchy_csv = *v;
    if (auto v = r.take("data", "gap_policy")) c.gap_policy = *v;
    if (auto v = r.take("data", "max_gap_hours")) c.max_gap_hours = to_int(*v, "data.max_gap_hours");

    if (auto v = r.take("synth", "archetypes")) c.synth_archetypes = split_list(*v);
    if (auto v = r.take("synth", "series_per_archetype"))
        c.series_per_archetype = to_u64(*v, "synth.series_per_archetype");
    if (auto v = r.take("synth", "regions")) c.regions = to_int(*v, "synth.regions");
    if (auto v = r.take("synth", "length_hours"))
        c.length_hours = to_u64(*v, "synth.length_hours");
    if (auto v = r.take("synth", "start_date")) c.start_date = *v;
    if (auto v = r.take("synth", "seed")) c.synth_seed = to_u64(*v, "synth.seed");
    if (auto v = r.take("synth", "drift")) c.drift = *v;
    if (auto v = r.take("synth", "drift_start_frac"))
        c.drift_start_frac = to_double(*v, "synth.drift_start_frac");
    if (auto v = r.take("synth", "drift_magnitude"))
        c.drift_magnitude = to_double(*v, "synth.drift_magnitude");
    if (auto v = r.take("synth", "drift_cap")) c.drift_cap = to_double(*v, "synth.drift_cap");
    if (auto v = r.take("synth", "drift_affected")) c.drift_affected = split_list(*v);

    if (auto v = r.take("split", "train_end")) {
        c.split_by_stamp = true;
        c.train_end_stamp = *v;
    }
    if (auto v = r.take("split", "val_end")) {
        c.split_by_stamp = true;
        c.val_end_stamp = *v;
    }
    if (auto v = r.take("split", "train_frac")) c.train_frac = to_double(*v, "split.train_frac");
    if (auto v = r.take("split", "val_frac")) c.val_frac = to_double(*v, "split.val_frac");

    FeatureSpec f;
    if (auto v = r.take("features", "lags")) f.lags = to_int_list(*v, "features.lags");
    if (auto v = r.take("features", "poly_lags"))
        f.poly_lags = to_int_list(*v, "features.poly_lags");
    if (auto v = r.take("features", "poly_degrees"))
        f.poly_degrees = to_int_list(*v, "features.poly_degrees");
    if (auto v = r.take("features", "ma_windows"))
        f.ma_windows = to_int_list(*v, "features.ma_windows");
    if (auto v = r.take("features", "ema_span")) f.ema_span = to_int(*v, "features.ema_span");
    if (auto v = r.take("features", "calendar")) {
        f.calendar_hour = f.calendar_dow = f.calendar_month = false;
        for (const auto& item : split_list(*v)) {
            if (item == "hour") f.calendar_hour = true;
            else if (item == "dow") f.calendar_dow = true;
            else if (item == "month") f.calendar_month = true;
            else throw ConfigError("features.calendar: unknown component '" + item + "'");
        }
    }
    if (auto v = r.take("features", "local_time_offset_hours"))
        f.local_time_offset_hours = to_int(*v, "features.local_time_offset_hours");
    if (auto v = r.take("features", "holidays")) {
        f.holidays.clear();
        for (const auto& item : split_list(*v))
            f.holidays.insert(to_date(item, "features.holidays"));
    }
    if (auto v = r.take("features", "pandemic")) {
        if (*v == "none") {
            f.has_pandemic_interval = false;
        } else {
            const std::size_t colon = v->find(':');
            if (colon == std::string::npos)
                throw ConfigError("features.pandemic must be none or start-date:end-date");
            f.has_pandemic_interval = true;
            f.pandemic_start_day = to_date(trim(v->substr(0, colon)), "features.pandemic");
            f.pandemic_end_day = to_date(trim(v->substr(colon + 1)), "features.pandemic");
        }
    }
    if (auto v = r.take("features", "exogenous")) {
        f.exogenous.clear();
        for (const auto& item : split_list(*v))
            f.exogenous.push_back({item, /*at_target=*/true, /*lag=*/0, /*add_square=*/true});
    }
    if (auto v = r.take("features", "interactions")) {
        f.interactions.clear();
        for (const auto& item : split_list(*v)) {
            const std::size_t star = item.find('*');
            if (star == std::string::npos)
                throw ConfigError("features.interactions entries must look like a*b");
            f.interactions.emplace_back(trim(item.substr(0, star)), trim(item.substr(star + 1)));
        }
    }
    c.features = f;

    if (auto v = r.take("model", "kind")) c.model_kind = *v;
    if (auto v = r.take("model", "alpha")) c.alpha = to_double(*v, "model.alpha");
    if (auto v = r.take("model", "n_estimators"))
        c.n_estimators = to_int(*v, "model.n_estimators");
    if (auto v = r.take("model", "learning_rate"))
        c.learning_rate = to_double(*v, "model.learning_rate");
    if (auto v = r.take("model", "max_depth")) c.max_depth = to_int(*v, "model.max_depth");
    if (auto v = r.take("model", "max_leaves")) c.max_leaves = to_int(*v, "model.max_leaves");
    if (auto v = r.take("model", "min_samples_leaf"))
        c.min_samples_leaf = to_int(*v, "model.min_samples_leaf");

    if (auto v = r.take("paradigm", "which")) c.which = *v;
    if (auto v = r.take("paradigm", "variant")) c.variant = *v;
    if (auto v = r.take("paradigm", "K")) c.K = to_int(*v, "paradigm.K");
    if (auto v = r.take("paradigm", "seed")) c.seed = to_u64(*v, "paradigm.seed");

    if (auto v = r.take("eval", "window")) c.eval_window = *v;
    if (auto v = r.take("eval", "peak_period")) c.peak_period = *v;
    if (auto v = r.take("eval", "drift_labels")) c.drift_labels = *v;
    if (auto v = r.take("eval", "hierarchy_eval"))
        c.hierarchy_eval = to_bool(*v, "eval.hierarchy_eval");

    if (auto v = r.take("output", "dir")) c.out_dir = *v;

    if (auto v = r.take("run", "threads")) c.threads = to_int(*v, "run.threads");

    r.finish();
    c.validate();
    return c;
}

void RunConfig::validate() const {
    auto expect = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    expect(source == "synth" || source == "csv", "data.source must be synth or csv");
    if (source == "csv") expect(!load_csv.empty(), "data.load_csv is required for csv source");
    expect(gap_policy == "forward_fill" || gap_policy == "reject",
           "data.gap_policy must be forward_fill or reject");
    expect(max_gap_hours >= 0, "data.max_gap_hours must be >= 0");

    if (source == "synth") {
        expect(!synth_archetypes.empty(), "synth.archetypes must not be empty");
        for (const auto& a : synth_archetypes)
            expect(a == "residential" || a == "industrial",
                   "synth.archetypes: unknown archetype '" + a + "'");
        expect(series_per_archetype >= 1, "synth.series_per_archetype must be >= 1");
        expect(regions >= 1, "synth.regions must be >= 1");
        expect(length_hours >= 24u * 28u, "synth.length_hours must cover at least four weeks");
        to_date(start_date, "synth.start_date");
        expect(drift == "none" || drift == "sudden" || drift == "incremental" ||
                   drift == "recurring",
               "synth.drift must be none, sudden, incremental, or recurring");
        expect(drift_start_frac > 0.0 && drift_start_frac < 1.0,
               "synth.drift_start_frac must lie in (0, 1)");
        if (drift == "sudden")
            expect(drift_magnitude > 0.0, "synth.drift_magnitude must be positive");
        if (drift == "recurring")
            expect(std::fabs(drift_magnitude) < 1.0,
                   "synth.drift_magnitude must satisfy |m| < 1 for recurring drift");
        if (drift == "incremental")
            expect(drift_cap > 0.0 && drift_cap < 1.0, "synth.drift_cap must lie in (0, 1)");
    }

    if (split_by_stamp) {
        expect(!train_end_stamp.empty() && !val_end_stamp.empty(),
               "split.train_end and split.val_end must both be set");
        to_stamp(train_end_stamp, "split.train_end");
        to_stamp(val_end_stamp, "split.val_end");
    } else {
        expect(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0,
               "split fractions must be positive with train_frac + val_frac < 1");
    }

    features.validate();
    model_kind_from_string(model_kind); // throws on unknown kind
    expect(alpha >= 0.0, "model.alpha must be >= 0");
    expect(n_estimators >= 0, "model.n_estimators must be >= 0 (0 = paradigm default)");
    Hyperparams probe = hyperparams(/*pooled=*/true);
    probe.validate();

    expect(which == "local" || which == "global" || which == "clusterwise" || which == "all",
           "paradigm.which must be local, global, clusterwise, or all");
    expect(variant == "model-based" || variant == "instance" || variant == "weighted-instance",
           "paradigm.variant must be model-based, instance, or weighted-instance");
    expect(K >= 0, "paradigm.K must be >= 0");

    expect(eval_window == "val" || eval_window == "test", "eval.window must be val or test");
    expect(peak_period == "monthly" || peak_period == "annual" || peak_period == "none",
           "eval.peak_period must be monthly, annual, or none");
    expect(!out_dir.empty(), "output.dir must not be empty");
    expect(threads >= 1, "run.threads must be >= 1");
}

std::string RunConfig::canonical_ini() const {
    std::string t;
    auto kv = [&t](const char* key, const std::string& value) {
        t += key;
        t += value.empty() ? " =\n" : " = " + value + "\n";
    };
    auto num = [](double v) { return format_double(v); };

    t += "[data]\n";
    kv("source", source);
    kv("load_csv", load_csv);
    kv("temperature_csv", temperature_csv);
    kv("hierarchy_csv", hierarchy_csv);
    kv("gap_policy", gap_policy);
    kv("max_gap_hours", std::to_string(max_gap_hours));

    t += "\n[synth]\n";
    kv("archetypes", join(synth_archetypes));
    kv("series_per_archetype", std::to_string(series_per_archetype));
    kv("regions", std::to_string(regions));
    kv("length_hours", std::to_string(length_hours));
    kv("start_date", start_date);
    kv("seed", std::to_string(synth_seed));
    kv("drift", drift);
    kv("drift_start_frac", num(drift_start_frac));
    kv("drift_magnitude", num(drift_magnitude));
    kv("drift_cap", num(drift_cap));
    kv("drift_affected", join(drift_affected));

    t += "\n[split]\n";
    if (split_by_stamp) {
        kv("train_end", train_end_stamp);
        kv("val_end", val_end_stamp);
    } else {
        kv("train_frac", num(train_frac));
        kv("val_frac", num(val_frac));
    }

    t += "\n[features]\n";
    kv("lags", join_ints(features.lags));
    kv("poly_lags", join_ints(features.poly_lags));
    kv("poly_degrees", join_ints(features.poly_degrees));
    kv("ma_windows", join_ints(features.ma_windows));
    kv("ema_span", std::to_string(features.ema_span));
    {
        std::vector<std::string> cal;
        if (features.calendar_hour) cal.push_back("hour");
        if (features.calendar_dow) cal.push_back("dow");
        if (features.calendar_month) cal.push_back("month");
        kv("calendar", join(cal));
    }
    kv("local_time_offset_hours", std::to_string(features.local_time_offset_hours));
    {
        std::vector<std::string> days;
        for (std::int64_t d : features.holidays) days.push_back(format_date(d));
        kv("holidays", join(days));
    }
    kv("pandemic", features.has_pandemic_interval
                       ? format_date(features.pandemic_start_day) + ":" +
                             format_date(features.pandemic_end_day)
                       : "none");
    {
        std::vector<std::string> ex;
        for (const auto& e : features.exogenous) ex.push_back(e.channel);
        kv("exogenous", join(ex));
    }
    {
        std::vector<std::string> ia;
        for (const auto& [a, b] : features.interactions) ia.push_back(a + "*" + b);
        kv("interactions", join(ia));
    }

    t += "\n[model]\n";
    kv("kind", model_kind);
    kv("alpha", num(alpha));
    kv("n_estimators", std::to_string(n_estimators));
    kv("learning_rate", num(learning_rate));
    kv("max_depth", std::to_string(max_depth));
    kv("max_leaves", std::to_string(max_leaves));
    kv("min_samples_leaf", std::to_string(min_samples_leaf));

    t += "\n[paradigm]\n";
    kv("which", which);
    kv("variant", variant);
    kv("K", std::to_string(K));
    kv("seed", std::to_string(seed));

    t += "\n[eval]\n";
    kv("window", eval_window);
    kv("peak_period", peak_period);
    kv("drift_labels", drift_labels);
    kv("hierarchy_eval", hierarchy_eval ? "true" : "false");

    t += "\n[output]\n";
    kv("dir", out_dir);

    // [run] is execution detail, not experiment identity: the thread count
    // must not move the run id or change a single output byte.
    return t;
}

std::string RunConfig::run_id() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_ini())));
    return buf;
}

IngestConfig RunConfig::ingest_config() const {
    IngestConfig ic;
    ic.gap_policy = gap_policy == "reject" ? GapPolicy::reject : GapPolicy::forward_fill;
    ic.max_gap_hours = max_gap_hours;
    return ic;
}

SynthConfig RunConfig::synth_config() const {
    SynthConfig sc;
    sc.archetypes.clear();
    for (const auto& name : synth_archetypes)
        sc.archetypes.push_back(name == "residential" ? ArchetypeConfig::residential()
                                                      : ArchetypeConfig::industrial());
    sc.series_per_archetype = series_per_archetype;
    sc.regions = regions;
    sc.length_hours = length_hours;
    sc.start_hour = parse_date(start_date) * 24;
    sc.seed = synth_seed;
    return sc;
}

Hyperparams RunConfig::hyperparams(bool pooled) const {
    Hyperparams hp;
    hp.alpha = alpha;
    hp.learning_rate = learning_rate;
    hp.max_depth = max_depth;
    hp.max_leaves = max_leaves;
    hp.min_samples_leaf = min_samples_leaf;
    hp.n_estimators = n_estimators > 0 ? n_estimators
                      : pooled        ? Hyperparams::global_defaults().n_estimators
                                      : Hyperparams::local_defaults().n_estimators;
    return hp;
}

SplitSpec RunConfig::resolve_split(const SeriesCollection& c) const {
    SplitSpec s;
    if (split_by_stamp) {
        s.train_end = parse_hour_timestamp(train_end_stamp);
        s.val_end = parse_hour_timestamp(val_end_stamp);
        s.test_end = c.end_hour();
        return s;
    }
    const auto len = static_cast<double>(c.max_length());
    const auto train_len = static_cast<std::int64_t>(std::floor(len * train_frac));
    const auto val_len = static_cast<std::int64_t>(std::floor(len * val_frac));
    if (train_len < 1 || val_len < 1 ||
        train_len + val_len >= static_cast<std::int64_t>(c.max_length()))
        throw ConfigError("split fractions leave an empty window");
    s.train_end = c.start_hour + train_len - 1;
    s.val_end = s.train_end + val_len;
    s.test_end = c.end_hour();
    return s;
}

std::optional<PeakPeriod> RunConfig::peak() const {
    if (peak_period == "none") return std::nullopt;
    return peak_period == "annual" ? PeakPeriod::annual : PeakPeriod::monthly;
}

} // namespace gridcast
