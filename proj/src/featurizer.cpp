#include "gridcast/featurizer.hpp"

#include "gridcast/timeutil.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridcast {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class ColKind {
    lag,
    lag_pow,
    mave,
    ema,
    hour_sin,
    hour_cos,
    dow_sin,
    dow_cos,
    month_sin,
    month_cos,
    holiday,
    pandemic,
    exog,
    exog_square,
    interaction,
};

struct ColumnPlan {
    ColKind kind;
    std::string name;
    int a = 0;            // lag / window / degree carrier
    int b = 0;            // degree for lag_pow
    std::string channel;  // exog columns
    bool exog_at_target = true;
    int exog_lag = 0;
    std::size_t op_a = 0, op_b = 0; // interaction operand column indices
    bool at_target = false;
};

std::vector<ColumnPlan> plan_columns(const FeatureSpec& spec) {
    spec.validate();
    std::vector<ColumnPlan> plan;
    auto add = [&](ColumnPlan c) {
        for (const auto& existing : plan)
            if (existing.name == c.name)
                throw ConfigError("duplicate feature column '" + c.name + "'");
        plan.push_back(std::move(c));
    };
    for (int L : spec.lags) add({ColKind::lag, "lag_" + std::to_string(L), L});
    for (int L : spec.poly_lags)
        for (int d : spec.poly_degrees)
            add({ColKind::lag_pow,
                 "lag_" + std::to_string(L) + "_pow" + std::to_string(d), L, d});
    for (int w : spec.ma_windows) add({ColKind::mave, "mave_" + std::to_string(w), w});
    if (spec.ema_span > 0)
        add({ColKind::ema, "ema_" + std::to_string(spec.ema_span), spec.ema_span});
    if (spec.calendar_hour) {
        add({ColKind::hour_sin, "hour_sin"});
        add({ColKind::hour_cos, "hour_cos"});
    }
    if (spec.calendar_dow) {
        add({ColKind::dow_sin, "dow_sin"});
        add({ColKind::dow_cos, "dow_cos"});
    }
    if (spec.calendar_month) {
        add({ColKind::month_sin, "month_sin"});
        add({ColKind::month_cos, "month_cos"});
    }
    add({ColKind::holiday, "holiday"});
    add({ColKind::pandemic, "pandemic"});
    for (const auto& ex : spec.exogenous) {
        ColumnPlan c{ColKind::exog,
                     ex.at_target ? ex.channel
                                  : ex.channel + "_lag" + std::to_string(ex.lag)};
        c.channel = ex.channel;
        c.exog_at_target = ex.at_target;
        c.exog_lag = ex.lag;
        c.at_target = ex.at_target;
        add(c);
        if (ex.add_square) {
            ColumnPlan sq = c;
            sq.kind = ColKind::exog_square;
            sq.name = c.name + "_pow2";
            add(sq);
        }
    }
    for (const auto& [lhs, rhs] : spec.interactions) {
        auto find = [&](const std::string& n) -> std::size_t {
            for (std::size_t i = 0; i < plan.size(); ++i)
                if (plan[i].kind != ColKind::interaction && plan[i].name == n) return i;
            throw ConfigError("interaction operand '" + n + "' is not a declared feature");
        };
        ColumnPlan c{ColKind::interaction, lhs + "_x_" + rhs};
        c.op_a = find(lhs);
        c.op_b = find(rhs);
        c.at_target = plan[c.op_a].at_target || plan[c.op_b].at_target;
        add(c);
    }
    return plan;
}

} // namespace

void FeatureSpec::validate() const {
    auto check_hours = [](const std::vector<int>& xs, const char* what) {
        for (int x : xs)
            if (x < 1 || x > kWarmupHours)
                throw ConfigError(std::string(what) + " " + std::to_string(x) +
                                  " must lie in [1, " + std::to_string(kWarmupHours) + "]");
    };
    check_hours(lags, "lag");
    check_hours(poly_lags, "polynomial lag");
    check_hours(ma_windows, "moving-average window");
    for (int d : poly_degrees)
        if (d < 2) throw ConfigError("polynomial degree must be >= 2");
    if (ema_span < 0) throw ConfigError("ema_span must be >= 0");
    for (const auto& ex : exogenous) {
        if (ex.channel.empty()) throw ConfigError("exogenous channel name is empty");
        if (!ex.at_target && (ex.lag < 1 || ex.lag > kWarmupHours))
            throw ConfigError("exogenous lag must lie in [1, " +
                              std::to_string(kWarmupHours) + "]");
    }
    if (has_pandemic_interval && pandemic_end_day < pandemic_start_day)
        throw ConfigError("pandemic interval end precedes start");
}

std::vector<std::string> FeatureSpec::feature_names() const {
    const auto plan = plan_columns(*this);
    std::vector<std::string> names;
    names.reserve(plan.size());
    for (const auto& c : plan) names.push_back(c.name);
    return names;
}

std::string FeatureSpec::canonical_string() const {
    return to_json().dump();
}

nlohmann::json FeatureSpec::to_json() const {
    nlohmann::json j;
    j["lags"] = lags;
    j["poly_lags"] = poly_lags;
    j["poly_degrees"] = poly_degrees;
    j["ma_windows"] = ma_windows;
    j["ema_span"] = ema_span;
    j["calendar_hour"] = calendar_hour;
    j["calendar_dow"] = calendar_dow;
    j["calendar_month"] = calendar_month;
    j["local_time_offset_hours"] = local_time_offset_hours;
    j["holidays"] = std::vector<std::int64_t>(holidays.begin(), holidays.end());
    j["has_pandemic_interval"] = has_pandemic_interval;
    j["pandemic_start_day"] = pandemic_start_day;
    j["pandemic_end_day"] = pandemic_end_day;
    j["exogenous"] = nlohmann::json::array();
    for (const auto& ex : exogenous)
        j["exogenous"].push_back({{"channel", ex.channel},
                                  {"at_target", ex.at_target},
                                  {"lag", ex.lag},
                                  {"add_square", ex.add_square}});
    j["interactions"] = nlohmann::json::array();
    for (const auto& [a, b] : interactions) j["interactions"].push_back({a, b});
    return j;
}

FeatureSpec FeatureSpec::from_json(const nlohmann::json& j) {
    FeatureSpec s;
    s.lags = j.at("lags").get<std::vector<int>>();
    s.poly_lags = j.at("poly_lags").get<std::vector<int>>();
    s.poly_degrees = j.at("poly_degrees").get<std::vector<int>>();
    s.ma_windows = j.at("ma_windows").get<std::vector<int>>();
    s.ema_span = j.at("ema_span").get<int>();
    s.calendar_hour = j.at("calendar_hour").get<bool>();
    s.calendar_dow = j.at("calendar_dow").get<bool>();
    s.calendar_month = j.at("calendar_month").get<bool>();
    s.local_time_offset_hours = j.at("local_time_offset_hours").get<int>();
    const auto hol = j.at("holidays").get<std::vector<std::int64_t>>();
    s.holidays.clear();
    s.holidays.insert(hol.begin(), hol.end());
    s.has_pandemic_interval = j.at("has_pandemic_interval").get<bool>();
    s.pandemic_start_day = j.at("pandemic_start_day").get<std::int64_t>();
    s.pandemic_end_day = j.at("pandemic_end_day").get<std::int64_t>();
    s.exogenous.clear();
    for (const auto& ex : j.at("exogenous"))
        s.exogenous.push_back({ex.at("channel").get<std::string>(),
                               ex.at("at_target").get<bool>(), ex.at("lag").get<int>(),
                               ex.at("add_square").get<bool>()});
    s.interactions.clear();
    for (const auto& p : j.at("interactions"))
        s.interactions.emplace_back(p.at(0).get<std::string>(),
                                    p.at(1).get<std::string>());
    return s;
}

FeatureSpec FeatureSpec::without_exogenous() const {
    FeatureSpec s = *this;
    s.exogenous.clear();
    std::vector<std::pair<std::string, std::string>> kept;
    const auto base = [&] {
        FeatureSpec probe = s;
        probe.interactions.clear();
        return probe.feature_names();
    }();
    for (const auto& [a, b] : s.interactions) {
        const bool a_ok = std::find(base.begin(), base.end(), a) != base.end();
        const bool b_ok = std::find(base.begin(), base.end(), b) != base.end();
        if (a_ok && b_ok) kept.emplace_back(a, b);
    }
    s.interactions = std::move(kept);
    return s;
}

std::size_t SampleSet::col_index(const std::string& name) const {
    for (std::size_t j = 0; j < feature_names.size(); ++j)
        if (feature_names[j] == name) return j;
    throw ConfigError("no feature column named '" + name + "'");
}

SampleSet build_samples(const std::string& series_id, std::span<const double> values,
                        std::int64_t start_hour,
                        const std::map<std::string, std::vector<double>>& exogenous,
                        const FeatureSpec& spec) {
    const auto plan = plan_columns(spec);
    const std::size_t l = values.size();
    if (l <= static_cast<std::size_t>(kWarmupHours) + 1)
        throw DataError("series '" + series_id + "' has " + std::to_string(l) +
                        " hours; need more than " + std::to_string(kWarmupHours + 1));
    const std::size_t m = l - static_cast<std::size_t>(kWarmupHours);

    for (const auto& c : plan) {
        if (c.kind != ColKind::exog && c.kind != ColKind::exog_square) continue;
        auto it = exogenous.find(c.channel);
        if (it == exogenous.end())
            throw DataError("series '" + series_id + "' needs exogenous channel '" +
                            c.channel + "', which is absent");
        const std::size_t need = c.exog_at_target
                                     ? l
                                     : l - static_cast<std::size_t>(c.exog_lag);
        if (it->second.size() < need)
            throw DataError("channel '" + c.channel + "' covers " +
                            std::to_string(it->second.size()) + " hours, series '" +
                            series_id + "' needs " + std::to_string(need));
    }

    // EMA over the full prefix; row tau reads ema[tau-1].
    std::vector<double> ema;
    if (spec.ema_span > 0) {
        const double alpha = 2.0 / (spec.ema_span + 1.0);
        ema.resize(l);
        ema[0] = values[0];
        for (std::size_t t = 1; t < l; ++t)
            ema[t] = alpha * values[t] + (1.0 - alpha) * ema[t - 1];
    }

    SampleSet out;
    out.X = Matrix(m, plan.size());
    out.y.resize(m);
    out.series_ids.assign(m, series_id);
    out.target_hours.resize(m);
    out.feature_names.reserve(plan.size());
    out.at_target.reserve(plan.size());
    for (const auto& c : plan) {
        out.feature_names.push_back(c.name);
        out.at_target.push_back(c.at_target);
    }

    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t tau = r + static_cast<std::size_t>(kWarmupHours);
        const std::int64_t target_hour = start_hour + static_cast<std::int64_t>(tau);
        out.y[r] = values[tau];
        out.target_hours[r] = target_hour;
        const CivilTime ct =
            civil_from_hours(target_hour + spec.local_time_offset_hours);
        const std::int64_t local_day =
            (target_hour + spec.local_time_offset_hours) / 24 -
            ((target_hour + spec.local_time_offset_hours) % 24 < 0 ? 1 : 0);
        auto* row = &out.X(r, 0);
        for (std::size_t j = 0; j < plan.size(); ++j) {
            const ColumnPlan& c = plan[j];
            double v = 0.0;
            switch (c.kind) {
            case ColKind::lag:
                v = values[tau - static_cast<std::size_t>(c.a)];
                break;
            case ColKind::lag_pow: {
                const double x = values[tau - static_cast<std::size_t>(c.a)];
                v = x;
                for (int d = 1; d < c.b; ++d) v *= x;
                break;
            }
            case ColKind::mave: {
                double sum = 0.0;
                for (int k = 1; k <= c.a; ++k)
                    sum += values[tau - static_cast<std::size_t>(k)];
                v = sum / c.a;
                break;
            }
            case ColKind::ema:
                v = ema[tau - 1];
                break;
            case ColKind::hour_sin:
                v = std::sin(kTwoPi * ct.hour / 24.0);
                break;
            case ColKind::hour_cos:
                v = std::cos(kTwoPi * ct.hour / 24.0);
                break;
            case ColKind::dow_sin:
                v = std::sin(kTwoPi * ct.dow / 7.0);
                break;
            case ColKind::dow_cos:
                v = std::cos(kTwoPi * ct.dow / 7.0);
                break;
            case ColKind::month_sin:
                v = std::sin(kTwoPi * (ct.month - 1) / 12.0);
                break;
            case ColKind::month_cos:
                v = std::cos(kTwoPi * (ct.month - 1) / 12.0);
                break;
            case ColKind::holiday:
                v = spec.holidays.count(local_day) ? 1.0 : 0.0;
                break;
            case ColKind::pandemic:
                v = (spec.has_pandemic_interval && local_day >= spec.pandemic_start_day &&
                     local_day <= spec.pandemic_end_day)
                        ? 1.0
                        : 0.0;
                break;
            case ColKind::exog: {
                const auto& ch = exogenous.at(c.channel);
                v = c.exog_at_target ? ch[tau]
                                     : ch[tau - static_cast<std::size_t>(c.exog_lag)];
                break;
            }
            case ColKind::exog_square: {
                const auto& ch = exogenous.at(c.channel);
                const double x = c.exog_at_target
                                     ? ch[tau]
                                     : ch[tau - static_cast<std::size_t>(c.exog_lag)];
                v = x * x;
                break;
            }
            case ColKind::interaction:
                v = row[c.op_a] * row[c.op_b];
                break;
            }
            if (!std::isfinite(v))
                throw DataError("non-finite value in column '" + c.name +
                                "' of series '" + series_id + "'");
            row[j] = v;
        }
    }
    return out;
}

SampleSet filter_by_target_range(const SampleSet& s, std::int64_t from_hour,
                                 std::int64_t to_hour) {
    SampleSet out;
    out.feature_names = s.feature_names;
    out.at_target = s.at_target;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < s.rows(); ++r)
        if (s.target_hours[r] >= from_hour && s.target_hours[r] <= to_hour)
            keep.push_back(r);
    out.X = Matrix(keep.size(), s.cols());
    out.y.reserve(keep.size());
    out.series_ids.reserve(keep.size());
    out.target_hours.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const std::size_t r = keep[i];
        std::copy_n(s.X.row(r).data(), s.cols(), out.X.row(i).data());
        out.y.push_back(s.y[r]);
        out.series_ids.push_back(s.series_ids[r]);
        out.target_hours.push_back(s.target_hours[r]);
    }
    return out;
}

SampleSet pool_samples(const std::vector<SampleSet>& parts) {
    if (parts.empty()) throw DataError("nothing to pool");
    SampleSet out;
    out.feature_names = parts[0].feature_names;
    out.at_target = parts[0].at_target;
    std::size_t total = 0;
    for (const auto& p : parts) {
        if (p.feature_names != out.feature_names)
            throw DataError("sample sets have mismatched feature schemas");
        total += p.rows();
    }
    out.X = Matrix(total, parts[0].cols());
    out.y.reserve(total);
    out.series_ids.reserve(total);
    out.target_hours.reserve(total);
    std::size_t at = 0;
    for (const auto& p : parts) {
        for (std::size_t r = 0; r < p.rows(); ++r, ++at)
            std::copy_n(p.X.row(r).data(), p.cols(), out.X.row(at).data());
        out.y.insert(out.y.end(), p.y.begin(), p.y.end());
        out.series_ids.insert(out.series_ids.end(), p.series_ids.begin(),
                              p.series_ids.end());
        out.target_hours.insert(out.target_hours.end(), p.target_hours.begin(),
                                p.target_hours.end());
    }
    return out;
}

HeterogeneityProfile heterogeneity_profile(std::span<const double> values,
                                           std::int64_t start_hour,
                                           int local_time_offset_hours) {
    if (values.size() < 14u * 24u)
        throw DataError("profile needs at least 14 days of data, got " +
                        std::to_string(values.size()) + " hours");
    std::vector<std::vector<double>> by_hour(24);
    std::vector<double> night, day, weekend, weekday;
    for (std::size_t t = 0; t < values.size(); ++t) {
        const CivilTime ct = civil_from_hours(
            start_hour + static_cast<std::int64_t>(t) + local_time_offset_hours);
        by_hour[static_cast<std::size_t>(ct.hour)].push_back(values[t]);
        if (ct.hour < 6) night.push_back(values[t]);
        if (ct.hour >= 12 && ct.hour < 18) day.push_back(values[t]);
        if (ct.dow >= 5)
            weekend.push_back(values[t]);
        else
            weekday.push_back(values[t]);
    }
    const double overall = shifted_mean(values);
    if (!(overall > 0.0))
        throw DataError("profile requires a strictly positive mean load");

    std::vector<double> profile(24);
    for (int h = 0; h < 24; ++h) profile[h] = shifted_mean(by_hour[static_cast<std::size_t>(h)]);
    const double profile_mean = shifted_mean(profile);
    double var = 0.0;
    for (double p : profile) var += (p - profile_mean) * (p - profile_mean);
    var /= 24.0;

    double abs_diff_sum = 0.0;
    for (std::size_t t = 1; t < values.size(); ++t)
        abs_diff_sum += std::abs(values[t] - values[t - 1]);

    HeterogeneityProfile hp;
    hp.seasonality_index = std::sqrt(var) / overall;
    hp.total_variation =
        (abs_diff_sum / static_cast<double>(values.size() - 1)) / overall;
    hp.night_to_day = shifted_mean(night) / shifted_mean(day);
    hp.weekend_to_weekday = shifted_mean(weekend) / shifted_mean(weekday);
    return hp;
}

} // namespace gridcast
