#pragma once

// Shared fixtures for the test suites: throwaway directories, tiny sample
// sets, and hand-rolled series collections.

#include "gridcast/core.hpp"
#include "gridcast/featurizer.hpp"
#include "gridcast/series.hpp"
#include "gridcast/timeutil.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

namespace testutil {

// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("gridcast_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

// SampleSet straight from a matrix, with synthetic names f0..f{p-1}.
inline gridcast::SampleSet make_samples(const gridcast::Matrix& X,
                                        std::vector<double> y) {
    gridcast::SampleSet s;
    s.X = X;
    s.y = std::move(y);
    for (std::size_t j = 0; j < X.cols; ++j)
        s.feature_names.push_back("f" + std::to_string(j));
    s.series_ids.assign(X.rows, "s");
    s.at_target.assign(X.cols, false);
    for (std::size_t i = 0; i < X.rows; ++i)
        s.target_hours.push_back(static_cast<std::int64_t>(i));
    return s;
}

inline std::int64_t h2019() { return gridcast::hours_from_civil(2019, 1, 1, 0); }

// Deterministic wavy positive series; distinct phases make series distinct.
inline std::vector<double> wavy_series(std::size_t len, double base, double amp,
                                       double phase) {
    std::vector<double> v(len);
    for (std::size_t t = 0; t < len; ++t) {
        double daily = std::sin(2.0 * M_PI * (static_cast<double>(t % 24) / 24.0) + phase);
        double weekly =
            std::cos(2.0 * M_PI * (static_cast<double>(t % 168) / 168.0) + 0.5 * phase);
        v[t] = base + amp * daily + 0.3 * amp * weekly;
    }
    return v;
}

inline gridcast::SeriesCollection wavy_collection(std::size_t n_series, std::size_t len,
                                                  bool with_temperature = true) {
    gridcast::SeriesCollection c;
    c.start_hour = h2019();
    for (std::size_t i = 0; i < n_series; ++i) {
        std::string id = "a" + std::to_string(i);
        c.series[id] =
            wavy_series(len, 100.0 + 10.0 * static_cast<double>(i), 20.0,
                        0.4 * static_cast<double>(i));
        c.hierarchy[id] = (i % 2 == 0) ? "r0" : "r1";
    }
    if (with_temperature) {
        std::vector<double> temp(len);
        for (std::size_t t = 0; t < len; ++t)
            temp[t] = 12.0 + 8.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / 24.0);
        c.exogenous["temperature"] = temp;
    }
    return c;
}

inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    return true;
}

} // namespace testutil
