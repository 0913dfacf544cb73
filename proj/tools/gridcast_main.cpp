#include "gridcast/core.hpp"
#include "gridcast/csv.hpp"
#include "gridcast/pipeline.hpp"
#include "gridcast/runconfig.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

// Exit codes, stable for scripting: 2 bad configuration or usage, 3 bad
// data, 4 training failure, 5 evaluation failure, 1 anything unexpected.
int run(const std::string& sub, const std::string& config_path,
        std::vector<std::string> overrides, int threads) {
    if (threads > 0) overrides.push_back("run.threads=" + std::to_string(threads));
    const std::string text = gridcast::read_text_file(config_path);
    const gridcast::RunConfig cfg = gridcast::RunConfig::from_ini_text(text, overrides);
    gridcast::run_pipeline(cfg, sub, text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"local vs global vs cluster-wise paradigms for short-term load "
                 "forecasting"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    int threads = 0;
    app.add_option("-c,--config", config_path, "experiment INI file")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("-s,--set", overrides,
                   "override a config value, section.key=value (repeatable)");
    app.add_option("-j,--threads", threads, "shorthand for --set run.threads=N");

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"ingest", "load and validate the data, write nothing"},
        {"synth", "generate the synthetic collection and write its CSVs"},
        {"profile", "add per-series shape statistics"},
        {"train", "add fitted model bundles"},
        {"evaluate", "add per-series forecast metrics"},
        {"peaks", "add peak-hour errors per calendar period"},
        {"zeroshot", "add aggregate zero-shot metrics and the coherency gap"},
        {"run", "everything: train, evaluate, peaks, drift, zero-shot, report"},
        {"report", "re-render report.txt from an existing run directory"},
    };
    for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // help and version are not errors
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        return run(sub, config_path, overrides, threads);
    } catch (const gridcast::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gridcast::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const gridcast::TrainError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return 4;
    } catch (const gridcast::EvalError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
