#pragma once

#include "gridcast/runconfig.hpp"

#include <string>
#include <vector>

namespace gridcast {

struct RunOutcome {
    std::string run_dir;            // empty for ingest (nothing written)
    std::vector<std::string> files; // relative paths, ascending
};

// Executes the stages a subcommand needs: ingest, synth, profile, train,
// evaluate, peaks, zeroshot, report, or run (everything). Outputs land under
// <output.dir>/<run-id>/ next to a manifest.txt of content hashes; reruns
// with an identical configuration are byte-identical, whatever the thread
// count. `report` re-renders report.txt from an existing run directory.
RunOutcome run_pipeline(const RunConfig& cfg, const std::string& subcommand,
                        const std::string& original_config_text);

} // namespace gridcast
