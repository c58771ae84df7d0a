#pragma once

#include <map>
#include <string>

#include "lacuna/config.hpp"
#include "lacuna/eval.hpp"
#include "lacuna/manifest.hpp"

namespace lacuna {

// Summary of one full pipeline run. Artifact digests are keyed by file name
// relative to the output directory; two runs with the same config and
// inputs produce identical digest maps.
struct PipelineResult {
    std::string output_dir;
    std::map<std::string, std::string> artifact_digests;
    std::map<std::string, double> method_accuracy;  // method name -> top-1 accuracy
    double ensemble_top1 = 0.0;
    double ensemble_topk = 0.0;
    double baseline_accuracy = 0.0;
    std::size_t failures = 0;
};

// Executes ingest -> split -> mask -> train -> predict (one run per
// configured method) -> ensemble -> evaluate, writing every artifact plus
// manifest.json under cfg.output_dir.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& config_path,
                            const std::string& command_line);

}  // namespace lacuna
