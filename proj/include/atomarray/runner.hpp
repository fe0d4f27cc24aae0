#pragma once

// Experiment dispatch: expands the configured scan product, runs each point,
// and writes figure-ready CSV plus run metadata.

#include <functional>
#include <iosfwd>

#include "atomarray/config.hpp"

namespace atomarray {

struct RunResult {
    RunRecord record;
    std::string csv;   // header + rows
    std::string json;  // run metadata
};

// Executes the configured experiment.  When `out_dir_override` is empty the
// config's output directory is used; results.csv / results.json and run.json
// are written there.  `progress` (optional) receives one line per row.
RunResult run(const RunConfig& config, const std::string& out_dir_override = "",
              const std::function<void(const std::string&)>& progress = {});

struct ValidationPoint {
    std::string label;
    long long dimension = 0;
    std::string route;  // "dense" or "krylov"
    double memory_mb = 0.0;
    std::vector<Warning> warnings;
};

struct ValidationReport {
    std::vector<ValidationPoint> points;
    std::string text() const;
};

// Dry run: dimension estimates, dense-vs-Krylov routing, memory estimate and
// regime-guard preview; no computation.
ValidationReport validate(const RunConfig& config);

// CSV header for each experiment (pinned by tests).
std::string csv_header(Experiment e);

}  // namespace atomarray
