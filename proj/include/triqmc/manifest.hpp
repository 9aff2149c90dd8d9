#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triqmc/model.hpp"
#include "triqmc/sac.hpp"
#include "triqmc/sse.hpp"

namespace triqmc {

// Experiment configuration, one "key = value" per line, # comments, versioned.
// Unknown and duplicate keys are hard errors with file:line positions.
struct Manifest {
    int version = 1;
    ModelParams model;

    int lx = 3, ly = 3;
    double beta = -1;          // -1: auto, beta = lx*ly
    bool sector_fixed = false;
    double sector_f = 0;

    long therm = 1000;
    long sweeps = 10000;
    int bins = 100;
    uint64_t seed = 1;
    int threads = 1;
    std::string outdir = "out";

    MeasureConfig measure;

    // scan: one key stepped over a value list, optionally tying a second key
    // to a fixed ratio of it (tie = tie_ratio * scanned value)
    std::string scan_key;
    std::vector<double> scan_values;
    std::string tie_key;
    double tie_ratio = 0;

    SacConfig sac;
    std::string sac_archive;

    int rk_worms = 4;  // worms between cover measurements

    std::string raw_text;      // exact file contents, hashed for provenance
    std::string source_name;

    double beta_or_auto() const { return beta > 0 ? beta : (double)(lx * ly); }
    uint64_t hash() const;
};

Manifest parse_manifest_text(const std::string& text, const std::string& name);
Manifest parse_manifest_file(const std::string& path);

}  // namespace triqmc
