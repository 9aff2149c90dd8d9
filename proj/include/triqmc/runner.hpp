#pragma once

#include <string>

#include "triqmc/dimer.hpp"
#include "triqmc/manifest.hpp"
#include "triqmc/sse.hpp"

namespace triqmc {

struct RunOutput {
    SseRunResult res;
    double energy = 0, energy_err = 0;
    std::string dir;
};

// one chain: build, lock sector if requested, run, optionally write the
// observable tables, correlators, imaginary-time archive and checkpoint
RunOutput run_single(const Manifest& m, uint64_t stream_id, const std::string& dir,
                     bool write_files);

// scan_key stepped over scan_values, points distributed over m.threads
// workers; per-point directories plus a combined summary table
void run_scan(const Manifest& m);

// analytic continuation of every channel in the archive, parallel across
// channels; writes one spectrum table per channel plus a peak summary
void run_sac(const Manifest& m);

// dense-spectrum reference tables for the manifest's model and lattice
void oracle_ed(const Manifest& m);

// dimer-cover sampling with correlator tables and power-law fit report
RkRunResult oracle_rk(const Manifest& m, bool write_files);

}  // namespace triqmc
