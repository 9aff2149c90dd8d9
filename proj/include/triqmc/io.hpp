#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "triqmc/binning.hpp"
#include "triqmc/sse.hpp"

namespace triqmc {

// every output file opens with these comment lines
struct Provenance {
    uint64_t manifest_hash = 0;
    uint64_t seed = 0;
    std::string extra;  // one optional context line
};

std::string provenance_header(const Provenance& p);

void write_csv(const std::string& path, const Provenance& p,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<double> col(const std::string& name) const;
    bool has(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

// per-bin values in long form (observable,bin,value) and a mean/error summary
void write_scalar_bins(const std::string& path, const Provenance& p,
                       const std::map<std::string, BinnedSeries>& scalars);
void write_scalar_summary(const std::string& path, const Provenance& p,
                          const std::map<std::string, BinnedSeries>& scalars);

void write_gtau_archive(const std::string& path, const Provenance& p, const GtauArchive& g);
GtauArchive read_gtau_archive(const std::string& path);

void save_checkpoint(const std::string& path, const Provenance& p, const SseChain& chain);
// verifies the stored manifest hash, then restores the chain state
void load_checkpoint(const std::string& path, uint64_t expect_hash, SseChain& chain);

void make_dirs(const std::string& path);

}  // namespace triqmc
