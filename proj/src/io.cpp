#include "triqmc/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "triqmc/util.hpp"

namespace triqmc {

std::string provenance_header(const Provenance& p) {
    std::string h = str_f("# code_version=%s\n# manifest_hash=%016llx\n# seed=%llu\n",
                          kCodeVersion, (unsigned long long)p.manifest_hash,
                          (unsigned long long)p.seed);
    if (!p.extra.empty()) h += "# " + p.extra + "\n";
    return h;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read: " + path);
    return f;
}

}  // namespace

void write_csv(const std::string& path, const Provenance& p,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    auto f = open_out(path);
    f << provenance_header(p);
    for (size_t c = 0; c < columns.size(); ++c) f << (c ? "," : "") << columns[c];
    f << "\n";
    for (const auto& r : rows) {
        if (r.size() != columns.size())
            throw std::invalid_argument("write_csv: row width mismatch");
        for (size_t c = 0; c < r.size(); ++c)
            f << (c ? "," : "") << str_f("%.12g", r[c]);
        f << "\n";
    }
}

std::vector<double> CsvTable::col(const std::string& name) const {
    for (size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name) {
            std::vector<double> v(rows.size());
            for (size_t r = 0; r < rows.size(); ++r) v[r] = rows[r][c];
            return v;
        }
    throw std::runtime_error("csv column not found: " + name);
}

bool CsvTable::has(const std::string& name) const {
    for (const auto& c : columns)
        if (c == name) return true;
    return false;
}

CsvTable read_csv(const std::string& path) {
    auto f = open_in(path);
    CsvTable t;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string tok;
        if (t.columns.empty()) {
            while (std::getline(ss, tok, ',')) t.columns.push_back(tok);
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        if (row.size() != t.columns.size())
            throw std::runtime_error(path + ": ragged csv row");
        t.rows.push_back(std::move(row));
    }
    if (t.columns.empty()) throw std::runtime_error(path + ": empty csv");
    return t;
}

void write_scalar_bins(const std::string& path, const Provenance& p,
                       const std::map<std::string, BinnedSeries>& scalars) {
    auto f = open_out(path);
    f << provenance_header(p);
    f << "observable,bin,value\n";
    for (const auto& [k, s] : scalars)
        for (size_t b = 0; b < s.bins.size(); ++b)
            f << k << "," << b << "," << str_f("%.12g", s.bins[b]) << "\n";
}

void write_scalar_summary(const std::string& path, const Provenance& p,
                          const std::map<std::string, BinnedSeries>& scalars) {
    auto f = open_out(path);
    f << provenance_header(p);
    f << "observable,mean,error,bins,equilibrated\n";
    for (const auto& [k, s] : scalars)
        f << k << "," << str_f("%.12g,%.12g,%zu,%d", s.mean(), s.error(), s.bins.size(),
                               s.equilibrated() ? 1 : 0)
          << "\n";
}

void write_gtau_archive(const std::string& path, const Provenance& p, const GtauArchive& g) {
    auto f = open_out(path);
    f << provenance_header(p);
    f << "gtau-archive 1\n";
    f << str_f("beta %.17g\n", g.beta);
    f << "ntau " << g.taus.size() << "\ntaus";
    for (double t : g.taus) f << str_f(" %.17g", t);
    f << "\nchannels " << g.channels.size() << "\n";
    for (const auto& ch : g.channels) {
        f << "channel " << ch.obs << " " << ch.m << " " << ch.n << " bins "
          << ch.bins.size() << "\n";
        for (const auto& b : ch.bins) {
            if (b.size() != g.taus.size())
                throw std::invalid_argument("gtau archive: bin width mismatch");
            for (size_t k = 0; k < b.size(); ++k) f << (k ? " " : "") << str_f("%.17g", b[k]);
            f << "\n";
        }
    }
    f << "end\n";
}

GtauArchive read_gtau_archive(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    while (std::getline(f, line) && (line.empty() || line[0] == '#')) {}
    if (line != "gtau-archive 1") throw std::runtime_error(path + ": bad archive header");
    GtauArchive g;
    std::string tag;
    size_t ntau = 0, nch = 0;
    f >> tag >> g.beta;
    if (tag != "beta") throw std::runtime_error(path + ": expected beta");
    f >> tag >> ntau;
    if (tag != "ntau") throw std::runtime_error(path + ": expected ntau");
    f >> tag;
    g.taus.resize(ntau);
    for (auto& t : g.taus) f >> t;
    f >> tag >> nch;
    if (tag != "channels") throw std::runtime_error(path + ": expected channels");
    for (size_t c = 0; c < nch; ++c) {
        GtauChannel ch;
        size_t nb = 0;
        f >> tag >> ch.obs >> ch.m >> ch.n >> tag >> nb;
        ch.bins.assign(nb, std::vector<double>(ntau));
        for (auto& b : ch.bins)
            for (auto& v : b) f >> v;
        g.channels.push_back(std::move(ch));
    }
    f >> tag;
    if (tag != "end" || !f) throw std::runtime_error(path + ": truncated archive");
    return g;
}

void save_checkpoint(const std::string& path, const Provenance& p, const SseChain& chain) {
    auto f = open_out(path);
    f << provenance_header(p);
    chain.save(f);
}

void load_checkpoint(const std::string& path, uint64_t expect_hash, SseChain& chain) {
    auto f = open_in(path);
    std::string line;
    uint64_t h = 0;
    while (f.peek() == '#') {
        std::getline(f, line);
        unsigned long long v;
        if (sscanf(line.c_str(), "# manifest_hash=%llx", &v) == 1) h = v;
    }
    if (h != expect_hash)
        throw std::runtime_error(path + ": checkpoint belongs to a different manifest");
    chain.load(f);
}

void make_dirs(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

}  // namespace triqmc
