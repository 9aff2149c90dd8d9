#include "triqmc/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "triqmc/util.hpp"

namespace triqmc {

uint64_t Manifest::hash() const { return fnv1a(raw_text.data(), raw_text.size()); }

namespace {

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw std::runtime_error(str_f("%s:%d: %s", name.c_str(), line, msg.c_str()));
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

double to_f(const std::string& name, int line, const std::string& v) {
    size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (...) {
        fail(name, line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) fail(name, line, "trailing junk in number '" + v + "'");
    return x;
}

long to_i(const std::string& name, int line, const std::string& v) {
    size_t pos = 0;
    long x;
    try {
        x = std::stol(v, &pos);
    } catch (...) {
        fail(name, line, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) fail(name, line, "trailing junk in integer '" + v + "'");
    return x;
}

const std::set<std::string> kScanKeys = {"omega", "u1", "u2", "u3", "sector", "beta"};

}  // namespace

Manifest parse_manifest_text(const std::string& text, const std::string& name) {
    Manifest m;
    m.raw_text = text;
    m.source_name = name;
    std::set<std::string> seen;
    bool version_seen = false;

    std::stringstream ss(text);
    std::string line;
    int ln = 0;
    while (std::getline(ss, line)) {
        ++ln;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos) fail(name, ln, "expected 'key = value'");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail(name, ln, "empty key");
        if (val.empty()) fail(name, ln, "empty value for '" + key + "'");
        if (!seen.insert(key).second) fail(name, ln, "duplicate key '" + key + "'");

        if (key == "version") {
            long v = to_i(name, ln, val);
            if (v != 1) fail(name, ln, "unsupported manifest version " + val);
            m.version = (int)v;
            version_seen = true;
        } else if (key == "profile") {
            if (val == "explicit") m.model.profile = Profile::Explicit;
            else if (val == "vdw") m.model.profile = Profile::VdW;
            else if (val == "dressed") m.model.profile = Profile::Dressed;
            else fail(name, ln, "profile must be explicit|vdw|dressed");
        } else if (key == "omega") {
            m.model.omega = to_f(name, ln, val);
        } else if (key == "u1") {
            m.model.u[0] = to_f(name, ln, val);
        } else if (key == "u2") {
            m.model.u[1] = to_f(name, ln, val);
        } else if (key == "u3") {
            m.model.u[2] = to_f(name, ln, val);
        } else if (key == "c6") {
            m.model.c6 = to_f(name, ln, val);
        } else if (key == "spacing") {
            m.model.spacing = to_f(name, ln, val);
        } else if (key == "dressed_omega") {
            m.model.dressed_omega = to_f(name, ln, val);
        } else if (key == "dressed_delta") {
            m.model.dressed_delta = to_f(name, ln, val);
        } else if (key == "trunc_shell") {
            long v = to_i(name, ln, val);
            if (v < 1 || v > 3) fail(name, ln, "trunc_shell must be 1..3");
            m.model.trunc_shell = (int)v;
        } else if (key == "l") {
            long v = to_i(name, ln, val);
            if (v < 3) fail(name, ln, "l must be >= 3");
            m.lx = m.ly = (int)v;
        } else if (key == "lx") {
            long v = to_i(name, ln, val);
            if (v < 3) fail(name, ln, "lx must be >= 3");
            m.lx = (int)v;
        } else if (key == "ly") {
            long v = to_i(name, ln, val);
            if (v < 3) fail(name, ln, "ly must be >= 3");
            m.ly = (int)v;
        } else if (key == "beta") {
            if (val == "auto") m.beta = -1;
            else {
                m.beta = to_f(name, ln, val);
                if (m.beta <= 0) fail(name, ln, "beta must be positive or auto");
            }
        } else if (key == "sector") {
            if (val == "free") m.sector_fixed = false;
            else {
                m.sector_fixed = true;
                m.sector_f = to_f(name, ln, val);
            }
        } else if (key == "therm") {
            m.therm = to_i(name, ln, val);
            if (m.therm < 0) fail(name, ln, "therm must be >= 0");
        } else if (key == "sweeps") {
            m.sweeps = to_i(name, ln, val);
            if (m.sweeps < 1) fail(name, ln, "sweeps must be >= 1");
        } else if (key == "bins") {
            long v = to_i(name, ln, val);
            if (v < 1) fail(name, ln, "bins must be >= 1");
            m.bins = (int)v;
        } else if (key == "seed") {
            m.seed = (uint64_t)to_i(name, ln, val);
        } else if (key == "threads") {
            long v = to_i(name, ln, val);
            if (v < 1) fail(name, ln, "threads must be >= 1");
            m.threads = (int)v;
        } else if (key == "outdir") {
            m.outdir = val;
        } else if (key == "measure") {
            for (const std::string& t : split(val, ',')) {
                if (t == "energy") m.measure.energy = true;
                else if (t == "flux") m.measure.flux = true;
                else if (t == "sq") m.measure.named_sq = true;
                else if (t == "sgrid") m.measure.sgrid = true;
                else if (t == "psir") m.measure.psir = true;
                else if (t == "corr") m.measure.corr = true;
                else if (t == "violation") m.measure.violation = true;
                else if (t == "gtau") m.measure.gtau.enabled = true;
                else fail(name, ln, "unknown measurer '" + t + "'");
            }
        } else if (key == "psir_every") {
            long v = to_i(name, ln, val);
            if (v < 1) fail(name, ln, "psir_every must be >= 1");
            m.measure.psir_every = (int)v;
        } else if (key == "gtau_momenta") {
            for (const std::string& t : split(val, ';')) {
                auto mn = split(t, ',');
                if (mn.size() != 2) fail(name, ln, "gtau_momenta entries are 'm,n'");
                m.measure.gtau.momenta.push_back(
                    {(int)to_i(name, ln, mn[0]), (int)to_i(name, ln, mn[1])});
            }
        } else if (key == "gtau_ntau") {
            m.measure.gtau.ntau = (int)to_i(name, ln, val);
            if (m.measure.gtau.ntau < 2) fail(name, ln, "gtau_ntau must be >= 2");
        } else if (key == "gtau_nref") {
            m.measure.gtau.nref = (int)to_i(name, ln, val);
            if (m.measure.gtau.nref < 1) fail(name, ln, "gtau_nref must be >= 1");
        } else if (key == "gtau_every") {
            m.measure.gtau.every = (int)to_i(name, ln, val);
            if (m.measure.gtau.every < 1) fail(name, ln, "gtau_every must be >= 1");
        } else if (key == "gtau_channels") {
            m.measure.gtau.density = m.measure.gtau.electric = false;
            for (const std::string& t : split(val, ',')) {
                if (t == "density") m.measure.gtau.density = true;
                else if (t == "electric") m.measure.gtau.electric = true;
                else fail(name, ln, "unknown gtau channel '" + t + "'");
            }
        } else if (key == "scan_key") {
            if (!kScanKeys.count(val)) fail(name, ln, "scan_key '" + val + "' not scannable");
            m.scan_key = val;
        } else if (key == "scan_values") {
            for (const std::string& t : split(val, ','))
                m.scan_values.push_back(to_f(name, ln, t));
            if (m.scan_values.empty()) fail(name, ln, "scan_values is empty");
        } else if (key == "tie_key") {
            if (!kScanKeys.count(val) || val == "sector" || val == "beta")
                fail(name, ln, "tie_key must be a coupling");
            m.tie_key = val;
        } else if (key == "tie_ratio") {
            m.tie_ratio = to_f(name, ln, val);
        } else if (key == "rk_worms") {
            m.rk_worms = (int)to_i(name, ln, val);
            if (m.rk_worms < 1) fail(name, ln, "rk_worms must be >= 1");
        } else if (key == "sac_archive") {
            m.sac_archive = val;
        } else if (key == "sac_ndelta") {
            m.sac.n_delta = (int)to_i(name, ln, val);
        } else if (key == "sac_grid") {
            m.sac.grid_size = (int)to_i(name, ln, val);
        } else if (key == "sac_omega_max") {
            m.sac.omega_max = to_f(name, ln, val);
        } else if (key == "sac_theta0") {
            m.sac.theta0 = to_f(name, ln, val);
        } else if (key == "sac_anneal_ratio") {
            m.sac.anneal_ratio = to_f(name, ln, val);
            if (m.sac.anneal_ratio <= 1) fail(name, ln, "sac_anneal_ratio must be > 1");
        } else if (key == "sac_sweeps_per_stage") {
            m.sac.sweeps_per_stage = (int)to_i(name, ln, val);
        } else if (key == "sac_stages") {
            m.sac.max_stages = (int)to_i(name, ln, val);
        } else if (key == "sac_a") {
            m.sac.a_criterion = to_f(name, ln, val);
        } else if (key == "sac_eig_floor") {
            m.sac.eig_floor = to_f(name, ln, val);
        } else if (key == "sac_avg_sweeps") {
            m.sac.avg_sweeps = (int)to_i(name, ln, val);
        } else if (key == "sac_out_bins") {
            m.sac.out_bins = (int)to_i(name, ln, val);
        } else if (key == "sac_seed") {
            m.sac.seed = (uint64_t)to_i(name, ln, val);
        } else {
            fail(name, ln, "unknown key '" + key + "'");
        }
    }

    if (!version_seen) fail(name, 1, "missing 'version' key");
    if (m.sweeps % m.bins != 0)
        fail(name, 1, str_f("sweeps (%ld) must be a multiple of bins (%d)", m.sweeps, m.bins));
    if (!m.scan_key.empty() && m.scan_values.empty())
        fail(name, 1, "scan_key given without scan_values");
    if (!m.tie_key.empty() && m.scan_key.empty())
        fail(name, 1, "tie_key given without scan_key");
    if (m.measure.gtau.enabled && m.measure.gtau.momenta.empty())
        fail(name, 1, "gtau measurer needs gtau_momenta");
    return m;
}

Manifest parse_manifest_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open manifest: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_manifest_text(buf.str(), path);
}

}  // namespace triqmc
