#include "triqmc/gauge.hpp"

#include <cmath>
#include <stdexcept>

namespace triqmc {

namespace {
const cplx kOmega = std::polar(1.0, 2.0 * M_PI / 3.0);  // e^{i 2pi/3}

int sublattice(const Lattice& lat, int i) {
    return (lat.x_of(i) + 2 * lat.y_of(i)) % 3;
}
}  // namespace

std::vector<uint8_t> frustrated_bonds(const SpinConfig& cfg, const Lattice& lat) {
    std::vector<uint8_t> m(3 * lat.N);
    for (int b = 0; b < 3 * lat.N; ++b)
        m[b] = cfg[lat.bonds[0][b].i] == cfg[lat.bonds[0][b].j];
    return m;
}

ElectricField electric_field(const SpinConfig& cfg, const Lattice& lat) {
    ElectricField e(3 * lat.N);
    for (int l = 0; l < 3 * lat.N; ++l) {
        const Bond& b = lat.bonds[0][lat.links[l].bond];
        e[l] = (cfg[b.i] == cfg[b.j]) ? 2 : -1;
    }
    return e;
}

std::vector<int> divergence(const ElectricField& e, const Lattice& lat) {
    std::vector<int> q(2 * lat.N, 0);
    for (int t = 0; t < lat.N; ++t)
        q[t] = e[3 * t] + e[3 * t + 1] + e[3 * t + 2];
    for (int y = 0; y < lat.Ly; ++y)
        for (int x = 0; x < lat.Lx; ++x) {
            int t = lat.site(x, y);
            q[lat.N + t] = -(e[3 * t + 2] + e[3 * lat.site(x + 1, y) + 1] +
                             e[3 * lat.site(x, y + 1) + 0]);
        }
    return q;
}

int count_violating_triangles(const SpinConfig& cfg, const Lattice& lat) {
    int bad = 0;
    auto one_frustrated = [&](const std::array<int, 3>& t) {
        int f = (cfg[t[0]] == cfg[t[1]]) + (cfg[t[0]] == cfg[t[2]]) + (cfg[t[1]] == cfg[t[2]]);
        return f == 1;
    };
    for (int t = 0; t < lat.N; ++t) {
        if (!one_frustrated(lat.tri_up[t])) ++bad;
        if (!one_frustrated(lat.tri_dn[t])) ++bad;
    }
    return bad;
}

bool charge_free(const SpinConfig& cfg, const Lattice& lat) {
    return count_violating_triangles(cfg, lat) == 0;
}

WindingNumbers winding_flux(const ElectricField& e, const Lattice& lat) {
    WindingNumbers w;
    for (int x = 0; x < lat.Lx; ++x) w.Fx += e[3 * lat.site(x, 0) + 0];
    for (int y = 0; y < lat.Ly; ++y) w.Fy += e[3 * lat.site(0, y) + 1];
    return w;
}

WindingNumbers winding_flux(const SpinConfig& cfg, const Lattice& lat) {
    WindingNumbers w;
    for (int x = 0; x < lat.Lx; ++x)
        w.Fx += (cfg[lat.site(x, 0)] == cfg[lat.site(x + 1, 0)]) ? 2 : -1;
    for (int y = 0; y < lat.Ly; ++y)
        w.Fy += (cfg[lat.site(0, y)] == cfg[lat.site(0, y + 1)]) ? 2 : -1;
    return w;
}

DimerCoverResult dimer_cover(const ElectricField& e, const Lattice& lat) {
    DimerCoverResult r;
    r.occ.resize(3 * lat.N);
    for (int l = 0; l < 3 * lat.N; ++l) r.occ[l] = e[l] > 0;
    std::vector<int> deg(2 * lat.N, 0);
    for (int t = 0; t < lat.N; ++t)
        for (int c = 0; c < 3; ++c)
            if (r.occ[3 * t + c]) {
                ++deg[t];
                ++deg[lat.N + lat.links[3 * t + c].b];
            }
    for (int v = 0; v < 2 * lat.N; ++v)
        if (deg[v] != 1) r.bad_vertices.push_back(v);
    r.ok = r.bad_vertices.empty();
    return r;
}

HeightField height_field(const std::vector<uint8_t>& occ, const Lattice& lat) {
    HeightField hf;
    hf.h.assign(lat.N, 0);

    // step deltas: crossing the link of bond (r -> r+a1) / (r -> r+a2) /
    // (r -> r+a1-a2); signs fixed so off_x = Fx and off_y = -Fy
    auto d_a1 = [&](int bond) { return occ[lat.bond_to_link[bond]] ? +2 : -1; };
    auto d_a2 = [&](int bond) { return occ[lat.bond_to_link[bond]] ? -2 : +1; };

    WindingNumbers w;
    for (int x = 0; x < lat.Lx; ++x) w.Fx += occ[3 * lat.site(x, 0) + 0] ? 2 : -1;
    for (int y = 0; y < lat.Ly; ++y) w.Fy += occ[3 * lat.site(0, y) + 1] ? 2 : -1;
    hf.off_x = w.Fx;
    hf.off_y = -w.Fy;

    // spanning tree: up column 0, then along +a1 in each row (no wraps)
    for (int y = 1; y < lat.Ly; ++y)
        hf.h[lat.site(0, y)] = hf.h[lat.site(0, y - 1)] + d_a2(3 * lat.site(0, y - 1) + 1);
    for (int y = 0; y < lat.Ly; ++y)
        for (int x = 1; x < lat.Lx; ++x)
            hf.h[lat.site(x, y)] = hf.h[lat.site(x - 1, y)] + d_a1(3 * lat.site(x - 1, y) + 0);

    // verify every adjacency, folding in the winding offsets at the seams
    hf.ok = true;
    for (int y = 0; y < lat.Ly && hf.ok; ++y)
        for (int x = 0; x < lat.Lx && hf.ok; ++x) {
            int i = lat.site(x, y);
            {  // +a1
                int j = lat.site(x + 1, y);
                int rhs = hf.h[i] + d_a1(3 * i + 0) - (x + 1 == lat.Lx ? hf.off_x : 0);
                if (hf.h[j] != rhs) hf.ok = false;
            }
            {  // +a2
                int j = lat.site(x, y + 1);
                int rhs = hf.h[i] + d_a2(3 * i + 1) - (y + 1 == lat.Ly ? hf.off_y : 0);
                if (hf.h[j] != rhs) hf.ok = false;
            }
            {  // +a1-a2: crossing the link of bond (r+a1-a2 -> r)+... = bond 3*j+2
                int j = lat.site(x + 1, y - 1);
                int d = occ[lat.bond_to_link[3 * j + 2]] ? -2 : +1;
                int rhs = hf.h[i] + d - (x + 1 == lat.Lx ? hf.off_x : 0) +
                          (y == 0 ? hf.off_y : 0);
                if (hf.h[j] != rhs) hf.ok = false;
            }
        }
    return hf;
}

cplx psi_R(const SpinConfig& cfg, const Lattice& lat) {
    cplx s = 0;
    for (int i = 0; i < lat.N; ++i)
        s += (cfg[i] - 0.5) * std::polar(1.0, 2.0 * M_PI / 3.0 * sublattice(lat, i));
    return 3.0 * s / (double)lat.N;
}

cplx psi_E_at(const ElectricField& e, const Lattice&, int t) {
    return (double)e[3 * t + 0] + (double)e[3 * t + 1] * std::conj(kOmega) +
           (double)e[3 * t + 2] * kOmega;
}

cplx psi_E(const ElectricField& e, const Lattice& lat) {
    cplx s = 0;
    for (int t = 0; t < lat.N; ++t) s += psi_E_at(e, lat, t);
    return s / (double)lat.N;
}

std::vector<double> structure_factor_grid(const SpinConfig& cfg, const Lattice& lat) {
    // row-column DFT of s~ = n - 1/2 in index space; q(m,n) phases reduce to
    // exp(2pi i (mx/Lx + ny/Ly)) exactly
    std::vector<cplx> row(lat.Lx * lat.Ly);  // A(m, y)
    for (int y = 0; y < lat.Ly; ++y)
        for (int m = 0; m < lat.Lx; ++m) {
            cplx a = 0;
            for (int x = 0; x < lat.Lx; ++x)
                a += (cfg[lat.site(x, y)] - 0.5) *
                     std::polar(1.0, 2.0 * M_PI * m * x / lat.Lx);
            row[m + lat.Lx * y] = a;
        }
    std::vector<double> s(lat.N);
    for (int n = 0; n < lat.Ly; ++n)
        for (int m = 0; m < lat.Lx; ++m) {
            cplx a = 0;
            for (int y = 0; y < lat.Ly; ++y)
                a += row[m + lat.Lx * y] * std::polar(1.0, 2.0 * M_PI * n * y / lat.Ly);
            s[m + lat.Lx * n] = std::norm(a) / lat.N;
        }
    return s;
}

double structure_factor_at(const SpinConfig& cfg, const Lattice& lat, Vec2 q) {
    cplx a = 0;
    for (int i = 0; i < lat.N; ++i) {
        Vec2 r = lat.pos(i);
        a += (cfg[i] - 0.5) * std::polar(1.0, q.x * r.x + q.y * r.y);
    }
    return std::norm(a) / lat.N;
}

std::vector<cplx> corr_E_a1(const ElectricField& e, const Lattice& lat) {
    int dmax = lat.Lx / 2;
    std::vector<cplx> c(dmax + 1, 0.0);
    std::vector<cplx> psi(lat.N);
    for (int t = 0; t < lat.N; ++t) psi[t] = psi_E_at(e, lat, t);
    for (int y = 0; y < lat.Ly; ++y)
        for (int x = 0; x < lat.Lx; ++x)
            for (int d = 0; d <= dmax; ++d)
                c[d] += std::conj(psi[lat.site(x, y)]) * psi[lat.site(x + d, y)];
    for (auto& v : c) v /= (double)lat.N;
    return c;
}

std::vector<cplx> corr_R_a1(const SpinConfig& cfg, const Lattice& lat) {
    int dmax = lat.Lx / 2;
    std::vector<cplx> c(dmax + 1, 0.0);
    std::vector<cplx> psi(lat.N), cell(lat.N);
    for (int i = 0; i < lat.N; ++i)
        psi[i] = (cfg[i] - 0.5) * std::polar(1.0, 2.0 * M_PI / 3.0 * sublattice(lat, i));
    // summing three consecutive sites along a1 annihilates the uniform and
    // anti-clock harmonics, leaving a pure clock amplitude: the perfect
    // pattern gives cell == 1 everywhere, so |C_R| has no sublattice ripple
    for (int y = 0; y < lat.Ly; ++y)
        for (int x = 0; x < lat.Lx; ++x)
            cell[lat.site(x, y)] =
                psi[lat.site(x, y)] + psi[lat.site(x + 1, y)] + psi[lat.site(x + 2, y)];
    for (int y = 0; y < lat.Ly; ++y)
        for (int x = 0; x < lat.Lx; ++x)
            for (int d = 0; d <= dmax; ++d)
                c[d] += std::conj(cell[lat.site(x, y)]) * cell[lat.site(x + d, y)];
    for (auto& v : c) v /= (double)lat.N;
    return c;
}

Vec2 q_of_f(double f) {
    if (f <= 0.0) return {4.0 * M_PI / 3.0, 0.0};
    return {(2.0 - f) * M_PI / 3.0, (4.0 + f) * M_PI / (3.0 * std::sqrt(3.0))};
}

std::vector<Vec2> q_of_f_orbit(double f) {
    Vec2 q = q_of_f(f);
    return {{q.x, q.y}, {-q.x, q.y}, {q.x, -q.y}, {-q.x, -q.y}};
}

SpinConfig clock_config(const Lattice& lat) {
    if (lat.Lx % 3 || lat.Ly % 3)
        throw std::invalid_argument("clock_config: 3|L required");
    SpinConfig c(lat.N);
    for (int i = 0; i < lat.N; ++i) c[i] = sublattice(lat, i) == 0;
    return c;
}

SpinConfig stripe_config(const Lattice& lat) {
    if (lat.Ly % 2) throw std::invalid_argument("stripe_config: 2|Ly required");
    SpinConfig c(lat.N);
    for (int i = 0; i < lat.N; ++i) c[i] = lat.y_of(i) % 2;
    return c;
}

SpinConfig vd_word_config(const Lattice& lat, int nv) {
    if (lat.Ly % 2) throw std::invalid_argument("vd_word_config: 2|Ly required");
    int nd = lat.Lx - nv;
    if (nv < 0 || nd < 0 || nd % 2)
        throw std::invalid_argument("vd_word_config: parity-invalid word");
    SpinConfig c(lat.N);
    // column 0 alternates; V column copies, D column shifts by +a2
    int shift = 0;
    for (int x = 0; x < lat.Lx; ++x) {
        for (int y = 0; y < lat.Ly; ++y) c[lat.site(x, y)] = (y + shift) % 2;
        // spread D columns evenly (Bresenham)
        bool is_d = (x + 1) * nd / lat.Lx > x * nd / lat.Lx;
        if (is_d) ++shift;
    }
    return c;
}

bool sector_reachable(const Lattice& lat, double f) {
    double nvf = lat.Lx * (f + 1.0) / 3.0;
    int nv = (int)std::lround(nvf);
    if (std::fabs(nvf - nv) > 1e-9) return false;
    if (nv < 0 || nv > lat.Lx || (lat.Lx - nv) % 2) return false;
    if (f == 0.0 && lat.Lx % 3 == 0 && lat.Ly % 3 == 0) return true;  // clock reference
    return lat.Ly % 2 == 0;                                          // word reference
}

SpinConfig sector_reference(const Lattice& lat, double f) {
    if (f == 0.0 && lat.Lx % 3 == 0 && lat.Ly % 3 == 0) return clock_config(lat);
    double nvf = lat.Lx * (f + 1.0) / 3.0;
    int nv = (int)std::lround(nvf);
    if (std::fabs(nvf - nv) > 1e-9 || nv < 0 || nv > lat.Lx || (lat.Lx - nv) % 2)
        throw std::invalid_argument(str_f(
            "sector_reference: f=%g not reachable by a periodic spin state on Lx=%d "
            "(needs nv = Lx(f+1)/3 integer with Lx-nv even; spin sectors step by 6/Lx)",
            f, lat.Lx));
    if (nv == lat.Lx) return stripe_config(lat);
    return vd_word_config(lat, nv);
}

std::optional<SpinConfig> spins_from_cover(const std::vector<uint8_t>& occ, const Lattice& lat) {
    SpinConfig cfg(lat.N, 2);
    std::vector<int> stack{0};
    cfg[0] = 1;
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        // neighbors through the three bonds rooted here and the three rooted elsewhere
        for (int c = 0; c < 3; ++c) {
            int b = 3 * i + c;
            const Bond& bd = lat.bonds[0][b];
            int j = bd.j;
            uint8_t want = occ[lat.bond_to_link[b]] ? cfg[i] : (uint8_t)(1 - cfg[i]);
            if (cfg[j] == 2) {
                cfg[j] = want;
                stack.push_back(j);
            } else if (cfg[j] != want) {
                return std::nullopt;
            }
        }
        int x = lat.x_of(i), y = lat.y_of(i);
        const int rev[3][2] = {{-1, 0}, {0, -1}, {1, -1}};
        for (int c = 0; c < 3; ++c) {
            int j = lat.site(x + rev[c][0], y + rev[c][1]);
            int b = 3 * j + c;
            uint8_t want = occ[lat.bond_to_link[b]] ? cfg[i] : (uint8_t)(1 - cfg[i]);
            if (cfg[j] == 2) {
                cfg[j] = want;
                stack.push_back(j);
            } else if (cfg[j] != want) {
                return std::nullopt;
            }
        }
    }
    return cfg;
}

}  // namespace triqmc
