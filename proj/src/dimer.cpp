#include "triqmc/dimer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace triqmc {

bool cover_valid(const DimerOcc& occ, const Lattice& lat) {
    if ((int)occ.size() != 3 * lat.N) return false;
    std::vector<int> da(lat.N, 0), db(lat.N, 0);
    for (int l = 0; l < 3 * lat.N; ++l)
        if (occ[l]) {
            ++da[lat.links[l].a];
            ++db[lat.links[l].b];
        }
    for (int t = 0; t < lat.N; ++t)
        if (da[t] != 1 || db[t] != 1) return false;
    return true;
}

ElectricField cover_field(const DimerOcc& occ, const Lattice& lat) {
    ElectricField e(3 * lat.N, -1);
    for (int l = 0; l < 3 * lat.N; ++l)
        if (occ[l]) e[lat.links[l].bond] = 2;
    return e;
}

WindingNumbers cover_flux(const DimerOcc& occ, const Lattice& lat) {
    WindingNumbers w;
    for (int x = 0; x < lat.Lx; ++x)
        w.Fx += occ[3 * lat.site(x, 0) + 0] ? 2 : -1;
    for (int y = 0; y < lat.Ly; ++y)
        w.Fy += occ[3 * lat.site(0, y) + 1] ? 2 : -1;
    return w;
}

std::vector<std::vector<int>> enumerate_matchings(
    int na, int nb, const std::vector<std::array<int, 2>>& edges) {
    std::vector<std::vector<int>> inc(na);
    for (size_t e = 0; e < edges.size(); ++e) inc[edges[e][0]].push_back((int)e);
    std::vector<std::vector<int>> out;
    std::vector<uint8_t> used_b(nb, 0);
    std::vector<int> pick;
    auto rec = [&](auto&& self, int a) -> void {
        if (a == na) {
            out.push_back(pick);
            return;
        }
        for (int e : inc[a]) {
            int b = edges[e][1];
            if (used_b[b]) continue;
            used_b[b] = 1;
            pick.push_back(e);
            self(self, a + 1);
            pick.pop_back();
            used_b[b] = 0;
        }
    };
    rec(rec, 0);
    return out;
}

CoverEnumeration enumerate_covers(const Lattice& lat) {
    if (2 * lat.N > 24)
        throw std::invalid_argument("enumerate_covers: more than 24 dual vertices");
    std::vector<std::array<int, 2>> edges(3 * lat.N);
    for (int l = 0; l < 3 * lat.N; ++l) edges[l] = {lat.links[l].a, lat.links[l].b};
    CoverEnumeration ce;
    for (const auto& m : enumerate_matchings(lat.N, lat.N, edges)) {
        DimerOcc occ(3 * lat.N, 0);
        for (int l : m) occ[l] = 1;
        WindingNumbers w = cover_flux(occ, lat);
        ce.by_sector[{w.Fx, w.Fy}].push_back((int)ce.covers.size());
        ce.covers.push_back(std::move(occ));
    }
    return ce;
}

double matching_count_ryser(int na, int nb, const std::vector<std::array<int, 2>>& edges) {
    if (na != nb) return 0.0;
    if (na > 24) throw std::invalid_argument("matching_count_ryser: too large");
    std::vector<uint32_t> mask(na, 0);
    for (const auto& e : edges) mask[e[0]] |= 1u << e[1];
    // perm = (-1)^n sum_S (-1)^|S| prod_i |row_i & S|
    double total = 0;
    const uint32_t full = (na == 32) ? ~0u : ((1u << na) - 1);
    for (uint32_t s = 1; s <= full; ++s) {
        double prod = 1;
        for (int i = 0; i < na && prod != 0; ++i)
            prod *= __builtin_popcount(mask[i] & s);
        if (prod == 0) continue;
        int par = (na - __builtin_popcount(s)) & 1;
        total += par ? -prod : prod;
    }
    return total;
}

double matching_count_ryser(const Lattice& lat) {
    std::vector<std::array<int, 2>> edges(3 * lat.N);
    for (int l = 0; l < 3 * lat.N; ++l) edges[l] = {lat.links[l].a, lat.links[l].b};
    return matching_count_ryser(lat.N, lat.N, edges);
}

WormSampler::WormSampler(const Lattice& lat, Rng rng, SectorPolicy pol, const DimerOcc& init)
    : lat_(lat), rng_(rng), pol_(pol), occ_(init) {
    if (!cover_valid(occ_, lat))
        throw std::invalid_argument("WormSampler: initial state is not a perfect matching");
    match_a_.assign(lat.N, -1);
    match_b_.assign(lat.N, -1);
    for (int l = 0; l < 3 * lat.N; ++l)
        if (occ_[l]) {
            match_a_[lat.links[l].a] = l;
            match_b_[lat.links[l].b] = l;
        }
    links_b_.assign(lat.N, {-1, -1, -1});
    std::vector<int> fill(lat.N, 0);
    for (int l = 0; l < 3 * lat.N; ++l) links_b_[lat.links[l].b][fill[lat.links[l].b]++] = l;
    cut_.assign(3 * lat.N, 0);
    for (int l = 0; l < 3 * lat.N; ++l) {
        int b = lat.links[l].bond, s = b / 3, c = b % 3;
        if (c == 0 && lat.y_of(s) == 0) cut_[l] = 1;
        if (c == 1 && lat.x_of(s) == 0) cut_[l] = 2;
    }
    WindingNumbers w = cover_flux(occ_, lat);
    fx_ = w.Fx;
    fy_ = w.Fy;
}

void WormSampler::toggle(int l) {
    int d = occ_[l] ? -3 : 3;
    occ_[l] ^= 1;
    if (cut_[l] == 1) fx_ += d;
    else if (cut_[l] == 2) fy_ += d;
}

long WormSampler::step() {
    ++attempted_;
    const int fx0 = fx_, fy0 = fy_;
    if (pol_ == SectorPolicy::Fixed) {
        occ_snap_ = occ_;
        ma_snap_ = match_a_;
        mb_snap_ = match_b_;
    }
    int tail = (int)rng_.below(lat_.N);
    int l0 = match_a_[tail];
    int head = lat_.links[l0].b;
    toggle(l0);
    match_a_[tail] = -1;
    match_b_[head] = -1;

    long len = 0;
    for (;;) {
        ++len;
        int l = links_b_[head][rng_.below(3)];
        int a = lat_.links[l].a;
        if (a == tail) {
            toggle(l);
            match_a_[tail] = l;
            match_b_[head] = l;
            break;
        }
        int lnext = match_a_[a];
        toggle(l);
        match_a_[a] = l;
        match_b_[head] = l;
        toggle(lnext);
        head = lat_.links[lnext].b;
        match_b_[head] = -1;
    }

    // a closed worm path is a loop on the honeycomb: contractible loops leave
    // the fluxes alone, winding loops move them by multiples of 3
    if ((fx_ - fx0) % 3 != 0 || (fy_ - fy0) % 3 != 0)
        throw std::logic_error("WormSampler: flux step not a multiple of 3");
    if (pol_ == SectorPolicy::Fixed && (fx_ != fx0 || fy_ != fy0)) {
        occ_ = occ_snap_;
        match_a_ = ma_snap_;
        match_b_ = mb_snap_;
        fx_ = fx0;
        fy_ = fy0;
        return 0;
    }
    ++accepted_;
    return len;
}

bool WormSampler::valid() const {
    if (!cover_valid(occ_, lat_)) return false;
    WindingNumbers w = cover_flux(occ_, lat_);
    return w.Fx == fx_ && w.Fy == fy_;
}

RkCorrTable rk_correlators(const std::vector<std::vector<cplx>>& ce_bins,
                           const std::vector<std::vector<cplx>>& cr_bins) {
    auto fold = [](const std::vector<std::vector<cplx>>& bins, std::vector<double>& val,
                   std::vector<double>& err) {
        size_t nb = bins.size();
        if (nb == 0) return;
        size_t d = bins[0].size();
        std::vector<cplx> tot(d, 0.0);
        for (const auto& b : bins)
            for (size_t k = 0; k < d; ++k) tot[k] += b[k];
        val.resize(d);
        err.assign(d, 0.0);
        if (nb < 2) {
            for (size_t k = 0; k < d; ++k) val[k] = std::abs(tot[k] / (double)nb);
            return;
        }
        // jackknife of |mean| per distance
        std::vector<double> theta(nb);
        for (size_t k = 0; k < d; ++k) {
            double tm = 0;
            for (size_t i = 0; i < nb; ++i) {
                theta[i] = std::abs((tot[k] - bins[i][k]) / double(nb - 1));
                tm += theta[i];
            }
            tm /= nb;
            double s2 = 0;
            for (size_t i = 0; i < nb; ++i) s2 += (theta[i] - tm) * (theta[i] - tm);
            val[k] = std::abs(tot[k] / (double)nb);
            err[k] = std::sqrt(s2 * double(nb - 1) / nb);
        }
    };
    RkCorrTable t;
    fold(ce_bins, t.ce, t.ce_err);
    fold(cr_bins, t.cr, t.cr_err);
    size_t d = std::max(t.ce.size(), t.cr.size());
    for (size_t k = 0; k < d; ++k) t.dist.push_back((double)k);
    return t;
}

RkRunResult rk_run(const Lattice& lat, SectorPolicy pol, double f, uint64_t seed,
                   long ntherm_worms, long nmeas, int worms_per_meas, int nbins) {
    SpinConfig ref = sector_reference(lat, f);
    DimerOcc occ0 = dimer_cover(electric_field(ref, lat), lat).occ;
    WormSampler ws(lat, Rng::stream(seed, 0xD1), pol, occ0);

    long double len_sum = 0;
    long len_cnt = 0;
    for (long i = 0; i < ntherm_worms; ++i) ws.step();

    std::vector<std::vector<cplx>> ce_bins, cr_bins;
    const size_t nd = lat.Lx / 2 + 1;
    std::vector<cplx> ce_acc(nd, 0.0), cr_acc(nd, 0.0);
    long in_bin = 0, cr_cnt = 0, per_bin = std::max(1L, nmeas / nbins);
    RkRunResult out;

    for (long m = 0; m < nmeas; ++m) {
        for (int w = 0; w < worms_per_meas; ++w) {
            len_sum += ws.step();
            ++len_cnt;
        }
        out.sector_counts[{ws.flux().Fx, ws.flux().Fy}]++;
        ElectricField e = cover_field(ws.occ(), lat);
        auto ce = corr_E_a1(e, lat);
        for (size_t k = 0; k < nd; ++k) ce_acc[k] += ce[k];
        // covers with odd winding have no spin preimage; the clock-field
        // correlator averages over the spin-consistent ones only
        if (auto spins = spins_from_cover(ws.occ(), lat)) {
            auto cr = corr_R_a1(*spins, lat);
            for (size_t k = 0; k < nd; ++k) cr_acc[k] += cr[k];
            ++cr_cnt;
        }
        if (++in_bin == per_bin) {
            for (auto& v : ce_acc) v /= (double)per_bin;
            ce_bins.push_back(ce_acc);
            ce_acc.assign(nd, 0.0);
            if (cr_cnt > 0) {
                for (auto& v : cr_acc) v /= (double)cr_cnt;
                cr_bins.push_back(cr_acc);
            }
            cr_acc.assign(nd, 0.0);
            cr_cnt = 0;
            in_bin = 0;
        }
    }
    out.corr = rk_correlators(ce_bins, cr_bins);
    out.mean_worm_len = len_cnt ? (double)(len_sum / len_cnt) : 0.0;
    out.accepted = ws.accepted();
    out.attempted = ws.attempted();
    return out;
}

}  // namespace triqmc
