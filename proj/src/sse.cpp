#include "triqmc/sse.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace triqmc {

SseChain::SseChain(const Lattice& lat, const CouplingTable& tbl, double beta, Rng rng)
    : lat_(lat), tbl_(tbl), beta_(beta), rng_(rng) {
    if (beta <= 0) throw std::invalid_argument("SseChain: beta > 0 required");
    // insertion classes: pooled sites (equal weight Omega/2), then one class
    // per shell with U > 0 (equal weight U/2 within a shell)
    w_site_total_ = lat.N * tbl.omega / 2.0;
    class_w_.push_back(w_site_total_);
    class_shell_offset_.push_back(-1);
    class_shell_count_.push_back(lat.N);
    double u_sum_bonds = 0;
    for (int sh = 0; sh < 3; ++sh) {
        if (tbl.U[sh] <= 0.0) continue;
        class_w_.push_back(lat.bonds[sh].size() * tbl.U[sh] / 2.0);
        class_shell_offset_.push_back((int)opbonds_.size());
        class_shell_count_.push_back((int)lat.bonds[sh].size());
        for (const Bond& b : lat.bonds[sh]) {
            opbonds_.push_back({b.i, b.j, tbl.U[sh] / 2.0});
            u_sum_bonds += tbl.U[sh];
        }
    }
    w_tot_ = 0;
    for (double w : class_w_) w_tot_ += w;
    shift_ = lat.N * tbl.omega / 2.0 + u_sum_bonds / 4.0;

    sigma0_.resize(lat.N);
    for (auto& s : sigma0_) s = rng_.coin();
    ops_.assign(std::max(20, lat.N), -1);
    prop_.resize(lat.N);
    vfirst_.resize(lat.N);
    vlast_.resize(lat.N);

    cut_site_.resize(lat.N);
    for (int y = 0; y < lat.Ly; ++y)
        for (int x = 0; x < lat.Lx; ++x)
            cut_site_[lat.site(x, y)] =
                x < 2 || x == lat.Lx - 1 || y < 2 || y == lat.Ly - 1;
}

void SseChain::set_state(const SpinConfig& cfg) {
    if ((int)cfg.size() != lat_.N) throw std::invalid_argument("set_state: size mismatch");
    sigma0_ = cfg;
    std::fill(ops_.begin(), ops_.end(), -1);
    n_ = 0;
    n_off_ = 0;
    sweeps_done_ = 0;
}

void SseChain::lock_sector() {
    WindingNumbers w = winding_flux(sigma0_, lat_);
    lock_ = true;
    lock_fx_ = w.Fx;
    lock_fy_ = w.Fy;
    if (count_cut_violations(sigma0_) != 0)
        throw std::runtime_error("lock_sector: cut-adjacent triangles carry charge");
}

bool SseChain::in_sector(const SpinConfig& cfg) const {
    WindingNumbers w = winding_flux(cfg, lat_);
    return w.Fx == lock_fx_ && w.Fy == lock_fy_ && count_cut_violations(cfg) == 0;
}

void SseChain::unlock_sector() { lock_ = false; }

void SseChain::grow_cutoff(int m_new) {
    if (m_new <= (int)ops_.size()) return;
    ops_.resize(m_new, -1);
}

void SseChain::diagonal_update(bool grow) {
    const int M = (int)ops_.size();
    const int twoN = 2 * lat_.N;
    prop_ = sigma0_;
    for (int p = 0; p < M; ++p) {
        int op = ops_[p];
        if (op == -1) {
            if (rng_.u01() * (M - n_) < beta_ * w_tot_) {
                // select class, then member; bond candidates on parallel
                // spins are rejected attempts (zero matrix element)
                double u = rng_.u01() * w_tot_;
                size_t cl = 0;
                while (cl + 1 < class_w_.size() && u >= class_w_[cl]) u -= class_w_[cl++];
                if (class_shell_offset_[cl] < 0) {
                    int i = (int)rng_.below(lat_.N);
                    ops_[p] = 2 * i;
                    ++n_;
                } else {
                    int b = class_shell_offset_[cl] + (int)rng_.below(class_shell_count_[cl]);
                    const OpBond& ob = opbonds_[b];
                    if (prop_[ob.i] != prop_[ob.j]) {
                        ops_[p] = twoN + b;
                        ++n_;
                    }
                }
            }
        } else if (op >= twoN || !(op & 1)) {
            if (rng_.u01() * beta_ * w_tot_ < (double)(M - n_ + 1)) {
                ops_[p] = -1;
                --n_;
            }
        } else {
            prop_[op >> 1] ^= 1;
        }
    }
    if (grow && 5 * n_ > 4 * M) grow_cutoff((5 * n_) / 4 + 1);
}

void SseChain::cluster_update() {
    const int M = (int)ops_.size();
    const int twoN = 2 * lat_.N;
    X_.assign(4 * M, -1);
    cid_.assign(4 * M, -1);
    std::fill(vfirst_.begin(), vfirst_.end(), -1);
    std::fill(vlast_.begin(), vlast_.end(), -1);

    auto attach = [&](int s, int leg_in, int leg_out) {
        if (vlast_[s] >= 0) {
            X_[vlast_[s]] = leg_in;
            X_[leg_in] = vlast_[s];
        } else {
            vfirst_[s] = leg_in;
        }
        vlast_[s] = leg_out;
    };
    for (int p = 0; p < M; ++p) {
        int op = ops_[p];
        if (op == -1) continue;
        if (op < twoN) {
            attach(op >> 1, 4 * p, 4 * p + 2);
        } else {
            const OpBond& ob = opbonds_[op - twoN];
            attach(ob.i, 4 * p, 4 * p + 2);
            attach(ob.j, 4 * p + 1, 4 * p + 3);
        }
    }
    for (int s = 0; s < lat_.N; ++s)
        if (vfirst_[s] >= 0) {
            X_[vfirst_[s]] = vlast_[s];
            X_[vlast_[s]] = vfirst_[s];
        }

    // branching clusters: linked-list partners always join; bond vertices
    // merge all four legs; site vertices terminate growth
    flip_.clear();
    int ncl = 0;
    for (int l0 = 0; l0 < 4 * M; ++l0) {
        if (X_[l0] < 0 || cid_[l0] >= 0) continue;
        int c = ncl++;
        flip_.push_back(rng_.coin());
        stack_.clear();
        stack_.push_back(l0);
        while (!stack_.empty()) {
            int v = stack_.back();
            stack_.pop_back();
            if (cid_[v] >= 0) continue;
            cid_[v] = c;
            if (cid_[X_[v]] < 0) stack_.push_back(X_[v]);
            int p = v >> 2;
            if (ops_[p] >= twoN) {
                for (int l = 4 * p; l < 4 * p + 4; ++l)
                    if (cid_[l] < 0) stack_.push_back(l);
            }
        }
    }

    if (!lock_) {
        for (int p = 0; p < M; ++p) {
            int op = ops_[p];
            if (op < 0 || op >= twoN) continue;
            if (flip_[cid_[4 * p]] != flip_[cid_[4 * p + 2]]) {
                ops_[p] = op ^ 1;
                n_off_ += (op & 1) ? -1 : +1;
            }
        }
        for (int s = 0; s < lat_.N; ++s) {
            if (vfirst_[s] >= 0) {
                if (flip_[cid_[vfirst_[s]]]) sigma0_[s] ^= 1;
            } else if (rng_.coin()) {
                sigma0_[s] ^= 1;
            }
        }
        return;
    }

    // locked sector: flip one cluster at a time, accepting only moves that
    // keep the cut fluxes and leave cut-adjacent triangles charge-free;
    // single-cluster proposals keep the acceptance rate finite at large beta
    cls_beg_.assign(ncl + 1, 0);
    for (int s = 0; s < lat_.N; ++s)
        if (vfirst_[s] >= 0) ++cls_beg_[cid_[vfirst_[s]] + 1];
    for (int p = 0; p < M; ++p) {
        int op = ops_[p];
        if (op < 0 || op >= twoN) continue;
        int c0 = cid_[4 * p], c1 = cid_[4 * p + 2];
        if (c0 != c1) {
            ++cls_beg_[c0 + 1];
            ++cls_beg_[c1 + 1];
        }
    }
    for (int c = 0; c < ncl; ++c) cls_beg_[c + 1] += cls_beg_[c];
    cls_item_.resize(cls_beg_[ncl]);
    stack_.assign(cls_beg_.begin(), cls_beg_.end() - 1);  // fill cursors
    for (int s = 0; s < lat_.N; ++s)
        if (vfirst_[s] >= 0) cls_item_[stack_[cid_[vfirst_[s]]]++] = s;
    for (int p = 0; p < M; ++p) {
        int op = ops_[p];
        if (op < 0 || op >= twoN) continue;
        int c0 = cid_[4 * p], c1 = cid_[4 * p + 2];
        if (c0 != c1) {
            cls_item_[stack_[c0]++] = lat_.N + p;
            cls_item_[stack_[c1]++] = lat_.N + p;
        }
    }
    for (int c = 0; c < ncl; ++c) {
        if (!flip_[c]) continue;
        bool touches_cut = false;
        for (int k = cls_beg_[c]; k < cls_beg_[c + 1]; ++k) {
            int it = cls_item_[k];
            if (it < lat_.N) {
                sigma0_[it] ^= 1;
                touches_cut = touches_cut || cut_site_[it];
            }
        }
        if (touches_cut && !in_sector(sigma0_)) {
            for (int k = cls_beg_[c]; k < cls_beg_[c + 1]; ++k)
                if (cls_item_[k] < lat_.N) sigma0_[cls_item_[k]] ^= 1;
            continue;
        }
        for (int k = cls_beg_[c]; k < cls_beg_[c + 1]; ++k) {
            int it = cls_item_[k];
            if (it < lat_.N) continue;
            int op = ops_[it - lat_.N];
            ops_[it - lat_.N] = op ^ 1;
            n_off_ += (op & 1) ? -1 : +1;
        }
    }
    for (int s = 0; s < lat_.N; ++s) {
        if (vfirst_[s] >= 0 || !rng_.coin()) continue;
        sigma0_[s] ^= 1;
        if (cut_site_[s] && !in_sector(sigma0_)) sigma0_[s] ^= 1;
    }
}

void SseChain::symmetry_move() {
    // random translation plus optional global flip: an exact relabeling
    // symmetry of the weight, restores ergodicity between order-parameter
    // images that local updates traverse slowly
    int dx = (int)rng_.below(lat_.Lx), dy = (int)rng_.below(lat_.Ly);
    bool flip = rng_.coin();
    if (dx == 0 && dy == 0 && !flip) return;
    perm_.resize(lat_.N);
    for (int y = 0; y < lat_.Ly; ++y)
        for (int x = 0; x < lat_.Lx; ++x) perm_[lat_.site(x, y)] = lat_.site(x + dx, y + dy);
    for (int i = 0; i < lat_.N; ++i) prop_[perm_[i]] = flip ? sigma0_[i] ^ 1 : sigma0_[i];
    if (lock_ && !in_sector(prop_)) return;
    const int M = (int)ops_.size(), twoN = 2 * lat_.N, threeN = 3 * lat_.N;
    ops_new_.resize(M);
    for (int p = 0; p < M; ++p) {
        int op = ops_[p];
        if (op < 0) {
            ops_new_[p] = op;
        } else if (op < twoN) {
            ops_new_[p] = (2 * perm_[op >> 1]) | (op & 1);
        } else {
            int b = op - twoN;
            int sh = b / threeN, r = b % threeN;
            ops_new_[p] = twoN + sh * threeN + 3 * perm_[r / 3] + (r % 3);
        }
    }
    sigma0_ = prop_;
    ops_.swap(ops_new_);
}

int SseChain::count_cut_violations(const SpinConfig& cfg) const {
    auto bad = [&](const std::array<int, 3>& t) {
        int f = (cfg[t[0]] == cfg[t[1]]) + (cfg[t[0]] == cfg[t[2]]) +
                (cfg[t[1]] == cfg[t[2]]);
        return f != 1;
    };
    int v = 0;
    for (int x = 0; x < lat_.Lx; ++x) {
        if (bad(lat_.tri_up[lat_.site(x, 0)])) ++v;
        if (bad(lat_.tri_dn[lat_.site(x, lat_.Ly - 1)])) ++v;
    }
    for (int y = 0; y < lat_.Ly; ++y) {
        if (bad(lat_.tri_up[lat_.site(0, y)])) ++v;
        if (bad(lat_.tri_dn[lat_.site(lat_.Lx - 1, y)])) ++v;
    }
    return v;
}

void SseChain::sweep(bool grow) {
    diagonal_update(grow);
    cluster_update();
    symmetry_move();
    ++sweeps_done_;
}

double SseChain::energy_mixed() const {
    return classical_energy(sigma0_, tbl_, lat_) - n_off_ / beta_;
}

bool SseChain::valid() const {
    const int twoN = 2 * lat_.N;
    SpinConfig s = sigma0_;
    int n = 0;
    long noff = 0;
    for (int op : ops_) {
        if (op == -1) continue;
        ++n;
        if (op >= twoN) {
            const OpBond& ob = opbonds_[op - twoN];
            if (s[ob.i] == s[ob.j]) return false;
        } else if (op & 1) {
            s[op >> 1] ^= 1;
            ++noff;
        }
    }
    return n == n_ && noff == n_off_ && s == sigma0_;
}

void SseChain::save(std::ostream& os) const {
    os << "triqmc-chain 1\n";
    os << "lx " << lat_.Lx << " ly " << lat_.Ly << "\n";
    os.precision(17);  // exact double round trip
    os << "beta " << beta_ << " omega " << tbl_.omega << " u1 " << tbl_.U[0] << " u2 "
       << tbl_.U[1] << " u3 " << tbl_.U[2] << "\n";
    os << "m " << ops_.size() << " n " << n_ << " noff " << n_off_ << " sweeps "
       << sweeps_done_ << "\n";
    os << "sector " << (lock_ ? 1 : 0) << " " << lock_fx_ << " " << lock_fy_ << "\n";
    os << "sigma ";
    for (uint8_t v : sigma0_) os << int(v);
    os << "\nops";
    for (int op : ops_) os << " " << op;
    os << "\nrng " << rng_ << "\nend\n";
}

void SseChain::load(std::istream& is) {
    std::string tag;
    int ver, lx, ly;
    is >> tag >> ver;
    if (tag != "triqmc-chain" || ver != 1) throw std::runtime_error("checkpoint: bad header");
    is >> tag >> lx >> tag >> ly;
    if (lx != lat_.Lx || ly != lat_.Ly) throw std::runtime_error("checkpoint: lattice mismatch");
    double beta, om, u1, u2, u3;
    is >> tag >> beta >> tag >> om >> tag >> u1 >> tag >> u2 >> tag >> u3;
    if (beta != beta_ || om != tbl_.omega || u1 != tbl_.U[0] || u2 != tbl_.U[1] ||
        u3 != tbl_.U[2])
        throw std::runtime_error("checkpoint: model mismatch");
    size_t m;
    int locki;
    is >> tag >> m >> tag >> n_ >> tag >> n_off_ >> tag >> sweeps_done_;
    is >> tag >> locki >> lock_fx_ >> lock_fy_;
    lock_ = locki != 0;
    std::string bits;
    is >> tag >> bits;
    if ((int)bits.size() != lat_.N) throw std::runtime_error("checkpoint: sigma size");
    for (int i = 0; i < lat_.N; ++i) sigma0_[i] = bits[i] == '1';
    is >> tag;
    ops_.assign(m, -1);
    for (size_t p = 0; p < m; ++p) is >> ops_[p];
    is >> tag >> rng_;
    is >> tag;
    if (tag != "end" || !is) throw std::runtime_error("checkpoint: truncated");
    if (!valid()) throw std::runtime_error("checkpoint: inconsistent chain state");
}

// ---------------------------------------------------------------------------
// measurement driver

namespace {

struct PhaseSet {
    // phase[i] = exp(i q.r_i) for site positions
    std::vector<cplx> ph;
    PhaseSet() = default;
    PhaseSet(const Lattice& lat, Vec2 q) {
        ph.resize(lat.N);
        for (int i = 0; i < lat.N; ++i) {
            Vec2 r = lat.pos(i);
            ph[i] = std::polar(1.0, q.x * r.x + q.y * r.y);
        }
    }
    double s_of(const SpinConfig& cfg) const {
        cplx a = 0;
        for (size_t i = 0; i < ph.size(); ++i) a += (cfg[i] - 0.5) * ph[i];
        return std::norm(a) / ph.size();
    }
};

// G(q,tau) measurement state for one sweep; slot-resolved Fourier amplitudes
struct GtauWork {
    std::vector<PhaseSet> phases;       // per momentum
    std::vector<int> dslot;             // tau_k -> slot offset
    std::vector<double> taus;
    int nq = 0, ntau = 0, nref = 0;
    bool density = true, electric = true;

    std::vector<cplx> amp_n, amp_e;     // nq x M slot amplitudes
    std::vector<double> gn, ge;         // nq x ntau accumulators (one sweep)
    std::vector<cplx> an_mean, ae_mean; // nq, slot-averaged amplitude
};

}  // namespace

SseRunResult sse_run(SseChain& chain, long ntherm, long nmeas, int nbins,
                     const MeasureConfig& mc) {
    if (nbins < 1 || nmeas % nbins != 0)
        throw std::invalid_argument("sse_run: nmeas must divide into nbins bins");
    const Lattice& lat = chain.lattice();
    const long per_bin = nmeas / nbins;

    chain.thermalize(ntherm);

    SseRunResult out;
    std::map<std::string, BinAccumulator> acc;
    auto add_scalar = [&](const std::string& k) {
        acc.emplace(k, BinAccumulator(nbins, per_bin));
    };
    add_scalar("energy");
    add_scalar("energy_sse");
    add_scalar("mag");
    add_scalar("sx");
    if (mc.flux) {
        add_scalar("flux_x");
        add_scalar("flux_y");
    }
    if (mc.violation) add_scalar("violation");
    if (mc.named_sq) {
        add_scalar("s_K");
        add_scalar("s_M");
        add_scalar("s_Mp");
    }
    for (size_t k = 0; k < mc.extra_q.size(); ++k) add_scalar(str_f("s_q%zu", k));
    if (mc.psir) add_scalar("psir_abs");

    PhaseSet phK, phM, phMp;
    if (mc.named_sq) {
        phK = PhaseSet(lat, lat.K());
        phM = PhaseSet(lat, lat.M());
        phMp = PhaseSet(lat, lat.Mp());
    }
    std::vector<PhaseSet> ph_extra;
    for (Vec2 q : mc.extra_q) ph_extra.emplace_back(lat, q);

    std::map<std::string, VectorBinAccumulator> vacc;
    if (mc.sgrid) vacc.emplace("sgrid", VectorBinAccumulator(lat.N, per_bin));
    if (mc.corr) {
        size_t d = lat.Lx / 2 + 1;
        vacc.emplace("corr_E_re", VectorBinAccumulator(d, per_bin));
        vacc.emplace("corr_E_im", VectorBinAccumulator(d, per_bin));
        vacc.emplace("corr_R_re", VectorBinAccumulator(d, per_bin));
        vacc.emplace("corr_R_im", VectorBinAccumulator(d, per_bin));
    }

    // imaginary-time setup
    GtauWork gw;
    std::vector<VectorBinAccumulator> gacc_n, gacc_e;
    const int M_fixed = chain.cutoff();  // frozen after thermalization
    if (mc.gtau.enabled) {
        gw.nq = (int)mc.gtau.momenta.size();
        gw.ntau = mc.gtau.ntau;
        gw.nref = std::min(mc.gtau.nref, M_fixed);
        gw.density = mc.gtau.density;
        gw.electric = mc.gtau.electric;
        const double beta = chain.beta();
        for (int k = 0; k < gw.ntau; ++k) {
            double x = gw.ntau == 1 ? 0.0 : (double)k / (gw.ntau - 1);
            double tau = beta / 2.0 * x * x;  // dense near tau = 0
            gw.taus.push_back(tau);
            gw.dslot.push_back((int)std::lround(tau / beta * M_fixed) % M_fixed);
        }
        for (auto [m, n] : mc.gtau.momenta)
            gw.phases.emplace_back(lat, lat.q_of(m, n));
        long gt_meas = nmeas / mc.gtau.every;
        long gt_per_bin = std::max(1L, gt_meas / nbins);
        for (int q = 0; q < gw.nq; ++q) {
            // layout per channel: ntau G values + 2 amplitude components
            if (gw.density) gacc_n.emplace_back(gw.ntau + 2, gt_per_bin);
            if (gw.electric) gacc_e.emplace_back(gw.ntau + 2, gt_per_bin);
        }
        out.gtau.beta = beta;
        out.gtau.taus = gw.taus;
    }

    const double beta = chain.beta();
    const double omega = chain.couplings().omega;

    for (long sw = 0; sw < nmeas; ++sw) {
        chain.sweep(false);
        const SpinConfig& s0 = chain.state();

        acc.at("energy").push(chain.energy_mixed());
        acc.at("energy_sse").push(chain.energy_sse());
        double mag = 0;
        for (uint8_t v : s0) mag += v - 0.5;
        acc.at("mag").push(mag / lat.N);
        acc.at("sx").push(omega > 0 ? chain.n_offdiag() / (beta * omega * lat.N) : 0.0);

        if (mc.flux) {
            WindingNumbers w = winding_flux(s0, lat);
            acc.at("flux_x").push(w.Fx);
            acc.at("flux_y").push(w.Fy);
        }
        if (mc.violation)
            acc.at("violation").push(count_violating_triangles(s0, lat) / (2.0 * lat.N));
        if (mc.named_sq) {
            acc.at("s_K").push(phK.s_of(s0));
            acc.at("s_M").push(phM.s_of(s0));
            acc.at("s_Mp").push(phMp.s_of(s0));
        }
        for (size_t k = 0; k < ph_extra.size(); ++k)
            acc.at(str_f("s_q%zu", k)).push(ph_extra[k].s_of(s0));
        if (mc.psir) {
            cplx p = psi_R(s0, lat);
            acc.at("psir_abs").push(std::abs(p));
            if (sw % mc.psir_every == 0)
                out.psir_samples.push_back({p.real(), p.imag()});
        }
        if (mc.sgrid) vacc.at("sgrid").push(structure_factor_grid(s0, lat));
        if (mc.corr) {
            ElectricField e = electric_field(s0, lat);
            auto ce = corr_E_a1(e, lat);
            auto cr = corr_R_a1(s0, lat);
            size_t d = ce.size();
            std::vector<double> re(d), im(d);
            for (size_t k = 0; k < d; ++k) re[k] = ce[k].real(), im[k] = ce[k].imag();
            vacc.at("corr_E_re").push(re);
            vacc.at("corr_E_im").push(im);
            for (size_t k = 0; k < d; ++k) re[k] = cr[k].real(), im[k] = cr[k].imag();
            vacc.at("corr_R_re").push(re);
            vacc.at("corr_R_im").push(im);
        }

        if (mc.gtau.enabled && sw % mc.gtau.every == 0) {
            // propagate slot-resolved amplitudes; only off-diagonal ops move spins
            const int M = chain.cutoff();
            if (M != M_fixed)
                throw std::runtime_error("sse_run: cutoff changed during measurement");
            // rebuild initial amplitudes
            gw.amp_n.assign((size_t)gw.nq * M, 0.0);
            gw.amp_e.assign((size_t)gw.nq * M, 0.0);
            SpinConfig s = s0;
            std::vector<double> ey(lat.N);
            for (int t = 0; t < lat.N; ++t) {
                const Bond& b = lat.bonds[0][3 * t + 0];
                ey[t] = (s[b.i] == s[b.j]) ? 2.0 : -1.0;
            }
            std::vector<cplx> an(gw.nq, 0.0), ae(gw.nq, 0.0);
            for (int q = 0; q < gw.nq; ++q) {
                const auto& ph = gw.phases[q].ph;
                cplx vn = 0, ve = 0;
                for (int i = 0; i < lat.N; ++i) {
                    vn += (s[i] - 0.5) * ph[i];
                    ve += ey[i] * ph[i];
                }
                an[q] = vn;
                ae[q] = ve;
            }
            // walk the string once, recording amplitudes per slot
            const int twoN = 2 * lat.N;
            for (int p = 0; p < M; ++p) {
                for (int q = 0; q < gw.nq; ++q) {
                    gw.amp_n[(size_t)q * M + p] = an[q];
                    gw.amp_e[(size_t)q * M + p] = ae[q];
                }
                int op = chain.op_at(p);
                if (op >= 0 && op < twoN && (op & 1)) {
                    int i = op >> 1;
                    double dn = s[i] ? -1.0 : 1.0;  // flip changes s~ by -/+1
                    s[i] ^= 1;
                    // the flipped site sits on the a1 bonds of triangles i and i - a1
                    int tb[2] = {i, lat.site(lat.x_of(i) - 1, lat.y_of(i))};
                    for (int q = 0; q < gw.nq; ++q) {
                        an[q] += dn * gw.phases[q].ph[i];
                    }
                    for (int tt : tb) {
                        const Bond& b = lat.bonds[0][3 * tt + 0];
                        double enew = (s[b.i] == s[b.j]) ? 2.0 : -1.0;
                        double de = enew - ey[tt];
                        ey[tt] = enew;
                        if (de != 0)
                            for (int q = 0; q < gw.nq; ++q)
                                ae[q] += de * gw.phases[q].ph[tt];
                    }
                }
            }
            // accumulate over reference slots
            gw.gn.assign((size_t)gw.nq * gw.ntau, 0.0);
            gw.ge.assign((size_t)gw.nq * gw.ntau, 0.0);
            gw.an_mean.assign(gw.nq, 0.0);
            gw.ae_mean.assign(gw.nq, 0.0);
            for (int j = 0; j < gw.nref; ++j) {
                int p0 = (int)((long)j * M / gw.nref);
                for (int q = 0; q < gw.nq; ++q) {
                    cplx a0n = gw.amp_n[(size_t)q * M + p0];
                    cplx a0e = gw.amp_e[(size_t)q * M + p0];
                    gw.an_mean[q] += a0n;
                    gw.ae_mean[q] += a0e;
                    for (int k = 0; k < gw.ntau; ++k) {
                        int p1 = p0 + gw.dslot[k];
                        if (p1 >= M) p1 -= M;
                        gw.gn[(size_t)q * gw.ntau + k] +=
                            (gw.amp_n[(size_t)q * M + p1] * std::conj(a0n)).real();
                        gw.ge[(size_t)q * gw.ntau + k] +=
                            (gw.amp_e[(size_t)q * M + p1] * std::conj(a0e)).real();
                    }
                }
            }
            double norm = 1.0 / (gw.nref * (double)lat.N);
            for (int q = 0; q < gw.nq; ++q) {
                if (gw.density) {
                    std::vector<double> row(gw.ntau + 2);
                    for (int k = 0; k < gw.ntau; ++k)
                        row[k] = gw.gn[(size_t)q * gw.ntau + k] * norm;
                    row[gw.ntau] = (gw.an_mean[q] / (double)gw.nref).real();
                    row[gw.ntau + 1] = (gw.an_mean[q] / (double)gw.nref).imag();
                    gacc_n[q].push(row);
                }
                if (gw.electric) {
                    std::vector<double> row(gw.ntau + 2);
                    for (int k = 0; k < gw.ntau; ++k)
                        row[k] = gw.ge[(size_t)q * gw.ntau + k] * norm;
                    row[gw.ntau] = (gw.ae_mean[q] / (double)gw.nref).real();
                    row[gw.ntau + 1] = (gw.ae_mean[q] / (double)gw.nref).imag();
                    gacc_e[q].push(row);
                }
            }
        }
    }

    for (auto& [k, a] : acc) out.scalars[k] = a.series();
    for (auto& [k, a] : vacc) {
        out.vec_mean[k] = a.mean();
        out.vec_err[k] = a.error();
        out.vec_bins[k] = a.bins();
    }
    if (mc.gtau.enabled) {
        auto emit = [&](const std::string& obs, int q, VectorBinAccumulator& a) {
            GtauChannel ch;
            ch.obs = obs;
            ch.m = mc.gtau.momenta[q][0];
            ch.n = mc.gtau.momenta[q][1];
            for (const auto& b : a.bins()) {
                std::vector<double> g(gw.ntau);
                double ar = b[gw.ntau], ai = b[gw.ntau + 1];
                double sub = (ar * ar + ai * ai) / chain.lattice().N;
                for (int k = 0; k < gw.ntau; ++k) g[k] = b[k] - sub;
                ch.bins.push_back(std::move(g));
            }
            out.gtau.channels.push_back(std::move(ch));
        };
        for (int q = 0; q < gw.nq; ++q) {
            if (gw.density) emit("density", q, gacc_n[q]);
            if (gw.electric) emit("electric", q, gacc_e[q]);
        }
    }

    out.equilibrated = true;
    for (auto& [k, s] : out.scalars)
        if (!s.equilibrated()) out.equilibrated = false;
    return out;
}

}  // namespace triqmc
