#include "triqmc/lattice.hpp"

#include <stdexcept>

namespace triqmc {

Lattice::Lattice(int lx, int ly) : Lx(lx), Ly(ly), N(lx * ly) {
    if (lx < 3 || ly < 3) throw std::invalid_argument("Lattice: L >= 3 required");

    // offsets per shell, one bond per (site, offset); at L=3,4 some pairs repeat
    // through periodic images, which is the correct torus interaction count
    static const int off[3][3][2] = {
        {{1, 0}, {0, 1}, {-1, 1}},   // a1, a2, a2-a1
        {{1, 1}, {-1, 2}, {2, -1}},  // a1+a2, 2a2-a1, 2a1-a2
        {{2, 0}, {0, 2}, {-2, 2}},   // 2a1, 2a2, 2(a2-a1)
    };
    for (int sh = 0; sh < 3; ++sh) {
        bonds[sh].reserve(3 * N);
        for (int y = 0; y < Ly; ++y)
            for (int x = 0; x < Lx; ++x)
                for (int c = 0; c < 3; ++c)
                    bonds[sh].push_back(
                        {site(x, y), site(x + off[sh][c][0], y + off[sh][c][1]), sh + 1});
    }
    // reorder shell-1 to the b = 3*s + c convention (site-major)
    {
        std::vector<Bond> b1(3 * N);
        int k = 0;
        for (int y = 0; y < Ly; ++y)
            for (int x = 0; x < Lx; ++x)
                for (int c = 0; c < 3; ++c) b1[3 * site(x, y) + c] = bonds[0][k++];
        bonds[0] = std::move(b1);
    }

    tri_up.resize(N);
    tri_dn.resize(N);
    for (int y = 0; y < Ly; ++y)
        for (int x = 0; x < Lx; ++x) {
            int t = site(x, y);
            tri_up[t] = {site(x, y), site(x + 1, y), site(x, y + 1)};
            tri_dn[t] = {site(x + 1, y), site(x, y + 1), site(x + 1, y + 1)};
        }

    links.resize(3 * N);
    bond_to_link.assign(3 * N, -1);
    for (int y = 0; y < Ly; ++y)
        for (int x = 0; x < Lx; ++x) {
            int t = site(x, y);
            links[3 * t + 0] = {t, site(x, y - 1), 3 * t + 0};
            links[3 * t + 1] = {t, site(x - 1, y), 3 * t + 1};
            links[3 * t + 2] = {t, t, 3 * site(x + 1, y) + 2};
        }
    for (int l = 0; l < 3 * N; ++l) bond_to_link[links[l].bond] = l;
}

double Lattice::min_image_r2(int i, int j) const {
    int dx = x_of(j) - x_of(i), dy = y_of(j) - y_of(i);
    double best = 1e300;
    for (int wy = -1; wy <= 1; ++wy)
        for (int wx = -1; wx <= 1; ++wx) {
            double ux = dx + wx * Lx, uy = dy + wy * Ly;
            double cx = ux + 0.5 * uy, cy = uy * 0.8660254037844386;
            double r2 = cx * cx + cy * cy;
            if (r2 < best) best = r2;
        }
    return best;
}

int Lattice::shell_of(int i, int j) const {
    double r2 = min_image_r2(i, j);
    if (std::fabs(r2 - 1.0) < 1e-9) return 1;
    if (std::fabs(r2 - 3.0) < 1e-9) return 2;
    if (std::fabs(r2 - 4.0) < 1e-9) return 3;
    return 0;
}

double Lattice::q_dist(Vec2 qa, Vec2 qb) const {
    // reciprocal primitive vectors b1 = 2pi(1,-1/sqrt3), b2 = 2pi(0,2/sqrt3)
    double dx = qa.x - qb.x, dy = qa.y - qb.y;
    double best = 1e300;
    for (int w1 = -2; w1 <= 2; ++w1)
        for (int w2 = -2; w2 <= 2; ++w2) {
            double ux = dx + 2 * M_PI * w1;
            double uy = dy + 2 * M_PI * (-w1 + 2.0 * w2) / std::sqrt(3.0);
            double r2 = ux * ux + uy * uy;
            if (r2 < best) best = r2;
        }
    return std::sqrt(best);
}

double Lattice::q_spacing() const {
    double s1 = 2.0 * M_PI / Lx * 2.0 / std::sqrt(3.0);
    double s2 = 2.0 * M_PI / Ly * 2.0 / std::sqrt(3.0);
    return s1 > s2 ? s1 : s2;
}

}  // namespace triqmc
