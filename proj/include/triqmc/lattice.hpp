#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "triqmc/util.hpp"

namespace triqmc {

// Periodic triangular lattice with primitive vectors a1=(1,0), a2=(1/2,sqrt3/2),
// site index i = x + Lx*y (row-major), plus the dual honeycomb.
//
// Conventions used everywhere downstream:
//   up triangle   t=(x,y): sites {r, r+a1, r+a2}            (dual A sublattice)
//   down triangle t=(x,y): sites {r+a1, r+a2, r+a1+a2}      (dual B sublattice)
//   shell-1 bond b = 3*s + c from site s: c=0 offset a1, c=1 offset a2,
//     c=2 offset a2-a1.
//   dual link l = 3*t + c at A-triangle t, oriented A->B:
//     c=0 -> B(x,y-1) crossing bond 3*t+0 (the a1 bond of row y)
//     c=1 -> B(x-1,y) crossing bond 3*t+1 (the a2 bond of column x)
//     c=2 -> B(x,y)   crossing bond 3*site(x+1,y)+2
// Bond<->link is a bijection; both carry the other's index.
struct Bond {
    int i, j;
    int shell;  // 1..3
};

struct DualLink {
    int a, b;     // A vertex t, B vertex t' (both in [0, Lx*Ly))
    int bond;     // crossed shell-1 bond index
};

struct Vec2 {
    double x, y;
};

class Lattice {
  public:
    Lattice(int Lx, int Ly);

    int Lx, Ly, N;                      // N = Lx*Ly sites; triangles 2N; links 3N
    std::vector<Bond> bonds[3];        // per shell, each 3N bonds, index c-major per site
    std::vector<DualLink> links;       // 3N dual links, l = 3t+c
    std::vector<int> bond_to_link;     // shell-1 bond index -> dual link index
    std::vector<std::array<int, 3>> tri_up, tri_dn;  // site triples

    int site(int x, int y) const { return imod(x, Lx) + Lx * imod(y, Ly); }
    int x_of(int i) const { return i % Lx; }
    int y_of(int i) const { return i / Lx; }

    Vec2 pos(int i) const {
        double x = x_of(i), y = y_of(i);
        return {x + 0.5 * y, y * 0.8660254037844386};
    }

    // min-image squared distance in units of a^2 (shells live at 1, 3, 4)
    double min_image_r2(int i, int j) const;

    // 1..3 by min-image distance, 0 beyond shell 3
    int shell_of(int i, int j) const;

    // grid momentum q(m,n) = (2pi m/Lx) g1 + (2pi n/Ly) g2 in Cartesian form,
    // g1 = (1, -1/sqrt3), g2 = (0, 2/sqrt3)
    Vec2 q_of(int m, int n) const {
        double qx = 2.0 * M_PI * m / Lx;
        double qy = 2.0 * M_PI * (-(double)m / Lx + 2.0 * n / Ly) / std::sqrt(3.0);
        return {qx, qy};
    }

    // Cartesian distance between momenta modulo the reciprocal lattice
    double q_dist(Vec2 qa, Vec2 qb) const;

    double q_spacing() const;  // max primitive grid step, the "one grid spacing" unit

    // named points; K needs 3|Lx (and the g2 component 3|Ly on square), M needs 2|Ly
    Vec2 K() const { return {4.0 * M_PI / 3.0, 0.0}; }
    Vec2 M() const { return {M_PI, -M_PI / std::sqrt(3.0)}; }
    Vec2 Mp() const { return {0.0, 2.0 * M_PI / std::sqrt(3.0)}; }  // column-stripe peak
    Vec2 Gamma() const { return {0.0, 0.0}; }
};

}  // namespace triqmc
