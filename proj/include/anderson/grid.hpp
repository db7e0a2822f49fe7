#ifndef ANDERSON_GRID_HPP
#define ANDERSON_GRID_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "anderson/errors.hpp"

namespace anderson {

enum class Bc { Dirichlet, Periodic };

// Uniform lattice on (-L,L)^d with mesh h = 2L/N. Dirichlet grids carry
// degrees of freedom on interior nodes only (the field is zero on and
// outside the boundary); periodic grids identify opposite faces and carry
// one fundamental domain of N^d nodes.
struct Grid {
  int d = 1;
  double L = 1.0;
  int N = 2; // cells per axis, even
  Bc bc = Bc::Dirichlet;

  Grid() = default;
  Grid(int d_, double L_, int N_, Bc bc_) : d(d_), L(L_), N(N_), bc(bc_) {
    if (d < 1 || d > 3) throw ConfigError("grid: dimension must be 1, 2 or 3");
    if (!(L > 0.0)) throw ConfigError("grid: half-width L must be positive");
    if (N < 4 || N % 2 != 0) throw ConfigError("grid: N must be even and >= 4");
  }

  double h() const { return 2.0 * L / N; }

  // nodes per axis carrying degrees of freedom
  int sites_per_axis() const { return bc == Bc::Dirichlet ? N - 1 : N; }

  std::int64_t num_sites() const {
    std::int64_t n = 1;
    for (int i = 0; i < d; ++i) n *= sites_per_axis();
    return n;
  }

  std::int64_t num_cells() const {
    std::int64_t n = 1;
    for (int i = 0; i < d; ++i) n *= N;
    return n;
  }

  // coordinate of the node with per-axis index i (0-based over sites)
  double coord(int axis_index) const {
    return bc == Bc::Dirichlet ? -L + (axis_index + 1) * h()
                               : -L + axis_index * h();
  }

  std::array<int, 3> unflatten(std::int64_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    const int n = sites_per_axis();
    for (int ax = d - 1; ax >= 0; --ax) {
      idx[ax] = static_cast<int>(flat % n);
      flat /= n;
    }
    return idx;
  }

  std::int64_t flatten(const std::array<int, 3>& idx) const {
    const int n = sites_per_axis();
    std::int64_t flat = 0;
    for (int ax = 0; ax < d; ++ax) flat = flat * n + idx[ax];
    return flat;
  }

  bool same_shape(const Grid& o) const {
    return d == o.d && L == o.L && N == o.N && bc == o.bc;
  }
};

} // namespace anderson

#endif
