#ifndef ANDERSON_NOISE_HPP
#define ANDERSON_NOISE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "anderson/grid.hpp"
#include "anderson/mollifier.hpp"

namespace anderson {

enum class NoiseKind { White, Mollified, Deterministic };

// Grid-indexed real field. Immutable by convention after creation: all
// operations below return fresh fields, so instances are safe to share
// across threads.
struct NoiseField {
  Grid grid;
  NoiseKind kind = NoiseKind::Deterministic;
  double epsilon = 0.0; // mollification scale, 0 unless kind == Mollified
  std::uint64_t seed = 0;
  std::vector<double> values; // one entry per grid site (row-major)

  double max_abs() const;
  double mean() const;
  double variance() const; // about the sample mean
};

// i.i.d. centred Gaussians with variance h^-d per site; pure function of
// (grid, seed)
NoiseField sample_white(const Grid& grid, std::uint64_t seed);

// a deterministic field from a pointwise function of the coordinates
NoiseField make_deterministic(const Grid& grid,
                              const std::function<double(const double*)>& f);

// discrete convolution with the mollifier kernel; zero extension outside
// the box for Dirichlet, wraparound for Periodic. Throws UnresolvedMollifier
// if eps < 2h.
NoiseField mollify(const NoiseField& noise, const Mollifier& mol);

// field on (-L,L)^d with the same per-axis count: values scaled by L^-2,
// positions dilated by L (mesh becomes L*h)
NoiseField rescale_noise(const NoiseField& noise, double L);

// snapshot export: CSV (index columns + value) and raw little-endian binary
// with header (d, N, L, bc, kind, eps, seed)
void export_field_csv(const NoiseField& field, const std::string& path);
void export_field_binary(const NoiseField& field, const std::string& path);
NoiseField import_field_binary(const std::string& path);

} // namespace anderson

#endif
