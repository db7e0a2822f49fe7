#include "anderson/noise.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "anderson/rng.hpp"

namespace anderson {

double NoiseField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double NoiseField::mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double NoiseField::variance() const {
  const double m = mean();
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

NoiseField sample_white(const Grid& grid, std::uint64_t seed) {
  NoiseField f;
  f.grid = grid;
  f.kind = NoiseKind::White;
  f.seed = seed;
  const std::int64_t n = grid.num_sites();
  f.values.resize(static_cast<std::size_t>(n));
  Rng rng(seed, /*stream=*/0x77686974u); // dedicated stream tag for fields
  const double sd = std::pow(grid.h(), -0.5 * grid.d);
  for (std::int64_t i = 0; i < n; ++i)
    f.values[static_cast<std::size_t>(i)] = sd * rng.next_gaussian();
  return f;
}

NoiseField make_deterministic(const Grid& grid,
                              const std::function<double(const double*)>& f) {
  NoiseField out;
  out.grid = grid;
  out.kind = NoiseKind::Deterministic;
  const std::int64_t n = grid.num_sites();
  out.values.resize(static_cast<std::size_t>(n));
  double x[3] = {0, 0, 0};
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = grid.unflatten(i);
    for (int ax = 0; ax < grid.d; ++ax) x[ax] = grid.coord(idx[ax]);
    out.values[static_cast<std::size_t>(i)] = f(x);
  }
  return out;
}

NoiseField mollify(const NoiseField& noise, const Mollifier& mol) {
  const Grid& g = noise.grid;
  const auto kernel = mol.discretize(g); // throws UnresolvedMollifier
  NoiseField out;
  out.grid = g;
  out.kind = noise.kind == NoiseKind::White ? NoiseKind::Mollified : noise.kind;
  out.epsilon = mol.epsilon();
  out.seed = noise.seed;
  const std::int64_t n = g.num_sites();
  out.values.assign(static_cast<std::size_t>(n), 0.0);

  const int R = kernel.radius;
  const int w = 2 * R + 1;
  const int sites = g.sites_per_axis();
  const double hd = std::pow(g.h(), g.d);
  std::array<int, 3> off{0, 0, 0};
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = g.unflatten(i);
    double acc = 0.0;
    // loop over kernel offsets; zero extension (Dirichlet) or wraparound
    std::int64_t total = 1;
    for (int ax = 0; ax < g.d; ++ax) total *= w;
    for (std::int64_t flat = 0; flat < total; ++flat) {
      std::int64_t rem = flat;
      bool inside = true;
      std::array<int, 3> src = idx;
      for (int ax = g.d - 1; ax >= 0; --ax) {
        off[ax] = static_cast<int>(rem % w) - R;
        rem /= w;
      }
      for (int ax = 0; ax < g.d; ++ax) {
        int s = idx[ax] - off[ax];
        if (g.bc == Bc::Periodic) {
          s %= sites;
          if (s < 0) s += sites;
        } else if (s < 0 || s >= sites) {
          inside = false;
          break;
        }
        src[ax] = s;
      }
      if (!inside) continue;
      acc += kernel.weights[static_cast<std::size_t>(flat)] *
             noise.values[static_cast<std::size_t>(g.flatten(src))];
    }
    out.values[static_cast<std::size_t>(i)] = acc * hd;
  }
  return out;
}

NoiseField rescale_noise(const NoiseField& noise, double L) {
  if (!(L > 0.0)) throw ConfigError("rescale_noise: L must be positive");
  NoiseField out = noise;
  out.grid.L = noise.grid.L * L;
  const double s = 1.0 / (L * L);
  for (double& v : out.values) v *= s;
  return out;
}

void export_field_csv(const NoiseField& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "# anderson-csv v1 field\n";
  for (int ax = 0; ax < field.grid.d; ++ax) os << "i" << ax << ",";
  os << "value\n";
  char buf[64];
  const std::int64_t n = field.grid.num_sites();
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = field.grid.unflatten(i);
    for (int ax = 0; ax < field.grid.d; ++ax) os << idx[ax] << ",";
    std::snprintf(buf, sizeof buf, "%.17g", field.values[static_cast<std::size_t>(i)]);
    os << buf << "\n";
  }
}

namespace {
constexpr char kMagic[8] = {'A', 'N', 'D', 'F', 'I', 'E', 'L', 'D'};

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
void get(std::ifstream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof v);
}
} // namespace

void export_field_binary(const NoiseField& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::int32_t>(os, field.grid.d);
  put<std::int32_t>(os, field.grid.N);
  put<double>(os, field.grid.L);
  put<std::int32_t>(os, field.grid.bc == Bc::Dirichlet ? 0 : 1);
  put<std::int32_t>(os, static_cast<std::int32_t>(field.kind));
  put<double>(os, field.epsilon);
  put<std::uint64_t>(os, field.seed);
  put<std::int64_t>(os, static_cast<std::int64_t>(field.values.size()));
  os.write(reinterpret_cast<const char*>(field.values.data()),
           static_cast<std::streamsize>(field.values.size() * sizeof(double)));
}

NoiseField import_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(path + ": not a field snapshot");
  std::int32_t d = 0, N = 0, bc = 0, kind = 0;
  double L = 0, eps = 0;
  std::uint64_t seed = 0;
  std::int64_t count = 0;
  get(is, d);
  get(is, N);
  get(is, L);
  get(is, bc);
  get(is, kind);
  get(is, eps);
  get(is, seed);
  get(is, count);
  NoiseField f;
  f.grid = Grid(d, L, N, bc == 0 ? Bc::Dirichlet : Bc::Periodic);
  f.kind = static_cast<NoiseKind>(kind);
  f.epsilon = eps;
  f.seed = seed;
  f.values.resize(static_cast<std::size_t>(count));
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!is) throw Error(path + ": truncated field snapshot");
  return f;
}

} // namespace anderson
