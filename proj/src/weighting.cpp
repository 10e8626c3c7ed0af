#include "qburst/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qburst {

namespace {

enum NodeKind : std::uint8_t { kFree = 0, kGround = 1, kIsland = 2 };

// positive half-axis: uniform core then geometric stretch, mirrored
std::vector<double> lateral_axis(const GridSpec& spec) {
  std::vector<double> pos;
  const double s = spec.core_spacing_um;
  const int n_core = static_cast<int>(std::ceil(spec.core_radius_um / s - 1e-9));
  for (int i = 0; i <= n_core; ++i) pos.push_back(i * s);
  double d = s;
  while (pos.back() < spec.half_width_um) {
    d *= spec.stretch_ratio;
    // snap keeps the final cell between 0.7 d and 1.75 d so cell widths
    // stay monotone along the stretch
    double next = pos.back() + d;
    if (pos.back() + 1.75 * d >= spec.half_width_um) next = spec.half_width_um;
    pos.push_back(next);
  }
  std::vector<double> axis;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) axis.push_back(-*it);
  for (std::size_t i = 1; i < pos.size(); ++i) axis.push_back(pos[i]);
  return axis;
}

// z axis: stretched vacuum below (optional), uniform substrate, stretched cap
std::vector<double> vertical_axis(const GridSpec& spec, double thickness, int& k_interface) {
  std::vector<double> below;
  if (spec.vacuum_below_um > 0) {
    double d = spec.dz_substrate_um;
    double z = 0;
    while (z > -spec.vacuum_below_um) {
      double next = z - d;
      if (z - 1.75 * d <= -spec.vacuum_below_um) next = -spec.vacuum_below_um;
      below.push_back(next);
      z = next;
      d *= spec.z_stretch_ratio;
    }
  }
  std::vector<double> axis(below.rbegin(), below.rend());

  const int n_sub = std::max(4, static_cast<int>(std::lround(thickness / spec.dz_substrate_um)));
  const double dz = thickness / n_sub;
  for (int i = 0; i <= n_sub; ++i) axis.push_back(i * dz);
  k_interface = static_cast<int>(axis.size()) - 1;

  double d = dz;
  double z = thickness;
  while (z < thickness + spec.vacuum_above_um) {
    d *= spec.z_stretch_ratio;
    double next = z + d;
    if (z + 1.75 * d >= thickness + spec.vacuum_above_um) {
      next = thickness + spec.vacuum_above_um;
    }
    axis.push_back(next);
    z = next;
  }
  return axis;
}

std::uint64_t fnv1a(const char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_doubles(std::initializer_list<double> vals, std::uint64_t h) {
  char buf[32];
  for (double v : vals) {
    const int n = std::snprintf(buf, sizeof buf, "%.17g|", v);
    h = fnv1a(buf, static_cast<std::size_t>(n), h);
  }
  return h;
}

struct Mesh {
  std::vector<double> xs, ys, zs;
  int nx = 0, ny = 0, nz = 0, k_interface = 0;
  std::vector<std::uint8_t> mask;
  std::vector<double> values;

  // per-axis finite-volume factors
  std::vector<double> inv_dxm, inv_dxp, dxcv;
  std::vector<double> inv_dym, inv_dyp, dycv;
  std::vector<double> ezm, ezp, wz;  // eps/dz below, eps/dz above, eps-weighted cv height
  std::vector<int> xm, xp, ym, yp;   // neighbor indices (mirror walls reflect)

  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * ny + j) * nx + i;
  }
};

void build_axis_factors(const std::vector<double>& axis, bool mirror, std::vector<double>& inv_dm,
                        std::vector<double>& inv_dp, std::vector<double>& dcv,
                        std::vector<int>& im, std::vector<int>& ip) {
  const int n = static_cast<int>(axis.size());
  inv_dm.assign(n, 0.0);
  inv_dp.assign(n, 0.0);
  dcv.assign(n, 0.0);
  im.assign(n, 0);
  ip.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    double dm = i > 0 ? axis[i] - axis[i - 1] : 0.0;
    double dp = i < n - 1 ? axis[i + 1] - axis[i] : 0.0;
    int left = i - 1, right = i + 1;
    if (i == 0) {
      dm = dp;  // reflected ghost (only used with mirror walls)
      left = 1;
    }
    if (i == n - 1) {
      dp = dm;
      right = n - 2;
    }
    inv_dm[i] = 1.0 / dm;
    inv_dp[i] = 1.0 / dp;
    dcv[i] = 0.5 * (dm + dp);
    im[i] = left;
    ip[i] = right;
  }
  (void)mirror;
}

Mesh build_mesh(const Substrate& substrate, const QubitGeometry& qubit, const GridSpec& spec) {
  if (spec.core_spacing_um > (qubit.cavity_radius_um - qubit.island_radius_um) / 4.0) {
    throw std::invalid_argument(
        "grid spec does not resolve the island-ground gap (need >= 4 cells across it)");
  }
  if (spec.core_radius_um < qubit.cavity_radius_um + 2.0 * spec.core_spacing_um &&
      qubit.island_radius_um < spec.half_width_um) {
    throw std::invalid_argument("grid core must cover the cavity annulus");
  }

  Mesh m;
  m.xs = lateral_axis(spec);
  m.ys = m.xs;
  m.zs = vertical_axis(spec, substrate.thickness_um, m.k_interface);
  m.nx = static_cast<int>(m.xs.size());
  m.ny = static_cast<int>(m.ys.size());
  m.nz = static_cast<int>(m.zs.size());

  const bool mirror = spec.lateral_bc == LateralBc::mirror;
  build_axis_factors(m.xs, mirror, m.inv_dxm, m.inv_dxp, m.dxcv, m.xm, m.xp);
  build_axis_factors(m.ys, mirror, m.inv_dym, m.inv_dyp, m.dycv, m.ym, m.yp);

  // z-cell permittivities -> per-node flux factors
  m.ezm.assign(m.nz, 0.0);
  m.ezp.assign(m.nz, 0.0);
  m.wz.assign(m.nz, 0.0);
  const auto eps_cell = [&](int k) {
    const double mid = 0.5 * (m.zs[k] + m.zs[k + 1]);
    return (mid > 0.0 && mid < substrate.thickness_um) ? substrate.relative_permittivity : 1.0;
  };
  for (int k = 1; k < m.nz - 1; ++k) {
    const double dzm = m.zs[k] - m.zs[k - 1];
    const double dzp = m.zs[k + 1] - m.zs[k];
    const double em = eps_cell(k - 1);
    const double ep = eps_cell(k);
    m.ezm[k] = em / dzm;
    m.ezp[k] = ep / dzp;
    m.wz[k] = 0.5 * (em * dzm + ep * dzp);
  }

  // node classification
  m.mask.assign(static_cast<std::size_t>(m.nx) * m.ny * m.nz, kFree);
  m.values.assign(m.mask.size(), 0.0);
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      m.mask[m.idx(i, j, 0)] = kGround;
      m.mask[m.idx(i, j, m.nz - 1)] = kGround;
    }
  }
  if (!mirror) {
    for (int k = 0; k < m.nz; ++k) {
      for (int i = 0; i < m.nx; ++i) {
        m.mask[m.idx(i, 0, k)] = kGround;
        m.mask[m.idx(i, m.ny - 1, k)] = kGround;
      }
      for (int j = 0; j < m.ny; ++j) {
        m.mask[m.idx(0, j, k)] = kGround;
        m.mask[m.idx(m.nx - 1, j, k)] = kGround;
      }
    }
  }
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      const double r = std::hypot(m.xs[i], m.ys[j]);
      const std::size_t id = m.idx(i, j, m.k_interface);
      if (m.mask[id] != kFree) continue;
      if (r <= qubit.island_radius_um) {
        m.mask[id] = kIsland;
        m.values[id] = 1.0;
      } else if (r >= qubit.cavity_radius_um) {
        m.mask[id] = kGround;
      }
    }
  }
  return m;
}

// One SOR pass over nodes of a given red-black color; returns the largest
// applied update. Serial twin of the OpenMP version below, kept as the
// reference implementation.
double sweep_color_serial(Mesh& m, int color, double omega, int ilo, int ihi, int jlo, int jhi) {
  double maxdelta = 0.0;
  const int nx = m.nx;
  const std::size_t nxy = static_cast<std::size_t>(nx) * m.ny;
  for (int k = 1; k < m.nz - 1; ++k) {
    for (int j = jlo; j <= jhi; ++j) {
      const double wzk = m.wz[k];
      const double ezmk = m.ezm[k], ezpk = m.ezp[k];
      const double dycvj = m.dycv[j];
      const double cym_f = wzk * m.inv_dym[j], cyp_f = wzk * m.inv_dyp[j];
      const std::size_t row = (static_cast<std::size_t>(k) * m.ny + j) * nx;
      const std::size_t rowm = row + static_cast<std::size_t>(m.ym[j] - j) * nx;
      const std::size_t rowp = row + static_cast<std::size_t>(m.yp[j] - j) * nx;
      int i = ilo + (((ilo + j + k) & 1) != color ? 1 : 0);
      for (; i <= ihi; i += 2) {
        const std::size_t id = row + i;
        if (m.mask[id] != kFree) continue;
        const double dxcvi = m.dxcv[i];
        const double cxm = wzk * dycvj * m.inv_dxm[i];
        const double cxp = wzk * dycvj * m.inv_dxp[i];
        const double cym = cym_f * dxcvi;
        const double cyp = cyp_f * dxcvi;
        const double czm = ezmk * dxcvi * dycvj;
        const double czp = ezpk * dxcvi * dycvj;
        const double num = cxm * m.values[row + m.xm[i]] + cxp * m.values[row + m.xp[i]] +
                           cym * m.values[rowm + i] + cyp * m.values[rowp + i] +
                           czm * m.values[id - nxy] + czp * m.values[id + nxy];
        const double den = cxm + cxp + cym + cyp + czm + czp;
        const double delta = omega * (num / den - m.values[id]);
        m.values[id] += delta;
        maxdelta = std::max(maxdelta, std::abs(delta));
      }
    }
  }
  return maxdelta;
}

double sweep_color_parallel(Mesh& m, int color, double omega, int ilo, int ihi, int jlo, int jhi) {
  double maxdelta = 0.0;
  const int nx = m.nx;
  const int ny = m.ny;
  const int nzi = m.nz - 1;
  const std::size_t nxy = static_cast<std::size_t>(nx) * ny;
#pragma omp parallel for collapse(2) schedule(static) reduction(max : maxdelta)
  for (int k = 1; k < nzi; ++k) {
    for (int j = jlo; j <= jhi; ++j) {
      const double wzk = m.wz[k];
      const double ezmk = m.ezm[k], ezpk = m.ezp[k];
      const double dycvj = m.dycv[j];
      const double cym_f = wzk * m.inv_dym[j], cyp_f = wzk * m.inv_dyp[j];
      const std::size_t row = (static_cast<std::size_t>(k) * ny + j) * nx;
      const std::size_t rowm = row + static_cast<std::size_t>(m.ym[j] - j) * nx;
      const std::size_t rowp = row + static_cast<std::size_t>(m.yp[j] - j) * nx;
      int i = ilo + (((ilo + j + k) & 1) != color ? 1 : 0);
      for (; i <= ihi; i += 2) {
        const std::size_t id = row + i;
        if (m.mask[id] != kFree) continue;
        const double dxcvi = m.dxcv[i];
        const double cxm = wzk * dycvj * m.inv_dxm[i];
        const double cxp = wzk * dycvj * m.inv_dxp[i];
        const double cym = cym_f * dxcvi;
        const double cyp = cyp_f * dxcvi;
        const double czm = ezmk * dxcvi * dycvj;
        const double czp = ezpk * dxcvi * dycvj;
        const double num = cxm * m.values[row + m.xm[i]] + cxp * m.values[row + m.xp[i]] +
                           cym * m.values[rowm + i] + cyp * m.values[rowp + i] +
                           czm * m.values[id - nxy] + czp * m.values[id + nxy];
        const double den = cxm + cxp + cym + cyp + czm + czp;
        const double delta = omega * (num / den - m.values[id]);
        m.values[id] += delta;
        maxdelta = std::max(maxdelta, std::abs(delta));
      }
    }
  }
  return maxdelta;
}

}  // namespace

std::uint64_t GridSpec::key_hash(const Substrate& substrate, const QubitGeometry& qubit) const {
  std::uint64_t h = fnv1a("qburst-weighting-v1|", 20);
  h = hash_doubles({substrate.thickness_um, substrate.relative_permittivity,
                    qubit.island_radius_um, qubit.cavity_radius_um, core_spacing_um,
                    core_radius_um, stretch_ratio, half_width_um, dz_substrate_um,
                    vacuum_above_um, vacuum_below_um, z_stretch_ratio, tolerance,
                    static_cast<double>(max_iterations), omega,
                    static_cast<double>(static_cast<int>(lateral_bc))},
                   h);
  return h;
}

WeightingGrid solve_weighting(const ChipLayout& layout, const std::string& qubit_id,
                              const GridSpec& spec, const SolveOptions& options) {
  const QubitGeometry& qubit = layout.qubit(qubit_id);
  Mesh m = build_mesh(layout.substrate, qubit, spec);

  const int n_max = std::max({m.nx, m.ny, m.nz});
  const double omega = spec.omega > 0 ? spec.omega : 2.0 / (1.0 + std::sin(M_PI / n_max));

  const bool mirror = spec.lateral_bc == LateralBc::mirror;
  const int ilo = mirror ? 0 : 1;
  const int ihi = mirror ? m.nx - 1 : m.nx - 2;
  const int jlo = mirror ? 0 : 1;
  const int jhi = mirror ? m.ny - 1 : m.ny - 2;

  double delta = 0.0;
  int iter = 0;
  for (; iter < spec.max_iterations; ++iter) {
    if (options.parallel) {
      delta = sweep_color_parallel(m, 0, omega, ilo, ihi, jlo, jhi);
      delta = std::max(delta, sweep_color_parallel(m, 1, omega, ilo, ihi, jlo, jhi));
    } else {
      delta = sweep_color_serial(m, 0, omega, ilo, ihi, jlo, jhi);
      delta = std::max(delta, sweep_color_serial(m, 1, omega, ilo, ihi, jlo, jhi));
    }
    if (delta < spec.tolerance) break;
  }
  if (delta >= spec.tolerance) {
    throw solver_error("weighting solve did not converge within " +
                           std::to_string(spec.max_iterations) +
                           " sweeps (last update " + std::to_string(delta) + ")",
                       delta);
  }

  WeightingGrid grid;
  grid.qubit_id_ = qubit_id;
  grid.key_hash_ = spec.key_hash(layout.substrate, qubit);
  grid.xs_ = std::move(m.xs);
  grid.ys_ = std::move(m.ys);
  grid.zs_ = std::move(m.zs);
  grid.values_ = std::move(m.values);
  grid.k_interface_ = m.k_interface;
  grid.residual_ = delta;
  grid.iterations_ = iter + 1;
  grid.build_lookup();
  return grid;
}

void WeightingGrid::build_lookup() {
  const auto make = [](const std::vector<double>& axis, std::vector<int>& accel, double& step) {
    double min_sp = axis.back() - axis.front();
    for (std::size_t i = 1; i < axis.size(); ++i) min_sp = std::min(min_sp, axis[i] - axis[i - 1]);
    step = min_sp;
    const int n = static_cast<int>(std::ceil((axis.back() - axis.front()) / step)) + 2;
    accel.assign(n, 0);
    int cur = 0;
    for (int t = 0; t < n; ++t) {
      const double pos = axis.front() + t * step;
      while (cur + 2 < static_cast<int>(axis.size()) && axis[cur + 1] <= pos) ++cur;
      accel[t] = cur;
    }
  };
  make(xs_, ax_, ax_step_);
  make(ys_, ay_, ay_step_);
  make(zs_, az_, az_step_);
}

int WeightingGrid::cell_of(const std::vector<double>& axis, const std::vector<int>& accel,
                           double accel_step, double pos) const {
  int t = static_cast<int>((pos - axis.front()) / accel_step);
  t = std::clamp(t, 0, static_cast<int>(accel.size()) - 1);
  int i = accel[t];
  while (i + 2 < static_cast<int>(axis.size()) && axis[i + 1] <= pos) ++i;
  while (i > 0 && axis[i] > pos) --i;
  return i;
}

bool WeightingGrid::contains(const Vec3& r) const {
  return r.x >= xs_.front() && r.x <= xs_.back() && r.y >= ys_.front() && r.y <= ys_.back() &&
         r.z >= zs_.front() && r.z <= zs_.back();
}

bool WeightingGrid::interior(const Vec3& r) const {
  return r.x >= xs_[1] && r.x <= xs_[xs_.size() - 2] && r.y >= ys_[1] &&
         r.y <= ys_[ys_.size() - 2] && r.z >= zs_[1] && r.z <= zs_[zs_.size() - 2];
}

double WeightingGrid::alpha_at(const Vec3& r) const {
  if (!contains(r)) throw std::out_of_range("alpha_at: position outside the solved subdomain");
  const int i = cell_of(xs_, ax_, ax_step_, r.x);
  const int j = cell_of(ys_, ay_, ay_step_, r.y);
  const int k = cell_of(zs_, az_, az_step_, r.z);
  const double fx = (r.x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  const double fy = (r.y - ys_[j]) / (ys_[j + 1] - ys_[j]);
  const double fz = (r.z - zs_[k]) / (zs_[k + 1] - zs_[k]);
  const auto v = [&](int di, int dj, int dk) { return value(i + di, j + dj, k + dk); };
  const double c00 = v(0, 0, 0) * (1 - fx) + v(1, 0, 0) * fx;
  const double c10 = v(0, 1, 0) * (1 - fx) + v(1, 1, 0) * fx;
  const double c01 = v(0, 0, 1) * (1 - fx) + v(1, 0, 1) * fx;
  const double c11 = v(0, 1, 1) * (1 - fx) + v(1, 1, 1) * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  return std::clamp(c0 * (1 - fz) + c1 * fz, 0.0, 1.0);
}

double WeightingGrid::alpha_or_zero(const Vec3& r) const {
  if (!contains(r)) return 0.0;
  return alpha_at(r);
}

Vec3 WeightingGrid::grad_alpha_at(const Vec3& r) const {
  if (!interior(r)) {
    throw std::out_of_range("grad_alpha_at: position within one cell of the subdomain boundary");
  }
  const int i = cell_of(xs_, ax_, ax_step_, r.x);
  const int j = cell_of(ys_, ay_, ay_step_, r.y);
  const int k = cell_of(zs_, az_, az_step_, r.z);
  const auto fit = [](double h, double pos, double lo, double hi) {
    return std::min({h, pos - lo, hi - pos});
  };
  const double hx = fit(0.5 * (xs_[i + 1] - xs_[i]), r.x, xs_.front(), xs_.back());
  const double hy = fit(0.5 * (ys_[j + 1] - ys_[j]), r.y, ys_.front(), ys_.back());
  const double hz = fit(0.5 * (zs_[k + 1] - zs_[k]), r.z, zs_.front(), zs_.back());
  Vec3 g;
  g.x = (alpha_at({r.x + hx, r.y, r.z}) - alpha_at({r.x - hx, r.y, r.z})) / (2 * hx);
  g.y = (alpha_at({r.x, r.y + hy, r.z}) - alpha_at({r.x, r.y - hy, r.z})) / (2 * hy);
  g.z = (alpha_at({r.x, r.y, r.z + hz}) - alpha_at({r.x, r.y, r.z - hz})) / (2 * hz);
  return g;
}

namespace {

constexpr char kGridMagic[8] = {'Q', 'B', 'W', 'G', '0', '0', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
}

void write_vec(std::ofstream& out, const std::vector<double>& v) {
  const std::uint64_t n = v.size();
  write_pod(out, n);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_vec(std::ifstream& in) {
  std::uint64_t n = 0;
  read_pod(in, n);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

}  // namespace

void WeightingGrid::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write grid cache " + path);
  out.write(kGridMagic, sizeof kGridMagic);
  write_pod(out, key_hash_);
  const std::int32_t ki = k_interface_;
  write_pod(out, ki);
  write_pod(out, residual_);
  const std::int32_t it = iterations_;
  write_pod(out, it);
  const std::uint32_t idlen = static_cast<std::uint32_t>(qubit_id_.size());
  write_pod(out, idlen);
  out.write(qubit_id_.data(), idlen);
  write_vec(out, xs_);
  write_vec(out, ys_);
  write_vec(out, zs_);
  write_vec(out, values_);
  if (!out) throw std::runtime_error("short write on grid cache " + path);
}

WeightingGrid WeightingGrid::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grid cache " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (std::memcmp(magic, kGridMagic, sizeof magic) != 0) {
    throw std::runtime_error("grid cache has wrong magic/version: " + path);
  }
  WeightingGrid g;
  read_pod(in, g.key_hash_);
  std::int32_t ki = 0;
  read_pod(in, ki);
  g.k_interface_ = ki;
  read_pod(in, g.residual_);
  std::int32_t it = 0;
  read_pod(in, it);
  g.iterations_ = it;
  std::uint32_t idlen = 0;
  read_pod(in, idlen);
  g.qubit_id_.resize(idlen);
  in.read(g.qubit_id_.data(), idlen);
  g.xs_ = read_vec(in);
  g.ys_ = read_vec(in);
  g.zs_ = read_vec(in);
  g.values_ = read_vec(in);
  if (!in) throw std::runtime_error("short read on grid cache " + path);
  if (g.values_.size() != g.xs_.size() * g.ys_.size() * g.zs_.size()) {
    throw std::runtime_error("grid cache is inconsistent: " + path);
  }
  g.build_lookup();
  return g;
}

WeightingGrid solve_or_load(const ChipLayout& layout, const std::string& qubit_id,
                            const GridSpec& spec, const std::string& cache_dir,
                            const SolveOptions& options) {
  const std::uint64_t key = spec.key_hash(layout.substrate, layout.qubit(qubit_id));
  std::string path;
  if (!cache_dir.empty()) {
    std::filesystem::create_directories(cache_dir);
    char name[64];
    std::snprintf(name, sizeof name, "/wf_%016llx.bin", static_cast<unsigned long long>(key));
    path = cache_dir + name;
    std::ifstream probe(path, std::ios::binary);
    if (probe.good()) {
      probe.close();
      WeightingGrid g = WeightingGrid::load(path);
      if (g.key_hash() == key) return g;
    }
  }
  WeightingGrid g = solve_weighting(layout, qubit_id, spec, options);
  if (!path.empty()) g.save(path);
  return g;
}

}  // namespace qburst
