#include "flowtie/specimen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace flowtie {

namespace {

// Gaussian component of the scattering-factor parameterization:
//   v_z(r) = K * sum_i c_i / d_i * exp(-pi^2 r^2 / d_i),   K = 2 pi^2 a0 e
// with a0 = 0.529177 A and e = 14.3996 V.A. The c_i are dimensionless, d_i in
// A^2, widths chosen wide enough to be well sampled at desk-scale pitches.
constexpr double kKernelPrefactor = 2.0 * std::numbers::pi * std::numbers::pi * 0.529177 * 14.3996;

struct GaussianTriplet {
  std::array<double, 3> c;
  std::array<double, 3> d;
};

const std::map<std::string, GaussianTriplet>& kernel_table() {
  static const std::map<std::string, GaussianTriplet> table = {
      {"Ga", {{3.10, 2.48, 2.48}, {2.5, 4.0, 8.0}}},
      {"As", {{3.30, 2.64, 2.64}, {2.6, 4.2, 8.5}}},
      {"Sr", {{3.80, 3.04, 3.04}, {2.8, 4.5, 9.0}}},
      {"Ti", {{2.20, 1.76, 1.76}, {2.5, 4.0, 8.0}}},
      {"O", {{0.80, 0.64, 0.64}, {2.5, 3.5, 7.0}}},
  };
  return table;
}

const GaussianTriplet& kernel_for(const std::string& element) {
  auto it = kernel_table().find(element);
  if (it == kernel_table().end())
    throw std::invalid_argument("unsupported element: " + element);
  return it->second;
}

double wrap_frac(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

const std::array<std::array<double, 3>, 4> kFccOffsets = {
    {{0.0, 0.0, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}}};

}  // namespace

void CrystalStructure::validate(bool allow_empty) const {
  for (double c : cell)
    if (!(c > 0.0)) throw std::invalid_argument("CrystalStructure: cell edges must be > 0");
  if (atoms.empty() && !allow_empty)
    throw std::invalid_argument("CrystalStructure: at least one atom required");
  for (const Atom& a : atoms) {
    kernel_for(a.element);
    for (double f : a.frac)
      if (!(f >= 0.0 && f < 1.0))
        throw std::invalid_argument("CrystalStructure: fractional coordinate outside [0,1)");
  }
}

CrystalStructure preset_structure(const std::string& name) {
  CrystalStructure s;
  if (name == "GaAs") {
    s.name = "GaAs";
    double a = 5.6533;
    s.cell = {a, a, a};
    for (const auto& o : kFccOffsets) {
      s.atoms.push_back({"Ga", {o[0], o[1], o[2]}});
      s.atoms.push_back({"As",
                         {wrap_frac(o[0] + 0.25), wrap_frac(o[1] + 0.25), wrap_frac(o[2] + 0.25)}});
    }
  } else if (name == "SrTiO3") {
    s.name = "SrTiO3";
    double a = 3.905;
    s.cell = {a, a, a};
    s.atoms.push_back({"Sr", {0.0, 0.0, 0.0}});
    s.atoms.push_back({"Ti", {0.5, 0.5, 0.5}});
    s.atoms.push_back({"O", {0.5, 0.5, 0.0}});
    s.atoms.push_back({"O", {0.5, 0.0, 0.5}});
    s.atoms.push_back({"O", {0.0, 0.5, 0.5}});
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'; available: GaAs, SrTiO3");
  }
  s.validate();
  return s;
}

CrystalStructure random_cubic(std::uint64_t seed, const RandomCubicParams& params) {
  if (params.a_min < 3.0 || params.a_max > 7.0 || params.a_min > params.a_max)
    throw std::invalid_argument("random_cubic: lattice range must lie within [3, 7] A");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> a_dist(params.a_min, params.a_max);
  double a = a_dist(rng);

  Motif motif;
  if (params.motif) {
    motif = *params.motif;
  } else {
    std::uniform_int_distribution<int> m_dist(0, 2);
    motif = static_cast<Motif>(m_dist(rng));
  }

  std::uniform_int_distribution<int> e_dist(0, int(kSupportedElements.size()) - 1);
  std::string el_a = kSupportedElements[e_dist(rng)];
  std::string el_b = kSupportedElements[e_dist(rng)];
  while (el_b == el_a) el_b = kSupportedElements[e_dist(rng)];

  CrystalStructure s;
  s.cell = {a, a, a};
  switch (motif) {
    case Motif::Rocksalt:
      s.name = "rocksalt_" + el_a + el_b + "_" + std::to_string(seed);
      for (const auto& o : kFccOffsets) {
        s.atoms.push_back({el_a, {o[0], o[1], o[2]}});
        s.atoms.push_back({el_b, {wrap_frac(o[0] + 0.5), o[1], o[2]}});
      }
      break;
    case Motif::Zincblende:
      s.name = "zincblende_" + el_a + el_b + "_" + std::to_string(seed);
      for (const auto& o : kFccOffsets) {
        s.atoms.push_back({el_a, {o[0], o[1], o[2]}});
        s.atoms.push_back({el_b,
                           {wrap_frac(o[0] + 0.25), wrap_frac(o[1] + 0.25), wrap_frac(o[2] + 0.25)}});
      }
      break;
    case Motif::Perovskite: {
      std::string el_o = kSupportedElements[e_dist(rng)];
      s.name = "perovskite_" + el_a + el_b + el_o + "_" + std::to_string(seed);
      s.atoms.push_back({el_a, {0.0, 0.0, 0.0}});
      s.atoms.push_back({el_b, {0.5, 0.5, 0.5}});
      s.atoms.push_back({el_o, {0.5, 0.5, 0.0}});
      s.atoms.push_back({el_o, {0.5, 0.0, 0.5}});
      s.atoms.push_back({el_o, {0.0, 0.5, 0.5}});
      break;
    }
  }
  s.validate();
  return s;
}

CrystalStructure load_structure_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open structure file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  CrystalStructure s;
  s.name = j.at("name").get<std::string>();
  auto cell = j.at("cell");
  if (cell.size() != 3) throw std::runtime_error("structure file: cell must have 3 entries");
  for (int i = 0; i < 3; ++i) s.cell[i] = cell[i].get<double>();
  for (const auto& ja : j.at("atoms")) {
    Atom a;
    a.element = ja.at("element").get<std::string>();
    auto frac = ja.at("frac");
    if (frac.size() != 3) throw std::runtime_error("structure file: frac must have 3 entries");
    for (int i = 0; i < 3; ++i) a.frac[i] = frac[i].get<double>();
    s.atoms.push_back(a);
  }
  s.validate();
  return s;
}

void save_structure_json(const CrystalStructure& s, const std::string& path) {
  nlohmann::json j;
  j["name"] = s.name;
  j["cell"] = {s.cell[0], s.cell[1], s.cell[2]};
  j["atoms"] = nlohmann::json::array();
  for (const Atom& a : s.atoms)
    j["atoms"].push_back({{"element", a.element}, {"frac", {a.frac[0], a.frac[1], a.frac[2]}}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write structure file: " + path);
  out << j.dump(2) << "\n";
}

double electron_wavelength(double accel_kv) {
  if (!(accel_kv > 0.0)) throw std::invalid_argument("accel_kv must be > 0");
  double volts = accel_kv * 1000.0;
  return 12.2639 / std::sqrt(volts * (1.0 + 0.97845e-6 * volts));
}

double interaction_constant(double accel_kv) {
  double volts = accel_kv * 1000.0;
  double lambda = electron_wavelength(accel_kv);
  const double mc2 = 510998.95;  // electron rest energy, eV
  // sigma = 2 pi / (lambda V) * (mc^2 + eV) / (2 mc^2 + eV)
  return 2.0 * std::numbers::pi / (lambda * volts) * (mc2 + volts) / (2.0 * mc2 + volts);
}

double atomic_projected_potential(const std::string& element, double r2) {
  const GaussianTriplet& k = kernel_for(element);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double v = 0.0;
  for (int i = 0; i < 3; ++i) v += k.c[i] / k.d[i] * std::exp(-pi2 * r2 / k.d[i]);
  return kKernelPrefactor * v;
}

double atomic_kernel_integral(const std::string& element) {
  // integral of (c/d) exp(-pi^2 r^2 / d) over the plane is c / pi
  const GaussianTriplet& k = kernel_for(element);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += k.c[i];
  return kKernelPrefactor * s / std::numbers::pi;
}

ComplexField PotentialSlices::transmission(int k) const {
  const std::vector<double>& vz = slabs.at(k);
  ComplexField o(grid);
  for (std::size_t i = 0; i < vz.size(); ++i) {
    double phase = sigma * vz[i];
    o.v[i] = cdouble(std::cos(phase), std::sin(phase));
  }
  return o;
}

ScalarField PotentialSlices::projected_phase() const {
  ScalarField p(grid);
  for (const auto& slab : slabs)
    for (std::size_t i = 0; i < slab.size(); ++i) p.v[i] += sigma * slab[i];
  return p;
}

PotentialSlices potential_slices(const CrystalStructure& s, int n, double pitch,
                                 double delta_z, int n_cells_z, double accel_kv) {
  s.validate(true);
  if (n < 8) throw std::invalid_argument("potential_slices: n must be >= 8");
  if (!(delta_z > 0.0)) throw std::invalid_argument("potential_slices: delta_z must be > 0");
  if (n_cells_z < 1) throw std::invalid_argument("potential_slices: n_cells_z must be >= 1");

  double thickness = s.cell[2] * n_cells_z;
  double m_real = thickness / delta_z;
  int m = int(std::lround(m_real));
  if (m < 1 || std::abs(m_real - m) > 1e-9)
    throw std::invalid_argument("potential_slices: delta_z must divide the total thickness");

  PotentialSlices ps;
  ps.grid = Grid2(n, n, pitch, pitch);
  ps.delta_z = delta_z;
  ps.lambda = electron_wavelength(accel_kv);
  ps.sigma = interaction_constant(accel_kv);
  ps.slabs.assign(m, std::vector<double>(ps.grid.npix(), 0.0));

  double lx = ps.grid.extent_x();
  double ly = ps.grid.extent_y();

  // lateral extent must cover an integer number of unit cells
  int ncx = int(std::lround(lx / s.cell[0]));
  int ncy = int(std::lround(ly / s.cell[1]));
  if (ncx < 1 || ncy < 1 || std::abs(ncx * s.cell[0] - lx) > 1e-6 ||
      std::abs(ncy * s.cell[1] - ly) > 1e-6)
    throw std::invalid_argument(
        "potential_slices: n*pitch must cover an integer number of unit cells");

  for (int cz = 0; cz < n_cells_z; ++cz) {
    for (const Atom& atom : s.atoms) {
      double z = (atom.frac[2] + cz) * s.cell[2];
      int k = int(std::floor(z / delta_z));
      k = std::min(std::max(k, 0), m - 1);
      std::vector<double>& slab = ps.slabs[k];

      for (int cy = 0; cy < ncy; ++cy) {
        for (int cx = 0; cx < ncx; ++cx) {
          double ax = (wrap_frac(atom.frac[0]) + cx) * s.cell[0];
          double ay = (wrap_frac(atom.frac[1]) + cy) * s.cell[1];
          // sum over periodic images; kernels decay to < 1e-12 within 3 extents
          for (int iy = 0; iy < n; ++iy) {
            double py = iy * pitch;
            for (int ix = 0; ix < n; ++ix) {
              double px = ix * pitch;
              double acc = 0.0;
              for (int wy = -3; wy <= 3; ++wy) {
                double dy = py - ay + wy * ly;
                for (int wx = -3; wx <= 3; ++wx) {
                  double dx = px - ax + wx * lx;
                  acc += atomic_projected_potential(atom.element, dx * dx + dy * dy);
                }
              }
              slab[ps.grid.idx(ix, iy)] += acc;
            }
          }
        }
      }
    }
  }
  return ps;
}

}  // namespace flowtie
