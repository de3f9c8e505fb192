#ifndef FLOWTIE_SPECIMEN_HPP
#define FLOWTIE_SPECIMEN_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowtie/field.hpp"

namespace flowtie {

inline const std::vector<std::string> kSupportedElements = {"Ga", "As", "Sr", "Ti", "O"};

struct Atom {
  std::string element;           // one of kSupportedElements
  std::array<double, 3> frac;    // fractional coordinates in [0, 1)
};

// Orthogonal periodic unit cell plus atom list.
struct CrystalStructure {
  std::string name;
  std::array<double, 3> cell = {0, 0, 0};  // a, b, c in Angstrom
  std::vector<Atom> atoms;

  void validate(bool allow_empty = false) const;
};

// GaAs (zinc-blende, a = 5.6533) or SrTiO3 (perovskite, a = 3.905).
CrystalStructure preset_structure(const std::string& name);

enum class Motif { Rocksalt, Zincblende, Perovskite };

struct RandomCubicParams {
  double a_min = 3.0, a_max = 7.0;          // lattice range, Angstrom
  std::optional<Motif> motif;               // drawn from the seed when unset
};

// Seeded procedural cubic structure; deterministic in the seed.
CrystalStructure random_cubic(std::uint64_t seed, const RandomCubicParams& params = {});

// JSON structure document {name, cell:[a,b,c], atoms:[{element, frac:[x,y,z]}]}.
CrystalStructure load_structure_json(const std::string& path);
void save_structure_json(const CrystalStructure& s, const std::string& path);

// Sliced projected potentials V_z (V.Angstrom per slab) on an N x N grid.
struct PotentialSlices {
  Grid2 grid;
  std::vector<std::vector<double>> slabs;  // m slabs, each grid.npix() values
  double delta_z = 0.0;                    // slice thickness, Angstrom
  double sigma = 0.0;                      // interaction constant, rad/(V.Angstrom)
  double lambda = 0.0;                     // electron wavelength, Angstrom

  int n_slices() const { return int(slabs.size()); }
  double thickness() const { return delta_z * double(slabs.size()); }

  // Transmission function of slab k: exp(i sigma V_z), unit modulus everywhere.
  ComplexField transmission(int k) const;

  // sigma * sum_k V_z,k
  ScalarField projected_phase() const;
};

// lambda(kV) = 12.2639 / sqrt(V (1 + 0.97845e-6 V)) Angstrom, V in volts.
double electron_wavelength(double accel_kv);

// Relativistic interaction constant, rad/(V.Angstrom).
double interaction_constant(double accel_kv);

// Rasterize the structure into slices. pitch should be cell_a / n so the grid
// tiles the cell; atoms assigned to slabs by floor(z / delta_z).
PotentialSlices potential_slices(const CrystalStructure& s, int n, double pitch,
                                 double delta_z, int n_cells_z, double accel_kv);

// Projected-potential kernel v_z(r) for one atom of the given element, and its
// closed-form plane integral (used by tests as an oracle).
double atomic_projected_potential(const std::string& element, double r2);
double atomic_kernel_integral(const std::string& element);

}  // namespace flowtie

#endif
