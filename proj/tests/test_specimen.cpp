#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "flowtie/specimen.hpp"
#include "oracles.hpp"

using namespace flowtie;

TEST_CASE("GaAs preset: zinc-blende, a = 5.6533, 8 atoms per cell") {
  CrystalStructure s = preset_structure("GaAs");
  CHECK(s.cell[0] == doctest::Approx(5.6533));
  CHECK(s.cell[1] == doctest::Approx(5.6533));
  CHECK(s.cell[2] == doctest::Approx(5.6533));
  CHECK(s.atoms.size() == 8);
  int ga = 0, as = 0;
  for (const Atom& a : s.atoms) {
    if (a.element == "Ga") ++ga;
    if (a.element == "As") ++as;
  }
  CHECK(ga == 4);
  CHECK(as == 4);
}

TEST_CASE("SrTiO3 preset: perovskite, a = 3.905, 1:1:3 stoichiometry") {
  CrystalStructure s = preset_structure("SrTiO3");
  CHECK(s.cell[0] == doctest::Approx(3.905));
  CHECK(s.atoms.size() == 5);
  int sr = 0, ti = 0, o = 0;
  for (const Atom& a : s.atoms) {
    if (a.element == "Sr") ++sr;
    if (a.element == "Ti") ++ti;
    if (a.element == "O") ++o;
  }
  CHECK(sr == 1);
  CHECK(ti == 1);
  CHECK(o == 3);
}

TEST_CASE("unknown preset is rejected with the available list") {
  CHECK_THROWS_WITH_AS(preset_structure("NaCl"),
                       doctest::Contains("GaAs, SrTiO3"), std::invalid_argument);
}

TEST_CASE("random_cubic is deterministic in the seed") {
  CrystalStructure a = random_cubic(1234), b = random_cubic(1234);
  CHECK(a.name == b.name);
  CHECK(a.cell == b.cell);
  REQUIRE(a.atoms.size() == b.atoms.size());
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    CHECK(a.atoms[i].element == b.atoms[i].element);
    CHECK(a.atoms[i].frac == b.atoms[i].frac);
  }
}

TEST_CASE("random_cubic sweep: lattice in range, structures mostly distinct") {
  std::set<std::string> names;
  std::set<double> lattices;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CrystalStructure s = random_cubic(seed);
    CHECK(s.cell[0] >= 3.0);
    CHECK(s.cell[0] <= 7.0);
    CHECK_NOTHROW(s.validate());
    names.insert(s.name);
    lattices.insert(s.cell[0]);
  }
  CHECK(names.size() >= 90);
  CHECK(lattices.size() >= 90);
}

TEST_CASE("random_cubic rejects a lattice range outside [3, 7]") {
  RandomCubicParams p;
  p.a_min = 2.0;
  CHECK_THROWS_AS(random_cubic(1, p), std::invalid_argument);
}

TEST_CASE("electron wavelength and interaction constant match the constants oracle") {
  // reference values computed independently from
  // lambda = 12.2639 / sqrt(V (1 + 0.97845e-6 V)),
  // sigma = 2 pi / (lambda V) (mc^2 + eV) / (2 mc^2 + eV), mc^2 = 510998.95 eV
  CHECK(electron_wavelength(300.0) == doctest::Approx(0.0196869700756145).epsilon(1e-12));
  CHECK(interaction_constant(300.0) == doctest::Approx(0.000652633344559583).epsilon(1e-12));
  CHECK(electron_wavelength(80.0) == doctest::Approx(0.0417559758440414).epsilon(1e-12));
  CHECK(interaction_constant(80.0) == doctest::Approx(0.00100873522367823).epsilon(1e-12));
}

TEST_CASE("vacuum structure gives zero potential and unit transmission") {
  CrystalStructure vac;
  vac.name = "vacuum";
  vac.cell = {4.0, 4.0, 4.0};
  PotentialSlices ps = potential_slices(vac, 16, 0.25, 4.0, 1, 300.0);
  REQUIRE(ps.n_slices() == 1);
  for (double v : ps.slabs[0]) CHECK(v == 0.0);
  ComplexField o = ps.transmission(0);
  for (const cdouble& t : o.v) CHECK(std::abs(t - cdouble(1.0, 0.0)) < 1e-15);
}

TEST_CASE("single centered atom: peak at center, 4-fold symmetric") {
  CrystalStructure s;
  s.name = "one_atom";
  s.cell = {4.0, 4.0, 4.0};
  s.atoms.push_back({"O", {0.5, 0.5, 0.5}});
  PotentialSlices ps = potential_slices(s, 16, 0.25, 4.0, 1, 300.0);
  const auto& v = ps.slabs[0];
  std::size_t peak = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > v[peak]) peak = i;
  CHECK(peak == ps.grid.idx(8, 8));
  // mirror symmetry about the atom pixel
  for (int d = 1; d < 8; ++d) {
    CHECK(ps.slabs[0][ps.grid.idx(8 + d, 8)] ==
          doctest::Approx(ps.slabs[0][ps.grid.idx(8 - d, 8)]).epsilon(1e-12));
    CHECK(ps.slabs[0][ps.grid.idx(8, 8 + d)] ==
          doctest::Approx(ps.slabs[0][ps.grid.idx(8, 8 - d)]).epsilon(1e-12));
    CHECK(ps.slabs[0][ps.grid.idx(8 + d, 8)] ==
          doctest::Approx(ps.slabs[0][ps.grid.idx(8, 8 + d)]).epsilon(1e-12));
  }
}

TEST_CASE("GaAs 1-cell N=16: pixel sum matches the closed-form kernel integrals") {
  CrystalStructure s = preset_structure("GaAs");
  double pitch = s.cell[0] / 16.0;
  PotentialSlices ps = potential_slices(s, 16, pitch, s.cell[2], 1, 300.0);
  double pixel_sum = 0.0;
  for (const auto& slab : ps.slabs)
    for (double v : slab) pixel_sum += v * pitch * pitch;
  double expect = 4.0 * atomic_kernel_integral("Ga") + 4.0 * atomic_kernel_integral("As");
  CHECK(std::abs(pixel_sum - expect) / expect < 1e-6);
}

TEST_CASE("shifting all atoms by a full lattice vector leaves V_z bit-identical") {
  CrystalStructure s = preset_structure("SrTiO3");
  CrystalStructure shifted = s;
  // +1 full cell in x is a no-op on fractional coordinates mod 1
  for (Atom& a : shifted.atoms) a.frac[0] = a.frac[0] + 1.0 - std::floor(a.frac[0] + 1.0);
  double pitch = s.cell[0] / 16.0;
  PotentialSlices p1 = potential_slices(s, 16, pitch, s.cell[2], 1, 300.0);
  PotentialSlices p2 = potential_slices(shifted, 16, pitch, s.cell[2], 1, 300.0);
  for (int k = 0; k < p1.n_slices(); ++k)
    for (std::size_t i = 0; i < p1.slabs[k].size(); ++i)
      CHECK(p1.slabs[k][i] == p2.slabs[k][i]);
}

TEST_CASE("potential is additive over structure union") {
  CrystalStructure a, b, both;
  a.cell = b.cell = both.cell = {4.0, 4.0, 4.0};
  a.name = "a";
  b.name = "b";
  both.name = "both";
  a.atoms.push_back({"Ti", {0.25, 0.25, 0.1}});
  b.atoms.push_back({"O", {0.75, 0.5, 0.6}});
  both.atoms = a.atoms;
  both.atoms.push_back(b.atoms[0]);
  double pitch = 0.25;
  PotentialSlices pa = potential_slices(a, 16, pitch, 4.0, 1, 300.0);
  PotentialSlices pb = potential_slices(b, 16, pitch, 4.0, 1, 300.0);
  PotentialSlices pc = potential_slices(both, 16, pitch, 4.0, 1, 300.0);
  for (std::size_t i = 0; i < pc.slabs[0].size(); ++i)
    CHECK(pc.slabs[0][i] == doctest::Approx(pa.slabs[0][i] + pb.slabs[0][i]).epsilon(1e-12));
}

TEST_CASE("transmission has unit modulus everywhere") {
  CrystalStructure s = preset_structure("GaAs");
  double pitch = s.cell[0] / 16.0;
  PotentialSlices ps = potential_slices(s, 16, pitch, s.cell[2], 2, 300.0);
  for (int k = 0; k < ps.n_slices(); ++k) {
    ComplexField o = ps.transmission(k);
    for (const cdouble& t : o.v) CHECK(std::abs(std::abs(t) - 1.0) < 1e-12);
  }
}

TEST_CASE("doubling n_cells_z doubles the slab count and repeats slab content") {
  CrystalStructure s = preset_structure("SrTiO3");
  double pitch = s.cell[0] / 16.0;
  PotentialSlices p1 = potential_slices(s, 16, pitch, s.cell[2], 2, 300.0);
  PotentialSlices p2 = potential_slices(s, 16, pitch, s.cell[2], 4, 300.0);
  CHECK(p2.n_slices() == 2 * p1.n_slices());
  for (int k = 0; k < p1.n_slices(); ++k)
    for (std::size_t i = 0; i < p1.slabs[k].size(); ++i)
      CHECK(p1.slabs[k][i] == p2.slabs[k][i]);
}

TEST_CASE("delta_z must divide the thickness; lateral extent must cover whole cells") {
  CrystalStructure s = preset_structure("GaAs");
  CHECK_THROWS_AS(potential_slices(s, 16, s.cell[0] / 16.0, 3.0, 1, 300.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(potential_slices(s, 16, 0.3, s.cell[2], 1, 300.0), std::invalid_argument);
}

TEST_CASE("structure JSON round trip") {
  CrystalStructure s = random_cubic(99);
  std::filesystem::path path = std::filesystem::temp_directory_path() / "structure_rt.json";
  save_structure_json(s, path.string());
  CrystalStructure back = load_structure_json(path.string());
  CHECK(back.name == s.name);
  CHECK(back.cell == s.cell);
  REQUIRE(back.atoms.size() == s.atoms.size());
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    CHECK(back.atoms[i].element == s.atoms[i].element);
    for (int d = 0; d < 3; ++d)
      CHECK(back.atoms[i].frac[d] == doctest::Approx(s.atoms[i].frac[d]).epsilon(1e-12));
  }
  std::filesystem::remove(path);
}

TEST_CASE("structure loader rejects unsupported elements") {
  std::filesystem::path path = std::filesystem::temp_directory_path() / "structure_bad.json";
  {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    std::fputs(R"({"name":"x","cell":[4,4,4],"atoms":[{"element":"Xe","frac":[0,0,0]}]})", f);
    std::fclose(f);
  }
  CHECK_THROWS(load_structure_json(path.string()));
  std::filesystem::remove(path);
}
