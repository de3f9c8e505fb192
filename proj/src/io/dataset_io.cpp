#include "flowtie/io/dataset_io.hpp"

#include <filesystem>

namespace flowtie::io {

void save_dataset(const FourDDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  Manifest m;
  auto& md = m.metadata();
  md["kind"] = "fourd_dataset";
  md["structure_name"] = ds.structure_name;
  md["det_n_x"] = ds.det_grid.nx;
  md["det_n_y"] = ds.det_grid.ny;
  md["det_pitch_x"] = ds.det_grid.pitch_x;
  md["det_pitch_y"] = ds.det_grid.pitch_y;
  md["scan_sy"] = ds.scan.sy;
  md["scan_sx"] = ds.scan.sx;
  md["scan_step_px_y"] = ds.scan.step_px_y;
  md["scan_step_px_x"] = ds.scan.step_px_x;
  md["lambda"] = ds.lambda;
  md["sigma"] = ds.sigma;
  md["semi_angle_mrad"] = ds.semi_angle_mrad;
  md["delta_z_defocus"] = ds.delta_z_defocus;
  md["slice_dz"] = ds.slice_dz;
  md["n_slices"] = ds.n_slices;
  md["thickness"] = ds.thickness();

  std::uint64_t nq = std::uint64_t(ds.n_channels());
  std::uint64_t sy = std::uint64_t(ds.scan.sy), sx = std::uint64_t(ds.scan.sx);
  m.add_tensor(dir, "i_minus", make_f64({nq, sy, sx}, ds.i_minus));
  m.add_tensor(dir, "i_zero", make_f64({nq, sy, sx}, ds.i_zero));
  m.add_tensor(dir, "i_plus", make_f64({nq, sy, sx}, ds.i_plus));
  m.add_tensor(dir, "phase_gt", make_f64({nq, sy, sx}, ds.phase_gt));
  m.add_tensor(dir, "vfield_gt", make_f64({2, nq, sy, sx}, ds.vfield_gt));
  m.add_tensor(dir, "proj_phase_gt", make_f64({sy, sx}, ds.proj_phase_gt));
  m.save(dir + "/manifest.json");
}

FourDDataset load_dataset(const std::string& dir) {
  Manifest m = Manifest::load(dir + "/manifest.json");
  const auto& md = m.metadata();
  if (md.at("kind").get<std::string>() != "fourd_dataset")
    throw std::runtime_error("not a 4D dataset: " + dir);

  FourDDataset ds;
  ds.det_grid = Grid2(md.at("det_n_x").get<int>(), md.at("det_n_y").get<int>(),
                      md.at("det_pitch_x").get<double>(), md.at("det_pitch_y").get<double>());
  ds.scan.sy = md.at("scan_sy").get<int>();
  ds.scan.sx = md.at("scan_sx").get<int>();
  ds.scan.step_px_y = md.at("scan_step_px_y").get<int>();
  ds.scan.step_px_x = md.at("scan_step_px_x").get<int>();
  ds.scan.step_y = ds.scan.step_px_y * ds.det_grid.pitch_y;
  ds.scan.step_x = ds.scan.step_px_x * ds.det_grid.pitch_x;
  ds.lambda = md.at("lambda").get<double>();
  ds.sigma = md.at("sigma").get<double>();
  ds.semi_angle_mrad = md.at("semi_angle_mrad").get<double>();
  ds.delta_z_defocus = md.at("delta_z_defocus").get<double>();
  ds.slice_dz = md.at("slice_dz").get<double>();
  ds.n_slices = md.at("n_slices").get<int>();
  ds.structure_name = md.at("structure_name").get<std::string>();

  ds.i_minus = m.load_tensor(dir, "i_minus").as_f64();
  ds.i_zero = m.load_tensor(dir, "i_zero").as_f64();
  ds.i_plus = m.load_tensor(dir, "i_plus").as_f64();
  ds.phase_gt = m.load_tensor(dir, "phase_gt").as_f64();
  ds.vfield_gt = m.load_tensor(dir, "vfield_gt").as_f64();
  ds.proj_phase_gt = m.load_tensor(dir, "proj_phase_gt").as_f64();

  std::size_t expect = ds.stack_size();
  if (ds.i_zero.size() != expect || ds.vfield_gt.size() != 2 * expect)
    throw std::runtime_error("dataset tensor sizes inconsistent with metadata: " + dir);
  return ds;
}

}  // namespace flowtie::io
