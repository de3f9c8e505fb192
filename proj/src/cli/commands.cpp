#include "flowtie/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flowtie/io/container.hpp"
#include "flowtie/io/dataset_io.hpp"
#include "flowtie/io/pgm.hpp"
#include "flowtie/recon.hpp"
#include "flowtie/tie.hpp"

namespace flowtie::cli {

namespace fs = std::filesystem;

namespace {

std::string thickness_tag(int cells) { return "t" + std::to_string(cells); }

FourDDataset simulate_structure(const CrystalStructure& s, const GenDataConfig& cfg,
                                int thickness_cells) {
  double pitch = s.cell[0] / cfg.n;
  PotentialSlices slices =
      potential_slices(s, cfg.n, pitch, s.cell[2], thickness_cells, cfg.accel_kv);
  ScanGrid scan = make_scan_grid(slices.grid, cfg.scan, cfg.scan);
  SimulateParams sp;
  sp.semi_angle_mrad = cfg.semi_angle_mrad;
  sp.delta_z_defocus = cfg.delta_z_defocus;
  return simulate_4d(slices, sp, scan, s.name);
}

}  // namespace

void cmd_gen_data(const GenDataConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("gen-data: output directory required");
  if (cfg.n_structures < 1) throw std::invalid_argument("gen-data: need at least one structure");
  fs::create_directories(cfg.out_dir);

  // per-structure seeds and the 0.9/0.1 split: pure functions of the seed
  std::mt19937_64 seed_rng(cfg.seed);
  std::vector<std::uint64_t> struct_seeds(cfg.n_structures);
  for (auto& s : struct_seeds) s = seed_rng();

  std::vector<int> order(cfg.n_structures);
  for (int i = 0; i < cfg.n_structures; ++i) order[i] = i;
  std::mt19937_64 split_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(order.begin(), order.end(), split_rng);
  int n_val = std::max(1, int(std::lround(0.1 * cfg.n_structures)));
  std::vector<std::string> split(cfg.n_structures, "train");
  for (int i = cfg.n_structures - n_val; i < cfg.n_structures; ++i) split[order[i]] = "val";

  nlohmann::json corpus;
  corpus["metadata"] = {{"seed", cfg.seed},
                        {"n_structures", cfg.n_structures},
                        {"n", cfg.n},
                        {"scan", cfg.scan},
                        {"accel_kv", cfg.accel_kv},
                        {"semi_angle_mrad", cfg.semi_angle_mrad},
                        {"delta_z_defocus", cfg.delta_z_defocus},
                        {"thickness_cells", cfg.thickness_cells}};
  corpus["datasets"] = nlohmann::json::array();

  for (int i = 0; i < cfg.n_structures; ++i) {
    CrystalStructure s = random_cubic(struct_seeds[i]);
    for (int cells : cfg.thickness_cells) {
      std::ostringstream dir;
      dir << "s" << std::setw(3) << std::setfill('0') << i << "_" << thickness_tag(cells);
      FourDDataset ds = simulate_structure(s, cfg, cells);
      io::save_dataset(ds, cfg.out_dir + "/" + dir.str());
      corpus["datasets"].push_back({{"dir", dir.str()},
                                    {"name", s.name},
                                    {"split", split[i]},
                                    {"thickness_cells", cells},
                                    {"structure_seed", struct_seeds[i]}});
    }
  }

  if (cfg.write_presets) {
    for (const std::string& preset : {std::string("GaAs"), std::string("SrTiO3")}) {
      CrystalStructure s = preset_structure(preset);
      for (int cells : cfg.thickness_cells) {
        std::string dir = "test_" + preset + "_" + thickness_tag(cells);
        FourDDataset ds = simulate_structure(s, cfg, cells);
        io::save_dataset(ds, cfg.out_dir + "/" + dir);
        corpus["datasets"].push_back({{"dir", dir},
                                      {"name", preset},
                                      {"split", "test"},
                                      {"thickness_cells", cells}});
      }
    }
  }

  std::ofstream out(cfg.out_dir + "/corpus.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write corpus manifest");
  out << corpus.dump(2) << "\n";
}

Corpus Corpus::load(const std::string& dir) {
  std::ifstream in(dir + "/corpus.json");
  if (!in) throw std::runtime_error("cannot open corpus manifest in " + dir);
  nlohmann::json j = nlohmann::json::parse(in);
  Corpus c;
  c.root = dir;
  for (const auto& e : j.at("datasets")) {
    CorpusEntry entry;
    entry.dir = e.at("dir").get<std::string>();
    entry.name = e.at("name").get<std::string>();
    entry.split = e.at("split").get<std::string>();
    entry.thickness_cells = e.at("thickness_cells").get<int>();
    c.entries.push_back(entry);
  }
  return c;
}

std::vector<CorpusEntry> Corpus::with_split(const std::string& split) const {
  std::vector<CorpusEntry> out;
  for (const CorpusEntry& e : entries)
    if (e.split == split) out.push_back(e);
  return out;
}

void cmd_train(const TrainCmdConfig& cfg) {
  Corpus corpus = Corpus::load(cfg.corpus_dir);
  std::vector<nn::TrainSample> train, val;
  double raw_sum = 0.0, raw_sum2 = 0.0;
  std::size_t raw_n = 0;
  int c_in = -1;
  for (const CorpusEntry& e : corpus.entries) {
    if (e.split == "test") continue;
    FourDDataset ds = io::load_dataset(corpus.root + "/" + e.dir);
    if (c_in < 0) c_in = ds.n_channels();
    if (ds.n_channels() != c_in)
      throw std::runtime_error("train: corpus geometry is not uniform");
    nn::TrainSample s = nn::make_train_sample(ds);
    if (e.split == "train") {
      for (double v : s.i_deriv.data) {
        raw_sum += v;
        raw_sum2 += v * v;
        ++raw_n;
      }
      train.push_back(std::move(s));
    } else {
      val.push_back(std::move(s));
    }
  }
  if (train.empty()) throw std::runtime_error("train: corpus has no training datasets");

  nn::TrainState state;
  nn::TrainConfig tc = cfg.train;
  if (!cfg.resume_from.empty()) {
    nn::TrainConfig saved;
    state = nn::load_checkpoint(cfg.resume_from, &saved);
    if (state.model.c_in != c_in)
      throw std::runtime_error("train: checkpoint geometry does not match corpus");
    tc.depth = saved.depth;
    tc.kernel = saved.kernel;
  } else {
    state = nn::init_train_state(c_in, tc);
    double mu = raw_sum / double(raw_n);
    state.model.input_mean = mu;
    state.model.input_std = std::sqrt(std::max(0.0, raw_sum2 / double(raw_n) - mu * mu));
  }

  int remaining = tc.epochs - state.epoch;
  if (remaining > 0) nn::train_epochs(state, train, val, tc, remaining, cfg.verbose);

  fs::create_directories(cfg.checkpoint_dir);
  nn::save_checkpoint(state, tc, cfg.checkpoint_dir);
  nn::write_loss_curves(state.curves, cfg.checkpoint_dir + "/curves.tsv");
}

void cmd_reconstruct(const ReconstructConfig& cfg) {
  FourDDataset ds = io::load_dataset(cfg.dataset_dir);
  ReconResult r;
  if (cfg.method == "tie") {
    TieVariant v = cfg.tie_variant == "teague" ? TieVariant::Teague : TieVariant::Poisson;
    r = tie_reconstruct(ds, cfg.tie_eps, v);
  } else if (cfg.method == "flowtie") {
    if (cfg.checkpoint_dir.empty())
      throw std::invalid_argument("reconstruct: flowtie requires --checkpoint");
    nn::TrainState st = nn::load_checkpoint(cfg.checkpoint_dir);
    nn::FlowModel model = nn::best_model(st);
    r = flowtie_reconstruct(ds, model);
  } else if (cfg.method == "gd") {
    GdOptions opt;
    opt.iters = cfg.gd_iters;
    r = gd_reconstruct(ds, opt);
  } else {
    throw std::invalid_argument("reconstruct: unknown method '" + cfg.method +
                                "' (tie | flowtie | gd)");
  }
  r.config_echo = "method=" + cfg.method + " dataset=" + cfg.dataset_dir;
  save_recon_result(r, cfg.out_dir, cfg.save_matrix);
}

namespace {

BenchCell time_method(const std::string& method, int repeats,
                      const std::function<ReconResult()>& run) {
  BenchCell cell;
  cell.method = method;
  std::vector<double> times;
  try {
    for (int i = 0; i < repeats; ++i) {
      ReconResult r = run();
      times.push_back(r.wall_time);
      cell.mse = r.mse;
    }
  } catch (const std::exception& e) {
    cell.present = false;
    cell.note = e.what();
    return cell;
  }
  cell.present = true;
  cell.repeats = repeats;
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= double(times.size());
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  cell.time_mean = mean;
  cell.time_std = std::sqrt(var / double(times.size()));
  return cell;
}

}  // namespace

BenchReport cmd_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.repeats < 3) throw std::invalid_argument("benchmark: need at least 3 timing repeats");

  std::vector<std::string> dataset_dirs = cfg.dataset_dirs;
  if (dataset_dirs.empty()) {
    Corpus corpus = Corpus::load(cfg.corpus_dir);
    for (const CorpusEntry& e : corpus.with_split("test"))
      dataset_dirs.push_back(corpus.root + "/" + e.dir);
  }
  if (dataset_dirs.empty()) throw std::invalid_argument("benchmark: no test datasets");

  // load the checkpoint once; a missing checkpoint marks flowtie cells absent
  std::optional<nn::FlowModel> model;
  std::string model_note;
  if (!cfg.checkpoint_dir.empty()) {
    try {
      nn::TrainState st = nn::load_checkpoint(cfg.checkpoint_dir);
      model = nn::best_model(st);
    } catch (const std::exception& e) {
      model_note = e.what();
    }
  } else {
    model_note = "no checkpoint provided";
  }

  BenchReport report;
  {
    std::ostringstream env;
    env << "single-threaded cpu, " <<
#if defined(__clang__)
        "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
        "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
        "unknown compiler";
#endif
    report.environment = env.str();
  }

  for (const std::string& dir : dataset_dirs) {
    FourDDataset ds = io::load_dataset(dir);
    BenchRow row;
    row.material = ds.structure_name;
    row.thickness = ds.thickness();

    row.cells.push_back(time_method("tie", cfg.repeats, [&] {
      return tie_reconstruct(ds, cfg.tie_eps);
    }));
    if (model) {
      row.cells.push_back(time_method("flowtie", cfg.repeats, [&] {
        return flowtie_reconstruct(ds, *model);
      }));
    } else {
      BenchCell cell;
      cell.method = "flowtie";
      cell.note = model_note;
      row.cells.push_back(cell);
    }
    row.cells.push_back(time_method("gd", cfg.repeats, [&] {
      GdOptions opt;
      opt.iters = cfg.gd_iters;
      return gd_reconstruct(ds, opt);
    }));
    report.rows.push_back(std::move(row));
  }

  if (!cfg.out_prefix.empty()) {
    std::ofstream jout(cfg.out_prefix + ".json", std::ios::trunc);
    jout << report.to_json();
    std::ofstream tout(cfg.out_prefix + ".txt", std::ios::trunc);
    tout << report.to_text();
  }
  return report;
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(14) << "material" << std::setw(14) << "thickness_A"
      << std::setw(10) << "method" << std::setw(14) << "mse" << std::setw(14) << "time_mean_s"
      << std::setw(14) << "time_std_s" << "\n";
  for (const BenchRow& row : rows) {
    for (const BenchCell& c : row.cells) {
      out << std::left << std::setw(14) << row.material << std::setw(14) << std::setprecision(6)
          << row.thickness << std::setw(10) << c.method;
      if (c.present) {
        out << std::setw(14) << std::setprecision(6) << c.mse << std::setw(14) << c.time_mean
            << std::setw(14) << c.time_std;
      } else {
        out << std::setw(14) << "absent" << std::setw(14) << "-" << std::setw(14) << "-";
      }
      out << "\n";
    }
  }
  out << "environment: " << environment << "\n";
  return out.str();
}

std::string BenchReport::to_json() const {
  nlohmann::json j;
  j["environment"] = environment;
  j["rows"] = nlohmann::json::array();
  for (const BenchRow& row : rows) {
    nlohmann::json jr;
    jr["material"] = row.material;
    jr["thickness"] = row.thickness;
    jr["methods"] = nlohmann::json::array();
    for (const BenchCell& c : row.cells) {
      nlohmann::json jc;
      jc["method"] = c.method;
      jc["present"] = c.present;
      if (c.present) {
        jc["mse"] = c.mse;
        jc["time_mean"] = c.time_mean;
        jc["time_std"] = c.time_std;
        jc["repeats"] = c.repeats;
      } else {
        jc["note"] = c.note;
      }
      jr["methods"].push_back(jc);
    }
    j["rows"].push_back(jr);
  }
  return j.dump(2) + "\n";
}

void cmd_export_viz(const ExportVizConfig& cfg) {
  io::Manifest m = io::Manifest::load(cfg.input_dir + "/manifest.json");

  auto export_scalar = [&](const std::vector<double>& values, int w, int h,
                           const std::string& suffix) {
    std::vector<std::uint8_t> bytes;
    io::PgmNormalization n = io::normalize_to_bytes(values, bytes);
    io::write_pgm(cfg.out_prefix + suffix + ".pgm", w, h, bytes);
    io::write_sidecar(cfg.out_prefix + suffix + ".txt", n);
  };

  if (cfg.what == "proj-phase") {
    std::string name = m.has_tensor("proj_phase_gt") ? "proj_phase_gt" : "phase_proj";
    io::TensorData t = m.load_tensor(cfg.input_dir, name);
    if (t.shape.size() != 2) throw std::runtime_error("export-viz: expected a 2D phase map");
    export_scalar(t.as_f64(), int(t.shape[1]), int(t.shape[0]), "");
  } else if (cfg.what == "diffraction") {
    io::TensorData t = m.load_tensor(cfg.input_dir, "i_zero");
    if (t.shape.size() != 3) throw std::runtime_error("export-viz: expected (N^2, Sy, Sx) stack");
    std::size_t nq = t.shape[0], npos = t.shape[1] * t.shape[2];
    std::vector<double> stack = t.as_f64();
    // scan-averaged pattern reshaped to the detector grid
    std::vector<double> pattern(nq, 0.0);
    for (std::size_t q = 0; q < nq; ++q) {
      for (std::size_t i = 0; i < npos; ++i) pattern[q] += stack[q * npos + i];
      pattern[q] /= double(npos);
    }
    int n = int(std::lround(std::sqrt(double(nq))));
    export_scalar(pattern, n, n, "");
  } else if (cfg.what == "vfield") {
    io::TensorData t = m.load_tensor(cfg.input_dir, "vfield_gt");
    if (t.shape.size() != 4 || t.shape[0] != 2)
      throw std::runtime_error("export-viz: expected (2, N^2, Sy, Sx) stack");
    std::size_t nq = t.shape[1];
    int h = int(t.shape[2]), w = int(t.shape[3]);
    std::size_t npos = std::size_t(h) * w;
    std::vector<double> stack = t.as_f64();
    // channel-averaged components
    std::vector<double> vx(npos, 0.0), vy(npos, 0.0);
    for (std::size_t q = 0; q < nq; ++q) {
      for (std::size_t i = 0; i < npos; ++i) {
        vx[i] += stack[q * npos + i];
        vy[i] += stack[(nq + q) * npos + i];
      }
    }
    for (std::size_t i = 0; i < npos; ++i) {
      vx[i] /= double(nq);
      vy[i] /= double(nq);
    }
    export_scalar(vx, w, h, "_vx");
    export_scalar(vy, w, h, "_vy");
    std::ofstream arrows(cfg.out_prefix + "_arrows.txt", std::ios::trunc);
    arrows << "# x y vx vy\n";
    for (int y = 0; y < h; y += cfg.arrow_stride)
      for (int x = 0; x < w; x += cfg.arrow_stride)
        arrows << x << " " << y << " " << vx[std::size_t(y) * w + x] << " "
               << vy[std::size_t(y) * w + x] << "\n";
  } else {
    throw std::invalid_argument("export-viz: unknown target '" + cfg.what +
                                "' (proj-phase | vfield | diffraction)");
  }
}

}  // namespace flowtie::cli
