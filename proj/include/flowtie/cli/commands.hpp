#ifndef FLOWTIE_CLI_COMMANDS_HPP
#define FLOWTIE_CLI_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowtie/nn/train.hpp"

namespace flowtie::cli {

struct GenDataConfig {
  std::string out_dir;
  int n_structures = 10;
  int n = 16;      // detector pixels per axis
  int scan = 16;   // scan points per axis
  std::uint64_t seed = 7;
  double accel_kv = 300.0;
  double semi_angle_mrad = 20.0;
  double delta_z_defocus = 50.0;        // Angstrom
  std::vector<int> thickness_cells = {1, 5};
  bool write_presets = true;            // GaAs / SrTiO3 test datasets
};

struct CorpusEntry {
  std::string dir;       // relative to the corpus root
  std::string name;
  std::string split;     // train | val | test
  int thickness_cells = 0;
};

struct Corpus {
  std::string root;
  std::vector<CorpusEntry> entries;
  static Corpus load(const std::string& dir);
  std::vector<CorpusEntry> with_split(const std::string& split) const;
};

// Writes per-structure datasets plus a corpus manifest with the 0.9/0.1
// split assignment; byte-deterministic in the seed.
void cmd_gen_data(const GenDataConfig& cfg);

struct TrainCmdConfig {
  std::string corpus_dir;
  std::string checkpoint_dir;
  std::string resume_from;  // optional checkpoint to continue
  nn::TrainConfig train;
  bool verbose = false;
};

void cmd_train(const TrainCmdConfig& cfg);

struct ReconstructConfig {
  std::string dataset_dir;
  std::string out_dir;
  std::string method = "tie";  // tie | flowtie | gd
  std::string checkpoint_dir;  // flowtie only
  double tie_eps = 0.0;
  std::string tie_variant = "poisson";  // poisson | teague
  int gd_iters = 100;
  bool save_matrix = false;
};

void cmd_reconstruct(const ReconstructConfig& cfg);

struct BenchCell {
  std::string method;
  bool present = false;
  double mse = 0.0;
  double time_mean = 0.0, time_std = 0.0;
  int repeats = 0;
  std::string note;
};

struct BenchRow {
  std::string material;
  double thickness = 0.0;  // Angstrom
  std::vector<BenchCell> cells;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string environment;
  std::string to_text() const;
  std::string to_json() const;
};

struct BenchmarkConfig {
  std::string corpus_dir;              // uses the test split
  std::vector<std::string> dataset_dirs;  // explicit datasets instead
  std::string checkpoint_dir;
  std::string out_prefix;  // writes <prefix>.json and <prefix>.txt
  int repeats = 3;
  double tie_eps = 0.0;
  int gd_iters = 100;
};

BenchReport cmd_benchmark(const BenchmarkConfig& cfg);

struct ExportVizConfig {
  std::string input_dir;  // dataset or reconstruction container
  std::string what;       // proj-phase | vfield | diffraction
  std::string out_prefix;
  int arrow_stride = 2;   // vfield arrow-list downsampling
};

void cmd_export_viz(const ExportVizConfig& cfg);

}  // namespace flowtie::cli

#endif
