// flowtie command-line front end: dataset generation, training,
// reconstruction, benchmarking, and image export.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "flowtie/cli/commands.hpp"

namespace fc = flowtie::cli;

int main(int argc, char** argv) {
  CLI::App app{"4D-STEM phase retrieval laboratory"};
  app.require_subcommand(1);

  fc::GenDataConfig gen;
  CLI::App* sgen = app.add_subcommand("gen-data", "simulate a corpus of 4D datasets");
  sgen->set_config("--config", "", "key=value configuration file");
  sgen->add_option("-o,--out", gen.out_dir, "output corpus directory")->required();
  sgen->add_option("--structures", gen.n_structures, "number of random structures");
  sgen->add_option("--n", gen.n, "detector pixels per axis");
  sgen->add_option("--scan", gen.scan, "scan points per axis");
  sgen->add_option("--seed", gen.seed, "corpus seed");
  sgen->add_option("--kv", gen.accel_kv, "accelerating voltage, kV");
  sgen->add_option("--semi-angle", gen.semi_angle_mrad, "probe semi-angle, mrad");
  sgen->add_option("--defocus-step", gen.delta_z_defocus, "defocus triplet step, Angstrom");
  sgen->add_option("--thickness-cells", gen.thickness_cells, "specimen thicknesses in unit cells");
  sgen->add_flag("--presets,!--no-presets", gen.write_presets,
                 "also write GaAs / SrTiO3 test datasets");

  fc::TrainCmdConfig tr;
  CLI::App* strain = app.add_subcommand("train", "train the flow network on a corpus");
  strain->set_config("--config", "", "key=value configuration file");
  strain->add_option("-c,--corpus", tr.corpus_dir, "corpus directory")->required();
  strain->add_option("-o,--out", tr.checkpoint_dir, "checkpoint output directory")->required();
  strain->add_option("--resume", tr.resume_from, "checkpoint directory to resume from");
  strain->add_option("--epochs", tr.train.epochs, "total training epochs");
  strain->add_option("--lr", tr.train.lr, "learning rate");
  strain->add_option("--alpha", tr.train.alpha, "flow-matching loss weight");
  strain->add_option("--beta", tr.train.beta, "continuity loss weight");
  strain->add_option("--gamma", tr.train.gamma, "phase loss weight");
  strain->add_option("--weight-decay", tr.train.weight_decay, "decoupled weight decay");
  strain->add_option("--depth", tr.train.depth, "hidden channel count");
  strain->add_option("--kernel", tr.train.kernel, "convolution kernel size");
  strain->add_option("--seed", tr.train.seed, "training seed");
  strain->add_flag("--deterministic,!--no-deterministic", tr.train.deterministic,
                   "bit-reproducible single-threaded training");
  strain->add_flag("-v,--verbose", tr.verbose, "print per-epoch losses");

  fc::ReconstructConfig rc;
  CLI::App* srec = app.add_subcommand("reconstruct", "run one reconstruction method");
  srec->set_config("--config", "", "key=value configuration file");
  srec->add_option("-d,--dataset", rc.dataset_dir, "dataset directory")->required();
  srec->add_option("-o,--out", rc.out_dir, "result output directory")->required();
  srec->add_option("-m,--method", rc.method, "tie | flowtie | gd");
  srec->add_option("--checkpoint", rc.checkpoint_dir, "trained checkpoint (flowtie)");
  srec->add_option("--tie-eps", rc.tie_eps, "Poisson solver regularizer");
  srec->add_option("--tie-variant", rc.tie_variant, "poisson | teague");
  srec->add_option("--gd-iters", rc.gd_iters, "gradient-descent iterations");
  srec->add_flag("--save-matrix", rc.save_matrix, "store the estimated potential matrix");

  fc::BenchmarkConfig bc;
  CLI::App* sbench = app.add_subcommand("benchmark", "time and score all methods");
  sbench->set_config("--config", "", "key=value configuration file");
  sbench->add_option("-c,--corpus", bc.corpus_dir, "corpus directory (test split)");
  sbench->add_option("-d,--dataset", bc.dataset_dirs, "explicit dataset directories");
  sbench->add_option("--checkpoint", bc.checkpoint_dir, "trained checkpoint for flowtie");
  sbench->add_option("-o,--out", bc.out_prefix, "report prefix (<prefix>.txt / .json)");
  sbench->add_option("--repeats", bc.repeats, "timing repeats per cell (minimum 3)");
  sbench->add_option("--tie-eps", bc.tie_eps, "Poisson solver regularizer");
  sbench->add_option("--gd-iters", bc.gd_iters, "gradient-descent iterations");

  fc::ExportVizConfig vc;
  CLI::App* sviz = app.add_subcommand("export-viz", "export grayscale images");
  sviz->set_config("--config", "", "key=value configuration file");
  sviz->add_option("-i,--input", vc.input_dir, "dataset or result directory")->required();
  sviz->add_option("-w,--what", vc.what, "proj-phase | vfield | diffraction")->required();
  sviz->add_option("-o,--out", vc.out_prefix, "output path prefix")->required();
  sviz->add_option("--arrow-stride", vc.arrow_stride, "vector-field arrow downsampling");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sgen->parsed()) {
      fc::cmd_gen_data(gen);
    } else if (strain->parsed()) {
      fc::cmd_train(tr);
    } else if (srec->parsed()) {
      fc::cmd_reconstruct(rc);
    } else if (sbench->parsed()) {
      fc::BenchReport report = fc::cmd_benchmark(bc);
      std::cout << report.to_text();
    } else if (sviz->parsed()) {
      fc::cmd_export_viz(vc);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
