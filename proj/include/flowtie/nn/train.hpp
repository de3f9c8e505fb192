#ifndef FLOWTIE_NN_TRAIN_HPP
#define FLOWTIE_NN_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowtie/microscope.hpp"
#include "flowtie/nn/losses.hpp"
#include "flowtie/nn/model.hpp"
#include "flowtie/nn/optimizer.hpp"

namespace flowtie::nn {

struct TrainConfig {
  int epochs = 200;
  double lr = 1e-4;
  double alpha = 1.0, beta = 1.0, gamma = 1.0;  // loss weights
  double weight_decay = 0.01;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
  int depth = 32;
  int kernel = 3;
  std::uint64_t seed = 1;
  bool deterministic = true;
};

struct EpochRecord {
  int epoch = 0;
  double train_vf = 0, train_cont = 0, train_phase = 0, train_total = 0;
  double val_vf = 0, val_cont = 0, val_phase = 0, val_total = 0;
};

// Precomputed training tensors for one 4D sample.
struct TrainSample {
  Tensor i_deriv;   // (1, C, H, W), also the network input
  Tensor i_zero;    // (1, C, H, W)
  Tensor v_gt;      // (1, 2, C, H, W)
  Tensor phase_gt;  // (1, C, H, W)
  double lambda = 0.0, step_x = 0.0, step_y = 0.0;
  std::string name;
};

TrainSample make_train_sample(const FourDDataset& ds);

struct TrainState {
  FlowModel model;
  AdamW opt;
  int epoch = 0;  // epochs completed
  int best_epoch = -1;
  double best_val = 0.0;
  std::vector<double> best_params;   // flattened best-validation parameters
  std::vector<double> best_buffers;  // flattened best-validation buffers
  std::vector<EpochRecord> curves;
};

TrainState init_train_state(int c_in, const TrainConfig& cfg);

// Runs `epochs` additional epochs (one optimizer step per sample, seeded
// shuffle per epoch). Deterministic under a fixed seed. Throws on NaN loss
// with epoch/batch diagnostics.
void train_epochs(TrainState& state, const std::vector<TrainSample>& train,
                  const std::vector<TrainSample>& val, const TrainConfig& cfg, int epochs,
                  bool verbose = false);

// Copies the recorded best-validation parameters into a model for inference.
FlowModel best_model(const TrainState& state);

void save_checkpoint(const TrainState& state, const TrainConfig& cfg, const std::string& dir);
TrainState load_checkpoint(const std::string& dir, TrainConfig* cfg_out = nullptr);

void write_loss_curves(const std::vector<EpochRecord>& curves, const std::string& path);

}  // namespace flowtie::nn

#endif
