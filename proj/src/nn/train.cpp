#include "flowtie/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>

#include "flowtie/io/container.hpp"

namespace flowtie::nn {

namespace {

struct SampleLosses {
  double vf = 0, cont = 0, phase = 0;
  double total(const TrainConfig& cfg) const {
    return cfg.alpha * vf + cfg.beta * cont + cfg.gamma * phase;
  }
};

SampleLosses eval_losses(FlowModel& model, const TrainSample& s, const TrainConfig& cfg,
                         Tensor* grad_out) {
  Tensor v = model.forward(s.i_deriv);
  LossValue lv = loss_vf(v, s.v_gt);
  LossValue lc = loss_cont(s.i_deriv, s.i_zero, v, s.lambda, s.step_x, s.step_y);
  LossValue lp = loss_phase(v, s.phase_gt, s.step_x, s.step_y);
  if (grad_out) {
    *grad_out = Tensor(v.shape);
    for (std::size_t i = 0; i < grad_out->data.size(); ++i)
      grad_out->data[i] = cfg.alpha * lv.grad.data[i] + cfg.beta * lc.grad.data[i] +
                          cfg.gamma * lp.grad.data[i];
  }
  return {lv.value, lc.value, lp.value};
}

std::vector<double> flatten(const std::vector<Tensor*>& ts) {
  std::vector<double> out;
  for (const Tensor* t : ts) out.insert(out.end(), t->data.begin(), t->data.end());
  return out;
}

void unflatten(const std::vector<double>& flat, const std::vector<Tensor*>& ts) {
  std::size_t off = 0;
  for (Tensor* t : ts) {
    if (off + t->data.size() > flat.size())
      throw std::runtime_error("checkpoint: flattened parameter size mismatch");
    std::copy(flat.begin() + off, flat.begin() + off + t->data.size(), t->data.begin());
    off += t->data.size();
  }
  if (off != flat.size()) throw std::runtime_error("checkpoint: flattened parameter size mismatch");
}

}  // namespace

TrainSample make_train_sample(const FourDDataset& ds) {
  TrainSample s;
  const int c = ds.n_channels(), h = ds.scan.sy, w = ds.scan.sx;
  s.i_deriv = Tensor({1, c, h, w});
  s.i_deriv.data = axial_derivative(ds.i_plus, ds.i_minus, ds.delta_z_defocus);
  s.i_zero = Tensor({1, c, h, w});
  s.i_zero.data = ds.i_zero;
  s.v_gt = Tensor({1, 2, c, h, w});
  s.v_gt.data = ds.vfield_gt;
  s.phase_gt = Tensor({1, c, h, w});
  s.phase_gt.data = ds.phase_gt;
  s.lambda = ds.lambda;
  s.step_x = ds.scan.step_x;
  s.step_y = ds.scan.step_y;
  s.name = ds.structure_name;
  return s;
}

TrainState init_train_state(int c_in, const TrainConfig& cfg) {
  TrainState st;
  st.model = FlowModel(c_in, cfg.depth, cfg.kernel);
  st.model.init_params(cfg.seed);
  st.opt.lr = cfg.lr;
  st.opt.beta1 = cfg.adam_beta1;
  st.opt.beta2 = cfg.adam_beta2;
  st.opt.eps = cfg.adam_eps;
  st.opt.weight_decay = cfg.weight_decay;
  st.best_val = std::numeric_limits<double>::infinity();
  return st;
}

void train_epochs(TrainState& state, const std::vector<TrainSample>& train,
                  const std::vector<TrainSample>& val, const TrainConfig& cfg, int epochs,
                  bool verbose) {
  if (train.empty()) throw std::invalid_argument("train_flowtie: need at least one sample");

  for (int e = 0; e < epochs; ++e) {
    int epoch = state.epoch + 1;
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 shuffle_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + std::uint64_t(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    state.model.train_mode = true;
    for (std::size_t bi = 0; bi < order.size(); ++bi) {
      const TrainSample& s = train[order[bi]];
      Tensor grad;
      SampleLosses l = eval_losses(state.model, s, cfg, &grad);
      double total = l.total(cfg);
      if (!std::isfinite(total))
        throw std::runtime_error("train_flowtie: NaN loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(bi) + " (" + s.name + ")");
      state.model.zero_grad();
      state.model.backward(grad);
      if (!state.opt.step(state.model.parameters()))
        throw std::runtime_error("train_flowtie: non-finite gradient at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(bi));
      rec.train_vf += l.vf;
      rec.train_cont += l.cont;
      rec.train_phase += l.phase;
    }
    double inv = 1.0 / double(train.size());
    rec.train_vf *= inv;
    rec.train_cont *= inv;
    rec.train_phase *= inv;
    rec.train_total = cfg.alpha * rec.train_vf + cfg.beta * rec.train_cont + cfg.gamma * rec.train_phase;

    state.model.train_mode = false;
    const std::vector<TrainSample>& val_set = val.empty() ? train : val;
    for (const TrainSample& s : val_set) {
      SampleLosses l = eval_losses(state.model, s, cfg, nullptr);
      rec.val_vf += l.vf;
      rec.val_cont += l.cont;
      rec.val_phase += l.phase;
    }
    double vinv = 1.0 / double(val_set.size());
    rec.val_vf *= vinv;
    rec.val_cont *= vinv;
    rec.val_phase *= vinv;
    rec.val_total = cfg.alpha * rec.val_vf + cfg.beta * rec.val_cont + cfg.gamma * rec.val_phase;

    state.curves.push_back(rec);
    state.epoch = epoch;
    if (rec.val_total < state.best_val) {
      state.best_val = rec.val_total;
      state.best_epoch = epoch;
      state.best_params = flatten(state.model.parameters());
      state.best_buffers = flatten(state.model.buffers());
    }
    if (verbose && (epoch % 10 == 0 || epoch == 1))
      std::cerr << "epoch " << epoch << " train " << rec.train_total << " val " << rec.val_total
                << "\n";
  }
}

FlowModel best_model(const TrainState& state) {
  FlowModel m = state.model;
  if (!state.best_params.empty()) {
    unflatten(state.best_params, m.parameters());
    unflatten(state.best_buffers, m.buffers());
  }
  m.train_mode = false;
  return m;
}

void save_checkpoint(const TrainState& state, const TrainConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  io::Manifest m;
  auto& md = m.metadata();
  md["kind"] = "checkpoint";
  md["c_in"] = state.model.c_in;
  md["depth"] = state.model.depth;
  md["kernel"] = state.model.kernel;
  md["input_mean"] = state.model.input_mean;
  md["input_std"] = state.model.input_std;
  md["epoch"] = state.epoch;
  md["best_epoch"] = state.best_epoch;
  md["best_val"] = state.best_val;
  md["seed"] = cfg.seed;
  md["lr"] = cfg.lr;
  md["alpha"] = cfg.alpha;
  md["beta"] = cfg.beta;
  md["gamma"] = cfg.gamma;
  md["weight_decay"] = cfg.weight_decay;
  md["adam_beta1"] = cfg.adam_beta1;
  md["adam_beta2"] = cfg.adam_beta2;
  md["adam_eps"] = cfg.adam_eps;
  md["opt_step_count"] = state.opt.step_count;
  if (!state.curves.empty()) {
    md["last_train_total"] = state.curves.back().train_total;
    md["last_val_total"] = state.curves.back().val_total;
  }

  FlowModel& model = const_cast<FlowModel&>(state.model);
  auto params = model.parameters();
  auto buffers = model.buffers();
  auto pnames = FlowModel::parameter_names();
  auto bnames = FlowModel::buffer_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<std::uint64_t> shape(params[i]->shape.begin(), params[i]->shape.end());
    m.add_tensor(dir, "param_" + pnames[i], io::make_f64(shape, params[i]->data));
  }
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    std::vector<std::uint64_t> shape(buffers[i]->shape.begin(), buffers[i]->shape.end());
    m.add_tensor(dir, "buffer_" + bnames[i], io::make_f64(shape, buffers[i]->data));
  }
  if (!state.best_params.empty()) {
    m.add_tensor(dir, "best_params", io::make_f64({state.best_params.size()}, state.best_params));
    m.add_tensor(dir, "best_buffers",
                 io::make_f64({state.best_buffers.size()}, state.best_buffers));
  }
  if (!state.opt.m.empty()) {
    std::vector<double> flat_m, flat_v;
    for (const auto& x : state.opt.m) flat_m.insert(flat_m.end(), x.begin(), x.end());
    for (const auto& x : state.opt.v) flat_v.insert(flat_v.end(), x.begin(), x.end());
    m.add_tensor(dir, "opt_m", io::make_f64({flat_m.size()}, flat_m));
    m.add_tensor(dir, "opt_v", io::make_f64({flat_v.size()}, flat_v));
  }
  if (!state.curves.empty()) {
    std::vector<double> flat;
    for (const EpochRecord& r : state.curves) {
      flat.push_back(double(r.epoch));
      flat.push_back(r.train_vf);
      flat.push_back(r.train_cont);
      flat.push_back(r.train_phase);
      flat.push_back(r.train_total);
      flat.push_back(r.val_vf);
      flat.push_back(r.val_cont);
      flat.push_back(r.val_phase);
      flat.push_back(r.val_total);
    }
    m.add_tensor(dir, "loss_curves", io::make_f64({state.curves.size(), 9}, flat));
  }
  m.save(dir + "/manifest.json");
}

TrainState load_checkpoint(const std::string& dir, TrainConfig* cfg_out) {
  io::Manifest m = io::Manifest::load(dir + "/manifest.json");
  const auto& md = m.metadata();
  if (md.at("kind").get<std::string>() != "checkpoint")
    throw std::runtime_error("not a checkpoint: " + dir);

  TrainConfig cfg;
  cfg.seed = md.at("seed").get<std::uint64_t>();
  cfg.lr = md.at("lr").get<double>();
  cfg.alpha = md.at("alpha").get<double>();
  cfg.beta = md.at("beta").get<double>();
  cfg.gamma = md.at("gamma").get<double>();
  cfg.weight_decay = md.at("weight_decay").get<double>();
  cfg.adam_beta1 = md.at("adam_beta1").get<double>();
  cfg.adam_beta2 = md.at("adam_beta2").get<double>();
  cfg.adam_eps = md.at("adam_eps").get<double>();
  cfg.depth = md.at("depth").get<int>();
  cfg.kernel = md.at("kernel").get<int>();

  TrainState st = init_train_state(md.at("c_in").get<int>(), cfg);
  st.model.input_mean = md.at("input_mean").get<double>();
  st.model.input_std = md.at("input_std").get<double>();
  st.epoch = md.at("epoch").get<int>();
  st.best_epoch = md.at("best_epoch").get<int>();
  st.best_val = md.at("best_val").get<double>();
  st.opt.step_count = md.at("opt_step_count").get<std::int64_t>();

  auto params = st.model.parameters();
  auto buffers = st.model.buffers();
  auto pnames = FlowModel::parameter_names();
  auto bnames = FlowModel::buffer_names();
  for (std::size_t i = 0; i < params.size(); ++i)
    params[i]->data = m.load_tensor(dir, "param_" + pnames[i]).as_f64();
  for (std::size_t i = 0; i < buffers.size(); ++i)
    buffers[i]->data = m.load_tensor(dir, "buffer_" + bnames[i]).as_f64();
  if (m.has_tensor("best_params")) {
    st.best_params = m.load_tensor(dir, "best_params").as_f64();
    st.best_buffers = m.load_tensor(dir, "best_buffers").as_f64();
  }
  if (m.has_tensor("opt_m")) {
    std::vector<double> flat_m = m.load_tensor(dir, "opt_m").as_f64();
    std::vector<double> flat_v = m.load_tensor(dir, "opt_v").as_f64();
    st.opt.m.resize(params.size());
    st.opt.v.resize(params.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      std::size_t n = params[i]->data.size();
      st.opt.m[i].assign(flat_m.begin() + off, flat_m.begin() + off + n);
      st.opt.v[i].assign(flat_v.begin() + off, flat_v.begin() + off + n);
      off += n;
    }
  }
  if (m.has_tensor("loss_curves")) {
    std::vector<double> flat = m.load_tensor(dir, "loss_curves").as_f64();
    for (std::size_t i = 0; i + 8 < flat.size(); i += 9) {
      EpochRecord r;
      r.epoch = int(flat[i]);
      r.train_vf = flat[i + 1];
      r.train_cont = flat[i + 2];
      r.train_phase = flat[i + 3];
      r.train_total = flat[i + 4];
      r.val_vf = flat[i + 5];
      r.val_cont = flat[i + 6];
      r.val_phase = flat[i + 7];
      r.val_total = flat[i + 8];
      st.curves.push_back(r);
    }
  }
  if (cfg_out) *cfg_out = cfg;
  return st;
}

void write_loss_curves(const std::vector<EpochRecord>& curves, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write loss curves: " + path);
  out << "epoch\ttrain_vf\ttrain_cont\ttrain_phase\ttrain_total\tval_vf\tval_cont\tval_phase\tval_"
         "total\n";
  for (const EpochRecord& r : curves) {
    out << r.epoch << '\t' << r.train_vf << '\t' << r.train_cont << '\t' << r.train_phase << '\t'
        << r.train_total << '\t' << r.val_vf << '\t' << r.val_cont << '\t' << r.val_phase << '\t'
        << r.val_total << '\n';
  }
}

}  // namespace flowtie::nn
