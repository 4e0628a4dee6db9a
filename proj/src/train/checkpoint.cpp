#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "realign/core/error.hpp"
#include "realign/train/trainer.hpp"

namespace realign::train {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json mat_to_json(const Mat& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data(m.size());
  for (Eigen::Index c = 0, k = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) data[k++] = m(r, c);
  j["data"] = data;
  return j;
}

Mat mat_from_json(const json& j) {
  Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw DataError("checkpoint matrix size mismatch");
  Mat m(rows, cols);
  for (Eigen::Index c = 0, k = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = data[k++];
  return m;
}

ordered_json params_to_json(const std::map<std::string, Mat>& values) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, m] : values) j[name] = mat_to_json(m);
  return j;
}

std::map<std::string, Mat> params_from_json(const json& j) {
  std::map<std::string, Mat> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = mat_from_json(it.value());
  return out;
}

ordered_json config_to_json(const TrainConfig& cfg) {
  ordered_json j;
  j["encoder.variant"] = srin::encoder_variant_name(cfg.model.variant);
  j["encoder.layers"] = cfg.model.layers;
  j["encoder.hidden_dim"] = cfg.model.hidden_dim;
  j["encoder.activation"] = cfg.model.activation == srin::Activation::Linear    ? "linear"
                            : cfg.model.activation == srin::Activation::ReLU    ? "relu"
                            : cfg.model.activation == srin::Activation::Sigmoid ? "sigmoid"
                                                                                : "tanh";
  j["substructure.k_hops"] = cfg.model.k_hops;
  j["dram.rho"] = cfg.model.rho;
  j["dram.bandwidth_mode"] =
      cfg.model.bandwidth_mode == dram::BandwidthMode::Median ? "median" : "fixed";
  j["dram.bandwidth"] = cfg.model.bandwidth;
  j["dram.temperature"] = cfg.model.temperature;
  j["loss.alpha"] = cfg.model.weights.alpha;
  j["loss.beta"] = cfg.model.weights.beta;
  j["model.task"] = loss::task_name(cfg.model.task);
  j["model.symmetric_head"] = cfg.model.symmetric_head;
  j["model.ablate_dram"] = cfg.model.ablate_dram;
  j["trainer.T"] = cfg.t_outer;
  j["trainer.T1"] = cfg.t1;
  j["trainer.T2"] = cfg.t2;
  j["trainer.epochs"] = cfg.epochs_cap;
  j["trainer.batch_size"] = cfg.batch_size;
  j["trainer.dropout"] = cfg.model.dropout;
  j["trainer.lr"] = cfg.lr;
  j["trainer.convergence_tol"] = cfg.convergence_tol;
  j["seed"] = cfg.seed;
  return j;
}

void config_from_json(const json& j, TrainConfig& cfg) {
  cfg.model.variant = srin::encoder_variant_from_name(j.at("encoder.variant").get<std::string>());
  cfg.model.layers = j.at("encoder.layers").get<int>();
  cfg.model.hidden_dim = j.at("encoder.hidden_dim").get<int>();
  cfg.model.activation = srin::activation_from_name(j.at("encoder.activation").get<std::string>());
  cfg.model.k_hops = j.at("substructure.k_hops").get<int>();
  cfg.model.rho = j.at("dram.rho").get<double>();
  cfg.model.bandwidth_mode = j.at("dram.bandwidth_mode").get<std::string>() == "median"
                                 ? dram::BandwidthMode::Median
                                 : dram::BandwidthMode::Fixed;
  cfg.model.bandwidth = j.at("dram.bandwidth").get<double>();
  cfg.model.temperature = j.at("dram.temperature").get<double>();
  cfg.model.weights.alpha = j.at("loss.alpha").get<double>();
  cfg.model.weights.beta = j.at("loss.beta").get<double>();
  cfg.model.task = loss::task_from_name(j.at("model.task").get<std::string>());
  cfg.model.symmetric_head = j.at("model.symmetric_head").get<bool>();
  cfg.model.ablate_dram = j.at("model.ablate_dram").get<bool>();
  cfg.t_outer = j.at("trainer.T").get<int>();
  cfg.t1 = j.at("trainer.T1").get<int>();
  cfg.t2 = j.at("trainer.T2").get<int>();
  cfg.epochs_cap = j.at("trainer.epochs").get<int>();
  cfg.batch_size = j.at("trainer.batch_size").get<int>();
  cfg.model.dropout = j.at("trainer.dropout").get<double>();
  cfg.lr = j.at("trainer.lr").get<double>();
  cfg.convergence_tol = j.at("trainer.convergence_tol").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
}

ordered_json pass_to_json(const PassRecord& rec, bool with_timestamp) {
  ordered_json j;
  j["t"] = rec.t;
  j[rec.phase == Phase::Srin ? "t1" : "t2"] = rec.phase_index;
  j["phase"] = rec.phase == Phase::Srin ? "srin" : "dram";
  j["loss"] = {{"pred", rec.train_loss.pred},
               {"kl_alpha", rec.train_loss.kl_alpha},
               {"kl_beta", rec.train_loss.kl_beta},
               {"total", rec.train_loss.total}};
  j["val_loss"] = rec.val_loss;
  if (with_timestamp) j["timestamp_ms"] = rec.timestamp_ms;
  return j;
}

PassRecord pass_from_json(const json& j) {
  PassRecord rec;
  rec.t = j.at("t").get<int>();
  rec.phase = j.at("phase").get<std::string>() == "srin" ? Phase::Srin : Phase::Dram;
  rec.phase_index = j.contains("t1") ? j["t1"].get<int>() : j.at("t2").get<int>();
  rec.train_loss.pred = j.at("loss").at("pred").get<double>();
  rec.train_loss.kl_alpha = j.at("loss").at("kl_alpha").get<double>();
  rec.train_loss.kl_beta = j.at("loss").at("kl_beta").get<double>();
  rec.train_loss.total = j.at("loss").at("total").get<double>();
  rec.val_loss = j.at("val_loss").get<double>();
  return rec;
}

}  // namespace

std::string checkpoint_to_json(const TrainConfig& cfg, const TrainState& state) {
  ordered_json j;
  j["format"] = "realignfit-checkpoint-v1";
  j["config"] = config_to_json(cfg);
  j["params"] = params_to_json(state.params.values);
  j["adam"] = {{"step", state.adam_step},
               {"m", params_to_json(state.adam_m)},
               {"v", params_to_json(state.adam_v)}};
  j["counters"] = {{"t", state.t},
                   {"phase", state.phase == Phase::Srin ? "srin" : "dram"},
                   {"phase_index", state.phase_index},
                   {"total_passes", state.total_passes},
                   {"srin_passes", state.srin_passes},
                   {"dram_passes", state.dram_passes},
                   {"finished", state.finished},
                   {"phase_start_loss", state.phase_start_loss},
                   {"dram_window", state.dram_window}};
  j["best"] = {{"valid", state.has_best}, {"val_loss", state.best_val}};
  if (state.has_best) j["best"]["params"] = params_to_json(state.best_params.values);
  j["history"] = ordered_json::array();
  for (const auto& rec : state.history) j["history"].push_back(pass_to_json(rec, false));
  return j.dump(2);
}

void checkpoint_from_json(const std::string& text, TrainConfig& cfg, TrainState& state) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint parse failure: ") + e.what());
  }
  if (j.value("format", "") != "realignfit-checkpoint-v1")
    throw DataError("unrecognized checkpoint format");
  config_from_json(j.at("config"), cfg);
  state = TrainState{};
  state.params.values = params_from_json(j.at("params"));
  state.adam_step = j.at("adam").at("step").get<long>();
  state.adam_m = params_from_json(j.at("adam").at("m"));
  state.adam_v = params_from_json(j.at("adam").at("v"));
  const auto& c = j.at("counters");
  state.t = c.at("t").get<int>();
  state.phase = c.at("phase").get<std::string>() == "srin" ? Phase::Srin : Phase::Dram;
  state.phase_index = c.at("phase_index").get<int>();
  state.total_passes = c.at("total_passes").get<int>();
  state.srin_passes = c.at("srin_passes").get<int>();
  state.dram_passes = c.at("dram_passes").get<int>();
  state.finished = c.at("finished").get<bool>();
  state.phase_start_loss = c.at("phase_start_loss").get<double>();
  state.dram_window = c.at("dram_window").get<std::vector<double>>();
  state.has_best = j.at("best").at("valid").get<bool>();
  state.best_val = j.at("best").at("val_loss").get<double>();
  if (state.has_best) state.best_params.values = params_from_json(j.at("best").at("params"));
  for (const auto& rec : j.at("history")) state.history.push_back(pass_from_json(rec));
}

void write_checkpoint_atomic(const std::string& path, const TrainConfig& cfg,
                             const TrainState& state) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw DataError("cannot write checkpoint: " + tmp);
    f << checkpoint_to_json(cfg, state);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw DataError("cannot move checkpoint into place: " + path);
}

std::string run_log_lines(const std::vector<PassRecord>& history) {
  std::ostringstream out;
  for (const auto& rec : history) out << pass_to_json(rec, true).dump() << "\n";
  return out.str();
}

}  // namespace realign::train
