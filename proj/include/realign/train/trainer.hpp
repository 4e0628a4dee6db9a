#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "realign/data/records.hpp"
#include "realign/data/splits.hpp"
#include "realign/eval/metrics.hpp"
#include "realign/model/model.hpp"

namespace realign::train {

using Mat = Eigen::MatrixXd;

struct TrainConfig {
  model::ModelConfig model;
  int t_outer = 1;       // outer iterations
  int t1 = 1;            // pre-adaptation passes per iteration
  int t2 = 1;            // alignment passes per iteration
  int epochs_cap = 50;   // global cap on total optimization passes
  int batch_size = 128;
  double lr = 0.001;
  double convergence_tol = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Phase { Srin, Dram };

struct PassRecord {
  int t = 0;                   // outer iteration, 1-based
  Phase phase = Phase::Srin;
  int phase_index = 0;         // t1 or t2, 1-based
  loss::LossBreakdown train_loss;  // epoch mean
  double val_loss = 0.0;
  std::int64_t timestamp_ms = 0;   // run-log only, never in metrics output
};

// Serializable optimizer + loop state; resuming reproduces the next pass
// bit-compatibly.
struct TrainState {
  model::ParamStore params;
  std::map<std::string, Mat> adam_m;
  std::map<std::string, Mat> adam_v;
  long adam_step = 0;

  int t = 1;                   // current outer iteration
  Phase phase = Phase::Srin;
  int phase_index = 1;         // next pass within the phase
  int total_passes = 0;
  int srin_passes = 0;
  int dram_passes = 0;
  bool finished = false;
  double phase_start_loss = 0.0;
  std::vector<double> dram_window;  // losses of the current alignment phase

  model::ParamStore best_params;
  double best_val = 0.0;
  bool has_best = false;

  std::vector<PassRecord> history;
};

struct TrainResult {
  TrainState state;
  const model::ParamStore& best() const {
    return state.has_best ? state.best_params : state.params;
  }
};

// Runs the iterative pre-adaptation / alignment optimization over the
// train split, retaining the best-validation parameters. `resume`
// continues a checkpointed state to completion.
TrainResult train(const TrainConfig& cfg, const std::vector<data::PairRecord>& records,
                  const data::SplitAssignment& split,
                  const std::optional<TrainState>& resume = std::nullopt);

// Deterministic single-pair prediction (probability for DDI, value for
// MI). Parse failures surface the molecule text.
double predict(const model::ParamStore& params, const model::ModelConfig& cfg,
               const data::PairRecord& record);

// Deterministic evaluation over the selected split; fills the task metrics.
eval::MetricReport evaluate(const model::ParamStore& params, const model::ModelConfig& cfg,
                            const std::vector<data::PairRecord>& records,
                            const data::SplitAssignment& split, data::Split which);

// Checkpoint container: config echo, parameter blobs, optimizer moments,
// loop counters, metric history (timestamp-free).
std::string checkpoint_to_json(const TrainConfig& cfg, const TrainState& state);
void checkpoint_from_json(const std::string& text, TrainConfig& cfg, TrainState& state);
void write_checkpoint_atomic(const std::string& path, const TrainConfig& cfg,
                             const TrainState& state);

// JSON-lines run log, one record per pass (timestamps included here).
std::string run_log_lines(const std::vector<PassRecord>& history);

}  // namespace realign::train
