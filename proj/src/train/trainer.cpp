#include "realign/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "realign/core/error.hpp"
#include "realign/core/log.hpp"
#include "realign/core/threads.hpp"
#include "realign/chem/molecule.hpp"

namespace realign::train {

void TrainConfig::validate() const {
  model.validate();
  if (t_outer < 1 || t1 < 1 || t2 < 1)
    throw ConfigError("trainer iterations T, T1, T2 must all be >= 1");
  if (epochs_cap < 1) throw ConfigError("trainer.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("trainer.batch_size must be >= 1");
  if (lr <= 0) throw ConfigError("trainer.lr must be positive");
  if (convergence_tol < 0) throw ConfigError("trainer.convergence_tol must be >= 0");
}

namespace {

struct ParsedPair {
  chem::MolecularGraph x;
  chem::MolecularGraph y;
  double label = 0.0;
};

std::vector<ParsedPair> parse_records(const std::vector<data::PairRecord>& records,
                                      const chem::FeatureSchema& schema) {
  std::vector<ParsedPair> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    ParsedPair p;
    try {
      p.x = chem::read_molecule(r.mol_x);
      p.y = chem::read_molecule(r.mol_y);
    } catch (const DataError& e) {
      throw DataError(std::string("unparseable molecule in pair (") + r.mol_x + ", " + r.mol_y +
                      "): " + e.what());
    }
    model::ensure_features(p.x, schema);
    model::ensure_features(p.y, schema);
    p.label = r.label;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<int> indices_of(const data::SplitAssignment& split, data::Split which) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < split.split.size(); ++i)
    if (split.split[i] == which) idx.push_back(static_cast<int>(i));
  return idx;
}

// whether a parameter belongs to the encoder/substructure group updated in
// pre-adaptation passes
bool srin_parameter(const std::string& name) {
  return name.rfind("enc.", 0) == 0 || name == "sub.proj";
}

struct BatchGrad {
  std::map<std::string, Mat> grad;
  loss::LossBreakdown mean_loss;
};

// Forward/backward on one batch; per-item tapes run in parallel and the
// reduction is sequential in item order, so results are independent of the
// thread count.
BatchGrad batch_gradient(const model::ModelConfig& mcfg, const std::vector<ParsedPair>& pairs,
                         const std::vector<int>& batch, const RngStream& batch_stream,
                         const model::ParamStore& params) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  // batch-level population stats for the noise filter
  model::NoiseStats stats;
  {
    std::vector<model::Vec> population;
    for (int idx : batch) {
      for (const auto* g : {&pairs[idx].x, &pairs[idx].y}) {
        auto subs = model::molecule_substructures(params, mcfg, *g);
        population.insert(population.end(), subs.begin(), subs.end());
      }
    }
    srin::compute_noise_stats(population, stats.mean, stats.variance);
  }

  struct ItemResult {
    std::map<std::string, Mat> grad;
    double pred = 0, kl_x = 0, kl_y = 0;
  };
  std::vector<ItemResult> items(batch.size());

  parallel_for(batch.size(), [&](std::size_t slot) {
    int idx = batch[slot];
    RngStream item_rng = batch_stream.fork("item", static_cast<std::uint64_t>(idx));
    ad::Graph g;
    std::map<std::string, ad::Value> leaves;
    for (const auto& [name, value] : params.values) leaves[name] = g.leaf(value);
    auto fwd = model::forward_pair(g, leaves, mcfg, pairs[idx].x, pairs[idx].y, pairs[idx].label,
                                   model::RunMode::TrainStochastic, item_rng, stats);
    ad::Value total = g.add(
        fwd.pred_loss,
        g.add(g.scale(fwd.kl_x, mcfg.weights.alpha), g.scale(fwd.kl_y, mcfg.weights.beta)));
    double total_val = total.val()(0, 0);
    if (!std::isfinite(total_val))
      throw NumericError("non-finite loss on pair index " + std::to_string(idx));
    g.backward(total);
    ItemResult& res = items[slot];
    res.pred = fwd.pred_loss.val()(0, 0);
    res.kl_x = fwd.kl_x.val()(0, 0);
    res.kl_y = fwd.kl_y.val()(0, 0);
    for (const auto& [name, leaf] : leaves) {
      if (leaf.grad().size()) res.grad[name] = leaf.grad();
    }
  });

  BatchGrad out;
  double pred = 0, klx = 0, kly = 0;
  for (const auto& item : items) {
    pred += item.pred;
    klx += item.kl_x;
    kly += item.kl_y;
    for (const auto& [name, grad] : item.grad) {
      auto it = out.grad.find(name);
      if (it == out.grad.end()) out.grad[name] = grad * inv_b;
      else it->second += grad * inv_b;
    }
  }
  out.mean_loss = loss::total_loss(pred * inv_b, klx * inv_b, kly * inv_b, mcfg.weights);
  return out;
}

void adam_update(TrainState& state, const std::map<std::string, Mat>& grads, double lr,
                 bool srin_only) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++state.adam_step;
  double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.adam_step));
  double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.adam_step));
  for (const auto& [name, g] : grads) {
    if (srin_only && !srin_parameter(name)) continue;
    Mat& m = state.adam_m[name];
    Mat& v = state.adam_v[name];
    if (m.size() == 0) m = Mat::Zero(g.rows(), g.cols());
    if (v.size() == 0) v = Mat::Zero(g.rows(), g.cols());
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g.cwiseProduct(g);
    Mat m_hat = m / corr1;
    Mat v_hat = v / corr2;
    state.params.values[name] -=
        lr * (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();
  }
}

double validation_loss(const model::ModelConfig& cfg, const model::ParamStore& params,
                       const std::vector<ParsedPair>& pairs, const std::vector<int>& val_idx) {
  if (val_idx.empty()) return 0.0;
  std::vector<double> totals(val_idx.size());
  parallel_for(val_idx.size(), [&](std::size_t slot) {
    RngStream rng(0, "det");
    model::NoiseStats stats;
    auto out = model::plain_forward_pair(params, cfg, pairs[val_idx[slot]].x,
                                         pairs[val_idx[slot]].y, pairs[val_idx[slot]].label,
                                         model::RunMode::Deterministic, rng, stats);
    totals[slot] = out.parts.total;
  });
  double acc = 0;
  for (double t : totals) acc += t;
  return acc / static_cast<double>(val_idx.size());
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<data::PairRecord>& records,
                  const data::SplitAssignment& split, const std::optional<TrainState>& resume) {
  cfg.validate();
  if (records.size() != split.split.size())
    throw DataError("train: records and split assignment misaligned");

  auto pairs = parse_records(records, cfg.model.schema);
  auto train_idx = indices_of(split, data::Split::Train);
  auto val_idx = indices_of(split, data::Split::Val);
  if (train_idx.empty()) throw DataError("train: empty training split");

  RngStream root(cfg.seed, "train");

  TrainState state;
  if (resume) {
    state = *resume;
  } else {
    RngStream init = root.fork("init");
    state.params = model::ParamStore::init(cfg.model, init);
  }

  model::ModelConfig srin_cfg = cfg.model;
  srin_cfg.ablate_dram = true;  // pre-adaptation passes train the SRIN readout path

  while (!state.finished && state.total_passes < cfg.epochs_cap) {
    const bool srin_phase = state.phase == Phase::Srin;
    const model::ModelConfig& pass_cfg = srin_phase ? srin_cfg : cfg.model;

    // one optimization pass over the training split
    std::vector<int> order = train_idx;
    RngStream shuffle = root.fork("shuffle", static_cast<std::uint64_t>(state.total_passes));
    shuffle.shuffle(order);

    double pred = 0, klx = 0, kly = 0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::vector<int> batch(order.begin() + start,
                             order.begin() + std::min(order.size(),
                                                      start + cfg.batch_size));
      RngStream batch_stream =
          root.fork("pass", static_cast<std::uint64_t>(state.total_passes))
              .fork("batch", static_cast<std::uint64_t>(batches));
      try {
        BatchGrad bg = batch_gradient(pass_cfg, pairs, batch, batch_stream, state.params);
        adam_update(state, bg.grad, cfg.lr, srin_phase && !cfg.model.ablate_dram);
        pred += bg.mean_loss.pred;
        klx += bg.mean_loss.kl_alpha;
        kly += bg.mean_loss.kl_beta;
      } catch (const NumericError& e) {
        std::string diag = "batch diagnostic (pass " + std::to_string(state.total_passes) + "):";
        for (int idx : batch)
          diag += " [" + records[idx].id_x + "," + records[idx].id_y + "]";
        logging::warn(diag);
        throw NumericError(std::string(e.what()) + "; " + diag);
      }
      ++batches;
    }
    loss::LossBreakdown epoch_loss = loss::total_loss(
        pred / batches, klx / batches, kly / batches, cfg.model.weights);

    double val = validation_loss(cfg.model, state.params, pairs, val_idx);
    if (!state.has_best || val < state.best_val) {
      state.best_val = val;
      state.best_params = state.params;
      state.has_best = true;
    }

    PassRecord rec;
    rec.t = state.t;
    rec.phase = state.phase;
    rec.phase_index = state.phase_index;
    rec.train_loss = epoch_loss;
    rec.val_loss = val;
    rec.timestamp_ms = now_ms();
    state.history.push_back(rec);
    ++state.total_passes;

    // advance the nested iteration
    if (srin_phase) {
      ++state.srin_passes;
      if (state.phase_index >= cfg.t1) {
        state.phase = Phase::Dram;
        state.phase_index = 1;
        state.phase_start_loss = epoch_loss.total;
        state.dram_window.clear();
      } else {
        ++state.phase_index;
      }
    } else {
      ++state.dram_passes;
      state.dram_window.push_back(epoch_loss.total);
      bool converged = false;
      {
        // |delta L| below tolerance across a window of up to 3 passes
        std::size_t w = std::min<std::size_t>(3, state.dram_window.size());
        converged = true;
        for (std::size_t i = state.dram_window.size() - w; i < state.dram_window.size(); ++i) {
          double before = i == 0 ? state.phase_start_loss : state.dram_window[i - 1];
          if (std::fabs(state.dram_window[i] - before) >= cfg.convergence_tol) converged = false;
        }
      }
      if (converged || state.phase_index >= cfg.t2) {
        if (converged && state.phase_index < cfg.t2)
          logging::info("alignment phase converged after " + std::to_string(state.phase_index) +
                        " passes");
        if (state.t >= cfg.t_outer) {
          state.finished = true;
        } else {
          ++state.t;
          state.phase = Phase::Srin;
          state.phase_index = 1;
        }
      } else {
        ++state.phase_index;
      }
    }
  }

  TrainResult result;
  result.state = std::move(state);
  return result;
}

double predict(const model::ParamStore& params, const model::ModelConfig& cfg,
               const data::PairRecord& record) {
  chem::MolecularGraph gx, gy;
  try {
    gx = chem::read_molecule(record.mol_x);
  } catch (const DataError& e) {
    throw DataError("cannot parse molecule \"" + record.mol_x + "\": " + e.what());
  }
  try {
    gy = chem::read_molecule(record.mol_y);
  } catch (const DataError& e) {
    throw DataError("cannot parse molecule \"" + record.mol_y + "\": " + e.what());
  }
  model::ensure_features(gx, cfg.schema);
  model::ensure_features(gy, cfg.schema);
  RngStream rng(0, "det");
  model::NoiseStats stats;
  auto out = model::plain_forward_pair(params, cfg, gx, gy, cfg.task == loss::Task::DDI ? 0.0 : 0.0,
                                       model::RunMode::Deterministic, rng, stats);
  return out.prediction;
}

eval::MetricReport evaluate(const model::ParamStore& params, const model::ModelConfig& cfg,
                            const std::vector<data::PairRecord>& records,
                            const data::SplitAssignment& split, data::Split which) {
  auto idx = indices_of(split, which);
  if (idx.empty()) throw DataError("evaluate: empty split selection");
  std::vector<double> scores(idx.size());
  parallel_for(idx.size(), [&](std::size_t slot) {
    scores[slot] = predict(params, cfg, records[idx[slot]]);
  });
  if (cfg.task == loss::Task::DDI) {
    std::vector<int> labels(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      labels[i] = records[idx[i]].label == 1.0 ? 1 : 0;
    return eval::classification_metrics(scores, labels);
  }
  std::vector<double> targets(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) targets[i] = records[idx[i]].label;
  return eval::regression_metrics(scores, targets);
}

}  // namespace realign::train
