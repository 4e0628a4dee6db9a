#include <cmath>
#include <limits>

#include "doctest.h"
#include "realign/train/trainer.hpp"
#include "support/synth.hpp"

using namespace realign;
using namespace realign::train;
namespace rt = realign::train;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.model.layers = 2;
  cfg.model.hidden_dim = 6;
  cfg.model.dropout = 0.0;
  cfg.model.weights.alpha = 0.1;
  cfg.model.weights.beta = 0.1;
  cfg.t_outer = 1;
  cfg.t1 = 1;
  cfg.t2 = 1;
  cfg.epochs_cap = 50;
  cfg.batch_size = 16;
  cfg.lr = 0.005;
  cfg.seed = 12;
  return cfg;
}

}  // namespace

TEST_CASE("train: loop accounting for T=T1=T2=1") {
  auto corpus = synth::random_ddi_corpus(3, 24);
  auto split = data::split_original(corpus, 1);
  TrainConfig cfg = tiny_config();
  auto result = rt::train(cfg, corpus, split);
  CHECK(result.state.srin_passes == 1);
  CHECK(result.state.dram_passes == 1);
  CHECK(result.state.finished);
  CHECK(result.state.history.size() == 2);
  CHECK(result.state.history[0].phase == Phase::Srin);
  CHECK(result.state.history[1].phase == Phase::Dram);
}

TEST_CASE("train: srin passes always run T*T1 times, dram at most T*T2") {
  auto corpus = synth::random_ddi_corpus(5, 30);
  auto split = data::split_original(corpus, 2);
  TrainConfig cfg = tiny_config();
  cfg.t_outer = 2;
  cfg.t1 = 2;
  cfg.t2 = 3;
  cfg.convergence_tol = 0.0;  // never converges early
  auto result = rt::train(cfg, corpus, split);
  CHECK(result.state.srin_passes == cfg.t_outer * cfg.t1);
  CHECK(result.state.dram_passes == cfg.t_outer * cfg.t2);
}

TEST_CASE("train: infinite tolerance exits the alignment loop after one pass") {
  auto corpus = synth::random_ddi_corpus(7, 24);
  auto split = data::split_original(corpus, 3);
  TrainConfig cfg = tiny_config();
  cfg.t2 = 5;
  cfg.convergence_tol = std::numeric_limits<double>::infinity();
  auto result = rt::train(cfg, corpus, split);
  CHECK(result.state.dram_passes == 1);
  CHECK(result.state.srin_passes == 1);
}

TEST_CASE("train: epochs cap bounds the total pass count") {
  auto corpus = synth::random_ddi_corpus(9, 24);
  auto split = data::split_original(corpus, 4);
  TrainConfig cfg = tiny_config();
  cfg.t_outer = 10;
  cfg.t1 = 5;
  cfg.t2 = 5;
  cfg.convergence_tol = 0.0;
  cfg.epochs_cap = 7;
  auto result = rt::train(cfg, corpus, split);
  CHECK(result.state.total_passes == 7);
}

TEST_CASE("train: deterministic loss history for a fixed seed") {
  auto corpus = synth::random_ddi_corpus(11, 30);
  auto split = data::split_original(corpus, 5);
  TrainConfig cfg = tiny_config();
  cfg.t_outer = 2;
  auto a = rt::train(cfg, corpus, split);
  auto b = rt::train(cfg, corpus, split);
  REQUIRE(a.state.history.size() == b.state.history.size());
  for (std::size_t i = 0; i < a.state.history.size(); ++i) {
    CHECK(a.state.history[i].train_loss.total == b.state.history[i].train_loss.total);
    CHECK(a.state.history[i].val_loss == b.state.history[i].val_loss);
  }
}

TEST_CASE("train: checkpoint resume reproduces uninterrupted training bitwise") {
  auto corpus = synth::random_ddi_corpus(13, 24);
  auto split = data::split_original(corpus, 6);
  TrainConfig cfg = tiny_config();
  cfg.t_outer = 2;
  cfg.t1 = 1;
  cfg.t2 = 1;
  cfg.convergence_tol = 0.0;

  auto full = rt::train(cfg, corpus, split);

  TrainConfig half = cfg;
  half.epochs_cap = 2;
  auto first = rt::train(half, corpus, split);
  CHECK_FALSE(first.state.finished);

  // round trip through the serialized checkpoint
  std::string blob = checkpoint_to_json(cfg, first.state);
  TrainConfig loaded_cfg;
  TrainState loaded;
  checkpoint_from_json(blob, loaded_cfg, loaded);
  CHECK(loaded_cfg.epochs_cap == cfg.epochs_cap);

  auto resumed = rt::train(cfg, corpus, split, loaded);
  CHECK(resumed.state.finished);
  REQUIRE(resumed.state.history.size() == full.state.history.size());
  for (const auto& [name, m] : full.state.params.values) {
    CHECK((m - resumed.state.params.values.at(name)).cwiseAbs().maxCoeff() == 0.0);
  }
  for (std::size_t i = 0; i < full.state.history.size(); ++i)
    CHECK(full.state.history[i].train_loss.total == resumed.state.history[i].train_loss.total);
}

TEST_CASE("predict: determinism, probability range, and parse errors") {
  auto corpus = synth::random_ddi_corpus(15, 24);
  auto split = data::split_original(corpus, 7);
  TrainConfig cfg = tiny_config();
  auto result = rt::train(cfg, corpus, split);

  double p1 = predict(result.best(), cfg.model, corpus[0]);
  double p2 = predict(result.best(), cfg.model, corpus[0]);
  CHECK(p1 == p2);
  CHECK(p1 >= 0.0);
  CHECK(p1 <= 1.0);

  data::PairRecord bad;
  bad.mol_x = "C(Q";
  bad.mol_y = "CC";
  CHECK_THROWS_WITH_AS(predict(result.best(), cfg.model, bad),
                       doctest::Contains("C(Q"), DataError);
}

TEST_CASE("evaluate: report over the test split") {
  auto corpus = synth::random_ddi_corpus(17, 40);
  auto split = data::split_original(corpus, 8);
  TrainConfig cfg = tiny_config();
  auto result = rt::train(cfg, corpus, split);
  auto rep = evaluate(result.best(), cfg.model, corpus, split, data::Split::Test);
  CHECK(rep.sample_count == split.count(data::Split::Test));
  CHECK(rep.values.count("ACC") == 1);
}

TEST_CASE("run log: one JSON line per pass with timestamps") {
  auto corpus = synth::random_ddi_corpus(19, 24);
  auto split = data::split_original(corpus, 9);
  TrainConfig cfg = tiny_config();
  auto result = rt::train(cfg, corpus, split);
  std::string log = run_log_lines(result.state.history);
  int lines = 0;
  for (char c : log) lines += c == '\n' ? 1 : 0;
  CHECK(lines == static_cast<int>(result.state.history.size()));
  CHECK(log.find("timestamp_ms") != std::string::npos);
  CHECK(log.find("\"phase\":\"srin\"") != std::string::npos);
}
