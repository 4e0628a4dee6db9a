#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "realign/cli/config.hpp"
#include "realign/core/error.hpp"
#include "realign/core/log.hpp"
#include "realign/data/negatives.hpp"
#include "realign/data/records.hpp"
#include "realign/data/splits.hpp"
#include "realign/eval/analysis.hpp"
#include "realign/eval/metrics.hpp"
#include "realign/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace realign;

namespace {

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::string data_path;
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "key = value configuration file");
  cmd->add_option("--set", args.overrides, "override configuration keys (key=value)")
      ->type_name("KEY=VALUE");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--data", args.data_path, "dataset CSV (mol_x,mol_y,label[,id_x,id_y])");
  cmd->add_option("--manifest", args.manifest_path, "split manifest JSON");
  cmd->add_option("--seed", args.seed, "root random seed (overrides config)");
}

cli::RunConfig effective_config(const CommonArgs& args) {
  cli::RunConfig cfg = cli::RunConfig::load(args.config_file, args.overrides);
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw DataError("cannot write file: " + path);
    f << content;
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// Appends manifest-held negatives to the CSV rows and checks alignment.
std::vector<data::PairRecord> assemble_records(const data::LoadResult& loaded,
                                               const data::ManifestData& manifest) {
  std::vector<data::PairRecord> records = loaded.records;
  if (manifest.csv_pair_count != static_cast<int>(records.size()))
    throw DataError("manifest expects " + std::to_string(manifest.csv_pair_count) +
                    " CSV pairs, dataset has " + std::to_string(records.size()));
  records.insert(records.end(), manifest.negatives.begin(), manifest.negatives.end());
  return records;
}

int cmd_split(const CommonArgs& args, const std::string& scenario_name) {
  cli::RunConfig cfg = effective_config(args);
  if (args.data_path.empty()) throw ConfigError("split requires --data");
  data::Scenario scenario = data::scenario_from_name(scenario_name);
  loss::Task task = loss::task_from_name(cfg.str("model.task"));
  if (task == loss::Task::MI && scenario != data::Scenario::Original)
    throw ConfigError("MI datasets use original splits only");

  auto loaded = data::load_pairs(args.data_path, task);
  int csv_pairs = static_cast<int>(loaded.records.size());
  std::vector<data::PairRecord> records = loaded.records;

  // DDI corpora holding only positives get generated negatives
  if (task == loss::Task::DDI) {
    bool all_positive = true;
    for (const auto& r : records) all_positive = all_positive && r.label == 1.0;
    if (all_positive) {
      double ratio = cfg.negative_ratio();
      if (scenario == data::Scenario::P2) {
        auto catalog = data::MoleculeCatalog::from_records(records, true);
        records = data::negative_sample_scaffold(records, catalog, ratio, cfg.seed());
      } else {
        records = data::negative_sample_rule(records, ratio, cfg.seed());
      }
      logging::info("generated " + std::to_string(records.size() - csv_pairs) +
                    " negative pairs");
    }
  }

  data::SplitAssignment assignment;
  switch (scenario) {
    case data::Scenario::Original:
      assignment = data::split_original(records, cfg.seed());
      break;
    case data::Scenario::P1:
      assignment = data::split_p1(records, cfg.seed());
      break;
    case data::Scenario::P2: {
      auto keys = data::scaffold_keys_for(records);
      assignment = data::split_p2(records, keys, cfg.seed());
      break;
    }
  }

  // independent re-verification; a failed invariant writes nothing
  auto report = data::verify_split(records, assignment);
  std::cout << "split " << data::scenario_name(scenario) << " seed " << cfg.seed() << ": train "
            << assignment.count(data::Split::Train) << ", val "
            << assignment.count(data::Split::Val) << ", test "
            << assignment.count(data::Split::Test) << ", dropped "
            << assignment.dropped.size() << "\n";
  std::cout << "ratio deviation from 6:2:2: " << report.max_ratio_deviation * 100 << "%\n";
  for (const auto& note : report.notes) std::cout << "note: " << note << "\n";
  if (!report.ok) {
    for (const auto& v : report.violations) std::cerr << "invariant violation: " << v << "\n";
    throw DataError("split invariant verification failed");
  }
  std::cout << "invariants verified: ok\n";

  auto manifest_json = nlohmann::ordered_json::parse(
      data::manifest_to_json(assignment, records, csv_pairs));
  manifest_json["config"] = cfg.echo();
  std::string path = args.out_dir + "/manifest-" + data::scenario_name(scenario) + "-seed" +
                     std::to_string(cfg.seed()) + ".json";
  write_file(path, manifest_json.dump(2) + "\n");
  std::cout << "manifest: " << path << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args) {
  cli::RunConfig cfg = effective_config(args);
  if (args.data_path.empty()) throw ConfigError("train requires --data");
  if (args.manifest_path.empty()) throw ConfigError("train requires --manifest");
  if (!fs::exists(args.manifest_path))
    throw ConfigError("manifest file not found: " + args.manifest_path);

  train::TrainConfig tc = cfg.to_train_config();
  auto loaded = data::load_pairs(args.data_path, tc.model.task);
  auto manifest = data::manifest_from_json(read_file(args.manifest_path));
  auto records = assemble_records(loaded, manifest);

  auto result = train::train(tc, records, manifest.assignment);

  auto checkpoint = nlohmann::ordered_json::parse(
      train::checkpoint_to_json(tc, result.state));
  checkpoint["scenario"] = data::scenario_name(manifest.assignment.scenario);
  checkpoint["config_echo"] = cfg.echo();
  std::string ckpt_path = args.out_dir + "/checkpoint.json";
  write_file(ckpt_path, checkpoint.dump(2) + "\n");
  write_file(args.out_dir + "/run_log.jsonl", train::run_log_lines(result.state.history));

  std::cout << "passes: srin " << result.state.srin_passes << ", dram "
            << result.state.dram_passes << "\n";
  std::cout << "best validation loss: " << result.state.best_val << "\n";
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

struct LoadedCheckpoint {
  train::TrainConfig cfg;
  train::TrainState state;
  std::string scenario;
};

LoadedCheckpoint load_checkpoint(const std::string& path) {
  LoadedCheckpoint out;
  std::string text = read_file(path);
  train::checkpoint_from_json(text, out.cfg, out.state);
  auto j = nlohmann::json::parse(text);
  out.scenario = j.value("scenario", "");
  return out;
}

int cmd_eval(const CommonArgs& args, const std::string& checkpoint_path,
             const std::string& baseline_path) {
  cli::RunConfig cfg = effective_config(args);
  if (checkpoint_path.empty()) throw ConfigError("eval requires --checkpoint");
  if (args.data_path.empty()) throw ConfigError("eval requires --data");
  if (args.manifest_path.empty()) throw ConfigError("eval requires --manifest");

  auto ckpt = load_checkpoint(checkpoint_path);
  auto loaded = data::load_pairs(args.data_path, ckpt.cfg.model.task);
  auto manifest = data::manifest_from_json(read_file(args.manifest_path));
  auto records = assemble_records(loaded, manifest);

  std::string scenario = data::scenario_name(manifest.assignment.scenario);
  if (!ckpt.scenario.empty() && ckpt.scenario != scenario)
    logging::warn("checkpoint was trained on scenario " + ckpt.scenario +
                  " but the split is " + scenario);

  const model::ParamStore& params =
      ckpt.state.has_best ? ckpt.state.best_params : ckpt.state.params;
  auto report = train::evaluate(params, ckpt.cfg.model, records, manifest.assignment,
                                data::Split::Test);

  nlohmann::ordered_json out;
  out["dataset"] = loaded.manifest.name;
  out["scenario"] = scenario;
  out["seed"] = ckpt.cfg.seed;
  out["samples"] = report.sample_count;
  out["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : report.values) out["metrics"][name] = value;
  for (const auto& [name, reason] : report.absent) out["metrics_absent"][name] = reason;

  if (!baseline_path.empty()) {
    auto baseline = nlohmann::json::parse(read_file(baseline_path));
    if (!baseline.contains("metrics")) throw DataError("baseline report has no metrics object");
    out["rpd"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : report.values) {
      if (!baseline["metrics"].contains(name)) continue;
      double ori = baseline["metrics"][name].get<double>();
      auto rep = eval::rpd_report(name, ori, value, scenario);
      out["rpd"][name] = {{"baseline", rep.eva_ori},
                          {"current", rep.eva_p},
                          {"percent", rep.value},
                          {"improved", rep.improved}};
    }
  }
  out["config"] = cfg.echo();

  std::string path = args.out_dir + "/metrics-" + scenario + ".json";
  write_file(path, out.dump(2) + "\n");
  std::cout << out["metrics"].dump() << "\n";
  std::cout << "metrics: " << path << "\n";
  return 0;
}

int cmd_analyze(const CommonArgs& args, const std::string& checkpoint_path,
                const std::string& pair_arg, const std::string& pair_file,
                const std::string& reference_path) {
  cli::RunConfig cfg = effective_config(args);
  if (checkpoint_path.empty()) throw ConfigError("analyze requires --checkpoint");

  data::PairRecord pair;
  if (!pair_arg.empty()) {
    std::size_t comma = pair_arg.find(',');
    if (comma == std::string::npos)
      throw ConfigError("--pair expects \"MOLX,MOLY\"");
    pair.mol_x = pair_arg.substr(0, comma);
    pair.mol_y = pair_arg.substr(comma + 1);
  } else if (!pair_file.empty()) {
    std::istringstream in(read_file(pair_file));
    if (!std::getline(in, pair.mol_x) || !std::getline(in, pair.mol_y))
      throw DataError("pair file must hold two molecule lines");
  } else {
    throw ConfigError("analyze requires --pair or --pair-file");
  }

  auto ckpt = load_checkpoint(checkpoint_path);
  const model::ParamStore& params =
      ckpt.state.has_best ? ckpt.state.best_params : ckpt.state.params;
  auto map = eval::interaction_strength_map(params, ckpt.cfg.model, pair);

  auto matrix_json = nlohmann::ordered_json::parse(eval::interaction_to_json(map));
  matrix_json["config"] = cfg.echo();

  if (!reference_path.empty()) {
    Eigen::MatrixXd reference = eval::matrix_from_json(read_file(reference_path));
    Eigen::MatrixXd own = eval::interaction_distance(map.similarity);
    auto mantel_res = eval::mantel(own, reference, 999, cfg.seed());
    matrix_json["mantel"] = {{"r", mantel_res.r},
                             {"p_value", mantel_res.p_value},
                             {"permutations", mantel_res.permutations}};
    std::cout << "mantel r " << mantel_res.r << ", p " << mantel_res.p_value << "\n";
  }

  write_file(args.out_dir + "/interaction.json", matrix_json.dump(2) + "\n");
  write_file(args.out_dir + "/interaction-heatmap.svg", eval::heatmap_svg(map.similarity));
  std::vector<double> row_max(map.similarity.rows());
  for (Eigen::Index r = 0; r < map.similarity.rows(); ++r)
    row_max[r] = map.similarity.row(r).maxCoeff();
  write_file(args.out_dir + "/interaction-strength.svg",
             eval::barchart_svg(row_max, "per-substructure peak interaction"));
  std::cout << "interaction matrix: " << args.out_dir + "/interaction.json" << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReAlignFit: substructure-aligned molecular relational learning"};
  app.require_subcommand(1);

  CommonArgs split_args, train_args, eval_args, analyze_args;
  std::string scenario = "original";
  std::string checkpoint_path, baseline_path;
  std::string analyze_checkpoint, pair_arg, pair_file, reference_path;

  auto* split_cmd = app.add_subcommand("split", "generate a split manifest");
  add_common(split_cmd, split_args);
  split_cmd->add_option("--scenario", scenario, "original | p1 | p2");

  auto* train_cmd = app.add_subcommand("train", "train a model on a split");
  add_common(train_cmd, train_args);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint JSON path");
  eval_cmd->add_option("--baseline", baseline_path, "baseline metrics JSON for RPD");

  auto* analyze_cmd = app.add_subcommand("analyze", "substructure interaction analysis");
  add_common(analyze_cmd, analyze_args);
  analyze_cmd->add_option("--checkpoint", analyze_checkpoint, "checkpoint JSON path");
  analyze_cmd->add_option("--pair", pair_arg, "\"MOLX,MOLY\" (SMILES or molecule JSON)");
  analyze_cmd->add_option("--pair-file", pair_file, "file with two molecule lines");
  analyze_cmd->add_option("--reference", reference_path, "reference matrix JSON for Mantel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (split_cmd->parsed()) return cmd_split(split_args, scenario);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, checkpoint_path, baseline_path);
    if (analyze_cmd->parsed())
      return cmd_analyze(analyze_args, analyze_checkpoint, pair_arg, pair_file, reference_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
  return 2;
}
