#include "realign/cli/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "realign/core/error.hpp"

namespace realign::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"encoder.variant", "mpnn"},
      {"encoder.layers", "3"},
      {"encoder.hidden_dim", "32"},
      {"encoder.activation", "tanh"},
      {"substructure.k_hops", "2"},
      {"dram.rho", "0.3"},
      {"dram.bandwidth_mode", "median"},
      {"dram.bandwidth", "1.0"},
      {"dram.temperature", "1.0"},
      {"loss.alpha", "0.1"},
      {"loss.beta", "0.1"},
      {"model.task", "ddi"},
      {"model.symmetric_head", "true"},
      {"model.ablate_dram", "false"},
      {"trainer.T", "3"},
      {"trainer.T1", "2"},
      {"trainer.T2", "2"},
      {"trainer.epochs", "50"},
      {"trainer.batch_size", "128"},
      {"trainer.dropout", "0.1"},
      {"trainer.lr", "0.001"},
      {"trainer.convergence_tol", "1e-4"},
      {"data.negative_ratio", "1.0"},
      {"seed", "0"},
  };
  return kDefaults;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key))
    throw ConfigError("unknown configuration key: " + key);
  kv_[key] = value;
}

RunConfig RunConfig::load(const std::string& file_path,
                          const std::vector<std::string>& overrides) {
  RunConfig cfg;
  cfg.kv_ = defaults();
  if (!file_path.empty()) {
    std::ifstream f(file_path);
    if (!f) throw ConfigError("cannot open config file: " + file_path);
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
      ++line_no;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": expected key = value");
      cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
  }
  for (const auto& o : overrides) {
    std::size_t eq = o.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must be key=value, got: " + o);
    cfg.set(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  return cfg;
}

const std::string& RunConfig::str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("unknown configuration key: " + key);
  return it->second;
}

int RunConfig::integer(const std::string& key) const {
  try {
    return std::stoi(str(key));
  } catch (const std::exception&) {
    throw ConfigError("configuration key " + key + " expects an integer, got " + str(key));
  }
}

double RunConfig::real(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigError("configuration key " + key + " expects a number, got " + v);
  }
}

bool RunConfig::boolean(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("configuration key " + key + " expects true/false, got " + v);
}

std::uint64_t RunConfig::seed() const {
  try {
    return std::stoull(str("seed"));
  } catch (const std::exception&) {
    throw ConfigError("seed expects a non-negative integer, got " + str("seed"));
  }
}

train::TrainConfig RunConfig::to_train_config() const {
  train::TrainConfig t;
  t.model.variant = srin::encoder_variant_from_name(str("encoder.variant"));
  t.model.layers = integer("encoder.layers");
  t.model.hidden_dim = integer("encoder.hidden_dim");
  t.model.activation = srin::activation_from_name(str("encoder.activation"));
  t.model.k_hops = integer("substructure.k_hops");
  t.model.rho = real("dram.rho");
  const std::string& bw = str("dram.bandwidth_mode");
  if (bw == "median") t.model.bandwidth_mode = dram::BandwidthMode::Median;
  else if (bw == "fixed") t.model.bandwidth_mode = dram::BandwidthMode::Fixed;
  else throw ConfigError("dram.bandwidth_mode expects median or fixed, got " + bw);
  t.model.bandwidth = real("dram.bandwidth");
  t.model.temperature = real("dram.temperature");
  t.model.weights.alpha = real("loss.alpha");
  t.model.weights.beta = real("loss.beta");
  t.model.task = loss::task_from_name(str("model.task"));
  t.model.symmetric_head = boolean("model.symmetric_head");
  t.model.ablate_dram = boolean("model.ablate_dram");
  t.model.dropout = real("trainer.dropout");
  t.t_outer = integer("trainer.T");
  t.t1 = integer("trainer.T1");
  t.t2 = integer("trainer.T2");
  t.epochs_cap = integer("trainer.epochs");
  t.batch_size = integer("trainer.batch_size");
  t.lr = real("trainer.lr");
  t.convergence_tol = real("trainer.convergence_tol");
  t.seed = seed();
  t.validate();
  return t;
}

nlohmann::ordered_json RunConfig::echo() const {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : kv_) j[k] = v;  // std::map iterates sorted
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  return 3;
}

}  // namespace realign::cli
