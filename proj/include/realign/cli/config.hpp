#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "realign/train/trainer.hpp"

namespace realign::cli {

// Flat key-value run configuration. Precedence: command line > config file
// > built-in default. Unknown keys are rejected; the effective document is
// echoed into every output artifact.
class RunConfig {
 public:
  static const std::map<std::string, std::string>& defaults();

  // `file_path` empty means no config file. Overrides are "key=value".
  static RunConfig load(const std::string& file_path,
                        const std::vector<std::string>& overrides);

  const std::string& str(const std::string& key) const;
  int integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::uint64_t seed() const;

  void set(const std::string& key, const std::string& value);  // validates the key

  train::TrainConfig to_train_config() const;
  double negative_ratio() const { return real("data.negative_ratio"); }

  // effective configuration in sorted key order
  nlohmann::ordered_json echo() const;

 private:
  std::map<std::string, std::string> kv_;
};

// Exit-code policy: 0 success, 2 configuration, 3 data, 4 numeric.
int exit_code_for(const std::exception& e);

}  // namespace realign::cli
