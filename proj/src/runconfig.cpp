#include "courtqg/runconfig.hpp"

#include <fstream>

#include "json.hpp"

namespace courtqg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

size_t parse_size(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size() || v < 0) throw std::invalid_argument(value);
    return static_cast<size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config key \"" + key + "\": expected a non-negative integer, got \"" +
                      value + "\"");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key \"" + key + "\": expected a number, got \"" + value + "\"");
  }
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "train.lambda")
    train.l2_lambda = parse_double(key, value);
  else if (key == "train.mu")
    train.learning_rate = parse_double(key, value);
  else if (key == "train.epochs")
    train.epochs = parse_size(key, value);
  else if (key == "train.batch_size")
    train.batch_size = parse_size(key, value);
  else if (key == "train.max_target_len")
    train.max_target_len = parse_size(key, value);
  else if (key == "train.min_freq")
    train.min_freq = parse_size(key, value);
  else if (key == "train.seed")
    train.seed = parse_size(key, value);
  else if (key == "train.ablation")
    train.ablation = AblationFlags::parse(value);
  else if (key == "model.d_word")
    model.encoder.d_word = parse_size(key, value);
  else if (key == "model.d_role")
    model.encoder.d_role = parse_size(key, value);
  else if (key == "model.d_elem")
    model.encoder.d_elem = parse_size(key, value);
  else if (key == "model.d_h")
    model.encoder.d_h = parse_size(key, value);
  else if (key == "model.d_intent")
    model.intent.d_intent = parse_size(key, value);
  else if (key == "model.d_roletrans")
    model.intent.d_roletrans = parse_size(key, value);
  else if (key == "model.d_att")
    model.d_att = parse_size(key, value);
  else
    throw ConfigError("unknown config key \"" + key + "\"");
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value, got \"" +
                        line + "\"");
    apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["train"] = nlohmann::ordered_json::parse(train.to_json());
  j["model"] = nlohmann::ordered_json::parse(model.to_json());
  return j.dump();
}

}  // namespace courtqg
