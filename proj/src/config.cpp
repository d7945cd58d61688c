#include "eadgen/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eadgen/errors.hpp"

namespace eadgen {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out;
  in >> out;
  char left;
  if (!in || in.get(left)) {
    throw ConfigError("config: bad value for " + key + ": '" + value + "'");
  }
  return out;
}

void set_key(AppConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "embed_dim") {
    cfg.model.embed_dim = parse_number<std::size_t>(key, value);
  } else if (key == "act_dim") {
    cfg.model.act_dim = parse_number<std::size_t>(key, value);
  } else if (key == "hidden_dim") {
    cfg.model.hidden_dim = parse_number<std::size_t>(key, value);
  } else if (key == "refiner") {
    cfg.model.refiner = refiner_from_name(value);
  } else if (key == "init_range") {
    cfg.model.init_range = parse_number<double>(key, value);
  } else if (key == "max_len") {
    cfg.model.max_len = parse_number<std::size_t>(key, value);
    cfg.beam.max_len = cfg.model.max_len;
  } else if (key == "lr") {
    cfg.train.lr = parse_number<double>(key, value);
  } else if (key == "lr_decay") {
    cfg.train.lr_decay = parse_number<double>(key, value);
  } else if (key == "l2_coeff") {
    cfg.train.l2_coeff = parse_number<double>(key, value);
  } else if (key == "l2_every") {
    cfg.train.l2_every = parse_number<std::size_t>(key, value);
  } else if (key == "dropout_rate") {
    cfg.train.dropout_rate = parse_number<double>(key, value);
  } else if (key == "patience") {
    cfg.train.patience = parse_number<std::size_t>(key, value);
  } else if (key == "max_epochs") {
    cfg.train.max_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.train.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "restarts") {
    cfg.train.restarts = parse_number<std::size_t>(key, value);
  } else if (key == "clip_norm") {
    cfg.train.clip_norm = parse_number<double>(key, value);
  } else if (key == "beam_width") {
    cfg.beam.width = parse_number<std::size_t>(key, value);
  } else if (key == "overgen") {
    cfg.beam.overgen = parse_number<std::size_t>(key, value);
  } else if (key == "topk") {
    cfg.beam.topk = parse_number<std::size_t>(key, value);
  } else if (key == "lambda") {
    cfg.beam.lambda = parse_number<double>(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

}  // namespace

AppConfig parse_config_text(const std::string& text, const std::string& source,
                            AppConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + source + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config: " + source + ":" + std::to_string(line_no) +
                        ": empty key or value");
    }
    try {
      set_key(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return base;
}

AppConfig load_config_file(const std::string& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path, std::move(base));
}

void apply_override(AppConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("config: override must be key=value, got '" +
                      assignment + "'");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (key.empty() || value.empty()) {
    throw ConfigError("config: override must be key=value, got '" +
                      assignment + "'");
  }
  set_key(cfg, key, value);
}

std::vector<std::pair<std::string, std::string>> config_items(
    const AppConfig& cfg) {
  auto num = [](auto v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  return {
      {"embed_dim", num(cfg.model.embed_dim)},
      {"act_dim", num(cfg.model.act_dim)},
      {"hidden_dim", num(cfg.model.hidden_dim)},
      {"refiner", refiner_name(cfg.model.refiner)},
      {"init_range", num(cfg.model.init_range)},
      {"max_len", num(cfg.model.max_len)},
      {"lr", num(cfg.train.lr)},
      {"lr_decay", num(cfg.train.lr_decay)},
      {"l2_coeff", num(cfg.train.l2_coeff)},
      {"l2_every", num(cfg.train.l2_every)},
      {"dropout_rate", num(cfg.train.dropout_rate)},
      {"patience", num(cfg.train.patience)},
      {"max_epochs", num(cfg.train.max_epochs)},
      {"seed", num(cfg.train.seed)},
      {"restarts", num(cfg.train.restarts)},
      {"clip_norm", num(cfg.train.clip_norm)},
      {"beam_width", num(cfg.beam.width)},
      {"overgen", num(cfg.beam.overgen)},
      {"topk", num(cfg.beam.topk)},
      {"lambda", num(cfg.beam.lambda)},
  };
}

std::string config_to_json(const AppConfig& cfg) {
  nlohmann::json j;
  for (const auto& [key, value] : config_items(cfg)) j[key] = value;
  return j.dump();
}

}  // namespace eadgen
