#include "gridcast/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace gridcast {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtoull(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

bool parse_f64(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> RunConfig::validate_problems() const {
  std::vector<std::string> problems;
  if (architecture != "standard" && architecture != "s2s") {
    problems.push_back("architecture must be standard or s2s, got '" + architecture + "'");
  }
  if (variant != "standard" && variant != "tanh_update") {
    problems.push_back("variant must be standard or tanh_update, got '" + variant + "'");
  }
  if (resolution != "minute" && resolution != "hour") {
    problems.push_back("resolution must be minute or hour, got '" + resolution + "'");
  }
  if (layers == 0) problems.push_back("layers must be >= 1");
  if (units == 0) problems.push_back("units must be >= 1");
  if (window == 0) problems.push_back("window must be >= 1");
  if (horizon == 0) problems.push_back("horizon must be >= 1");
  if (lag == 0) problems.push_back("lag must be >= 1");
  if (unroll_steps == 0) problems.push_back("unroll_steps must be >= 1");
  if (!(learning_rate > 0.0)) problems.push_back("learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) problems.push_back("beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) problems.push_back("beta2 must be in (0, 1)");
  if (!(epsilon > 0.0)) problems.push_back("epsilon must be > 0");
  if (!(clip_threshold > 0.0)) problems.push_back("clip_threshold must be > 0");
  if (dropout < 0.0 || dropout >= 1.0) problems.push_back("dropout must be in [0, 1)");
  if (!(pretrain_fraction >= 0.0 && pretrain_fraction <= 1.0)) {
    problems.push_back("pretrain_fraction must be in [0, 1]");
  }
  if (!(init_range > 0.0)) problems.push_back("init_range must be > 0");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    problems.push_back("train_fraction must be in (0, 1]");
  }
  if (min_valid_minutes == 0 || min_valid_minutes > 60) {
    problems.push_back("min_valid_minutes must be in 1..60");
  }
  return problems;
}

void RunConfig::validate() const {
  const std::vector<std::string> problems = validate_problems();
  if (!problems.empty()) {
    std::string msg = "invalid config (" + std::to_string(problems.size()) + " problems):";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.unroll_steps = unroll_steps;
  t.learning_rate = learning_rate;
  t.beta1 = beta1;
  t.beta2 = beta2;
  t.epsilon = epsilon;
  t.clip_threshold = clip_threshold;
  t.epochs = epochs;
  t.dropout_rate = dropout;
  t.dropout_reuse_mask = dropout_reuse_mask;
  t.seed = seed;
  t.loss_report_stride = loss_report_stride;
  t.window_stride = stride;
  t.carry_state = carry_state;
  return t;
}

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  auto set = [&](const std::string& key, const std::string& value) {
    std::uint64_t u = 0;
    double f = 0.0;
    bool b = false;
    auto bad = [&](const char* type) {
      problems.push_back("line " + std::to_string(line_no) + ": " + key + " expects " + type +
                         ", got '" + value + "'");
    };
    auto as_count = [&](std::size_t& field) {
      if (parse_u64(value, u)) field = static_cast<std::size_t>(u);
      else bad("a non-negative integer");
    };
    auto as_f64 = [&](double& field) {
      if (parse_f64(value, f)) field = f;
      else bad("a finite number");
    };
    auto as_bool = [&](bool& field) {
      if (parse_bool(value, b)) field = b;
      else bad("true or false");
    };

    if (key == "architecture") cfg.architecture = value;
    else if (key == "variant") cfg.variant = value;
    else if (key == "layers") as_count(cfg.layers);
    else if (key == "units") as_count(cfg.units);
    else if (key == "resolution") cfg.resolution = value;
    else if (key == "window") as_count(cfg.window);
    else if (key == "horizon") as_count(cfg.horizon);
    else if (key == "lag") as_count(cfg.lag);
    else if (key == "unroll_steps") as_count(cfg.unroll_steps);
    else if (key == "learning_rate") as_f64(cfg.learning_rate);
    else if (key == "beta1") as_f64(cfg.beta1);
    else if (key == "beta2") as_f64(cfg.beta2);
    else if (key == "epsilon") as_f64(cfg.epsilon);
    else if (key == "clip_threshold") as_f64(cfg.clip_threshold);
    else if (key == "epochs") as_count(cfg.epochs);
    else if (key == "dropout") as_f64(cfg.dropout);
    else if (key == "seed") {
      if (parse_u64(value, u)) cfg.seed = u;
      else bad("a 64-bit unsigned integer");
    } else if (key == "loss_report_stride") as_count(cfg.loss_report_stride);
    else if (key == "stride") as_count(cfg.stride);
    else if (key == "pretrain_fraction") as_f64(cfg.pretrain_fraction);
    else if (key == "init_range") as_f64(cfg.init_range);
    else if (key == "train_fraction") as_f64(cfg.train_fraction);
    else if (key == "carry_state") as_bool(cfg.carry_state);
    else if (key == "dropout_reuse_mask") as_bool(cfg.dropout_reuse_mask);
    else if (key == "forward_fill") as_bool(cfg.forward_fill);
    else if (key == "min_valid_minutes") as_count(cfg.min_valid_minutes);
    else if (key == "dataset") cfg.dataset = value;
    else if (key == "out") cfg.out = value;
    else {
      problems.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                         line + "'");
      continue;
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  // Field-level validation joins the parse diagnostics so one pass reports
  // every problem in the file.
  for (const std::string& p : cfg.validate_problems()) problems.push_back(p);
  if (!problems.empty()) {
    std::string msg = origin + ": " + std::to_string(problems.size()) + " config problems:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str(), path);
}

void write_run_config(const RunConfig& cfg, std::ostream& out) {
  out << "architecture = " << cfg.architecture << '\n';
  out << "variant = " << cfg.variant << '\n';
  out << "layers = " << cfg.layers << '\n';
  out << "units = " << cfg.units << '\n';
  out << "resolution = " << cfg.resolution << '\n';
  out << "window = " << cfg.window << '\n';
  out << "horizon = " << cfg.horizon << '\n';
  out << "lag = " << cfg.lag << '\n';
  out << "unroll_steps = " << cfg.unroll_steps << '\n';
  out << "learning_rate = " << fmt_double(cfg.learning_rate) << '\n';
  out << "beta1 = " << fmt_double(cfg.beta1) << '\n';
  out << "beta2 = " << fmt_double(cfg.beta2) << '\n';
  out << "epsilon = " << fmt_double(cfg.epsilon) << '\n';
  out << "clip_threshold = " << fmt_double(cfg.clip_threshold) << '\n';
  out << "epochs = " << cfg.epochs << '\n';
  out << "dropout = " << fmt_double(cfg.dropout) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "loss_report_stride = " << cfg.loss_report_stride << '\n';
  out << "stride = " << cfg.stride << '\n';
  out << "pretrain_fraction = " << fmt_double(cfg.pretrain_fraction) << '\n';
  out << "init_range = " << fmt_double(cfg.init_range) << '\n';
  out << "train_fraction = " << fmt_double(cfg.train_fraction) << '\n';
  out << "carry_state = " << (cfg.carry_state ? "true" : "false") << '\n';
  out << "dropout_reuse_mask = " << (cfg.dropout_reuse_mask ? "true" : "false") << '\n';
  out << "forward_fill = " << (cfg.forward_fill ? "true" : "false") << '\n';
  out << "min_valid_minutes = " << cfg.min_valid_minutes << '\n';
  out << "dataset = " << cfg.dataset << '\n';
  out << "out = " << cfg.out << '\n';
}

namespace {

void write_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << fmt_double(m.at(r, c));
    }
    out << '\n';
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);

  out << "GRIDCAST-CKPT 1\n";
  // The output directory is runtime context, not model identity; dropping
  // it keeps checkpoints byte-identical across output locations.
  RunConfig snapshot = ckpt.config;
  snapshot.out = "";
  std::ostringstream cfg;
  write_run_config(snapshot, cfg);
  const std::string cfg_text = cfg.str();
  const std::size_t cfg_lines = static_cast<std::size_t>(
      std::count(cfg_text.begin(), cfg_text.end(), '\n'));
  out << "config " << cfg_lines << '\n' << cfg_text;
  out << "norm " << fmt_double(ckpt.norm.mean_kw) << ' ' << fmt_double(ckpt.norm.std_kw)
      << '\n';

  std::vector<const Matrix*> tensors;
  std::vector<std::string> names;
  if (ckpt.is_s2s()) {
    tensors = param_tensors(ckpt.s2s());
    names = param_names(ckpt.s2s());
  } else {
    tensors = param_tensors(ckpt.stack());
    names = param_names(ckpt.stack());
  }
  out << "tensors " << tensors.size() << '\n';
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    write_tensor(out, names[i], *tensors[i]);
  }
  if (!out) throw DataError("write failed for checkpoint: " + path);
}

Checkpoint init_checkpoint(const RunConfig& cfg, const NormStats& norm) {
  cfg.validate();
  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.norm = norm;
  SeededRng rng(cfg.seed);
  if (cfg.architecture == "s2s") {
    ckpt.model = S2SParams::init(cfg.layers, cfg.units, cfg.init_range, rng,
                                 cfg.variant_enum());
  } else {
    ckpt.model = StackParams::init(4, cfg.layers, cfg.units, cfg.init_range, rng,
                                   cfg.variant_enum());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);

  std::string line;
  if (!std::getline(in, line) || (line != "GRIDCAST-CKPT 1" && line != "GRIDCAST-CKPT 1\r")) {
    throw DataError(path + ": not a GRIDCAST-CKPT 1 file");
  }

  std::size_t cfg_lines = 0;
  if (!(in >> line >> cfg_lines) || line != "config") {
    throw DataError(path + ": missing config section");
  }
  std::getline(in, line);  // consume end of the "config N" line
  std::string cfg_text;
  for (std::size_t i = 0; i < cfg_lines; ++i) {
    if (!std::getline(in, line)) throw DataError(path + ": truncated config section");
    cfg_text += line;
    cfg_text += '\n';
  }
  Checkpoint ckpt;
  ckpt.config = parse_run_config_text(cfg_text, path + " (embedded config)");

  if (!(in >> line >> ckpt.norm.mean_kw >> ckpt.norm.std_kw) || line != "norm") {
    throw DataError(path + ": missing norm section");
  }

  std::size_t tensor_count = 0;
  if (!(in >> line >> tensor_count) || line != "tensors") {
    throw DataError(path + ": missing tensors section");
  }

  // Build the expected structure from the config, then fill by name.
  Checkpoint fresh = init_checkpoint(ckpt.config, ckpt.norm);
  ckpt.model = std::move(fresh.model);
  std::vector<Matrix*> tensors;
  std::vector<std::string> names;
  if (ckpt.is_s2s()) {
    tensors = param_tensors(ckpt.s2s());
    names = param_names(ckpt.s2s());
  } else {
    tensors = param_tensors(ckpt.stack());
    names = param_names(ckpt.stack());
  }
  if (tensor_count != tensors.size()) {
    throw DataError(path + ": has " + std::to_string(tensor_count) + " tensors, config implies " +
                    std::to_string(tensors.size()));
  }
  std::map<std::string, Matrix*> by_name;
  for (std::size_t i = 0; i < tensors.size(); ++i) by_name[names[i]] = tensors[i];

  for (std::size_t t = 0; t < tensor_count; ++t) {
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols) || tag != "tensor") {
      throw DataError(path + ": malformed tensor block " + std::to_string(t));
    }
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError(path + ": unexpected tensor '" + name + "'");
    Matrix& m = *it->second;
    if (m.rows() != rows || m.cols() != cols) {
      throw DataError(path + ": tensor " + name + " is " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", config implies " + m.shape());
    }
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (!(in >> m.at(r, c))) {
          throw DataError(path + ": truncated values in tensor " + name);
        }
      }
    }
    by_name.erase(it);
  }
  if (!by_name.empty()) {
    throw DataError(path + ": tensor '" + by_name.begin()->first + "' missing");
  }
  return ckpt;
}

LoadSeries load_series_auto(const std::string& path, Resolution target,
                            std::size_t min_valid_minutes) {
  std::ifstream probe(path);
  if (!probe) throw DataError("cannot open data file: " + path);
  std::string first;
  std::getline(probe, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  probe.close();

  if (first == "timestamp,active_power_kw,valid") {
    LoadSeries s = read_series_csv(path);
    if (s.resolution == target) return s;
    if (s.resolution == Resolution::minute && target == Resolution::hour) {
      return resample_hourly(s, min_valid_minutes);
    }
    throw DataError(path + " is an hourly series but a minute-resolution run was requested");
  }
  if (first.rfind("Date;Time;", 0) == 0) {
    ParsedDataset parsed = parse_dataset(path);
    LoadSeries minutes = to_minute_series(std::move(parsed.records));
    if (target == Resolution::minute) return minutes;
    return resample_hourly(minutes, min_valid_minutes);
  }
  throw DataError(path + ": unrecognized data format (expected the benchmark file or a " +
                  "canonical series CSV)");
}

}  // namespace gridcast
