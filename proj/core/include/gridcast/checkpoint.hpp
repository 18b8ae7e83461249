#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "gridcast/data.hpp"
#include "gridcast/s2s.hpp"

namespace gridcast {

// Resolved experiment knobs. Parsed from a line-oriented UTF-8 file of
// "key = value" pairs with '#' comments; unknown keys are rejected and the
// whole file is validated before any computation.
struct RunConfig {
  std::string architecture = "standard";  // standard | s2s
  std::string variant = "standard";       // standard | tanh_update
  std::size_t layers = 1;
  std::size_t units = 10;
  std::string resolution = "hour";  // minute | hour
  std::size_t window = 60;          // evaluation/S2S input window M
  std::size_t horizon = 60;         // forecast steps n
  std::size_t lag = 1;              // y-input delay k for the standard model
  std::size_t unroll_steps = 50;    // BPTT unroll for the standard fit
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_threshold = 5.0;
  std::size_t epochs = 10;
  double dropout = 0.2;
  std::uint64_t seed = 42;
  std::size_t loss_report_stride = 1;
  std::size_t stride = 0;  // training stride; 0 = module default
  double pretrain_fraction = 0.2;
  double init_range = 0.08;
  double train_fraction = 1.0;  // leading fraction of the train partition used
  bool carry_state = false;
  bool dropout_reuse_mask = false;
  bool forward_fill = false;
  std::size_t min_valid_minutes = 1;
  std::string dataset;
  std::string out = ".";

  std::vector<std::string> validate_problems() const;
  void validate() const;  // throws ConfigError listing every problem
  TrainConfig train_config() const;
  Resolution resolution_enum() const { return resolution_from_string(resolution); }
  CellVariant variant_enum() const { return cell_variant_from_string(variant); }
};

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text, const std::string& origin);

// Full key = value dump in a fixed order (embedded into checkpoints and
// echoed into logs).
void write_run_config(const RunConfig& cfg, std::ostream& out);

// Versioned UTF-8 checkpoint: header "GRIDCAST-CKPT 1", the config
// snapshot, the normalization statistics, then one block per tensor
// ("tensor <name> <rows> <cols>" followed by row-major values, 17
// significant digits, exact for 64-bit doubles).
struct Checkpoint {
  RunConfig config;
  NormStats norm;
  std::variant<StackParams, S2SParams> model;

  bool is_s2s() const { return std::holds_alternative<S2SParams>(model); }
  StackParams& stack() { return std::get<StackParams>(model); }
  const StackParams& stack() const { return std::get<StackParams>(model); }
  S2SParams& s2s() { return std::get<S2SParams>(model); }
  const S2SParams& s2s() const { return std::get<S2SParams>(model); }
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Fresh model built from the config (uniform init in [-init_range, +init_range]).
Checkpoint init_checkpoint(const RunConfig& cfg, const NormStats& norm);

// Reads either a canonical series CSV or a raw benchmark file (sniffed from
// the header) and returns it at the requested resolution.
LoadSeries load_series_auto(const std::string& path, Resolution target,
                            std::size_t min_valid_minutes = 1);

}  // namespace gridcast
