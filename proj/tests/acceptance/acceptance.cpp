// Acceptance suite: one criterion per run (--criterion N) or all in order.
// Each criterion prints a single PASS/FAIL line; dataset-backed criteria
// (3-6) print NOT RUN and exit 4 when the benchmark file is unavailable.
//
// Exit codes: 0 pass, 1 fail, 4 dataset required but not provided.
//
// Every threshold below is fixed ahead of execution: tolerance bands come
// from the criteria themselves, and synthetic-task hyperparameters were
// frozen after pilot runs and must not be tuned against failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "gridcast/eval.hpp"
#include "gridcast/gradcheck.hpp"
#include "test_util.hpp"

using namespace gridcast;

namespace {

struct Outcome {
  bool ran = true;
  bool pass = false;
  std::string detail;
};

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[2];
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string fmt_sci(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// ---------------------------------------------------------------------------
// Criterion 1: gradient oracle.

Outcome criterion_gradients() {
  Timer timer;
  // 12 configurations drawn from layers {1,2,3} x units {2,4,8} x M {1,5,10},
  // six per cell variant, covering every value of each axis.
  struct Cfg {
    std::size_t layers, units, steps;
  };
  const Cfg grid[6] = {{1, 2, 1}, {1, 4, 5}, {1, 8, 10}, {2, 4, 10}, {2, 8, 5}, {3, 8, 10}};

  double worst = 0.0;
  std::uint64_t seed = 9000;
  for (CellVariant v : {CellVariant::standard, CellVariant::tanh_update}) {
    for (const Cfg& c : grid) {
      const GradCheckReport r = gradcheck_stack(c.layers, c.units, c.steps, v, seed++);
      worst = std::max(worst, r.worst);
      if (!r.pass(1e-5)) {
        return {true, false,
                "stack " + std::to_string(c.layers) + "x" + std::to_string(c.units) + " M=" +
                    std::to_string(c.steps) + " " + to_string(v) + " max rel err " +
                    fmt_sci(r.worst)};
      }
    }
  }
  // One S2S configuration: encoder gradients of the horizon loss through
  // the state handoff (all encoder tensors checked).
  const GradCheckReport s2s = gradcheck_s2s(2, 4, 5, 4, CellVariant::standard, 9100);
  worst = std::max(worst, s2s.worst);
  const double secs = timer.seconds();
  const bool pass = s2s.pass(1e-5) && secs < 120.0;
  return {true, pass,
          "12 stack configs + s2s handoff, worst rel err " + fmt_sci(worst) + ", " +
              fmt(secs) + " s (budget 120)"};
}

// ---------------------------------------------------------------------------
// Criterion 2: synthetic convergence.

Outcome criterion_synthetic_convergence() {
  Timer timer;
  // Seeded sine-plus-daily-pattern series, unit amplitude; last 240 hours
  // held out. Recipe frozen from the pilot: pretrain 8 + joint 42 epochs
  // (50 total), lr 5e-3, M = n = 24, block stride 7, no dropout.
  const LoadSeries series = testutil::make_sine_series(1400, {.noise = 0.02, .seed = 2026});
  LoadSeries train = series, held = series;
  train.values_kw.resize(1160);
  train.valid.resize(1160);
  held.start = series.timestamp_at(1160);
  held.values_kw.erase(held.values_kw.begin(), held.values_kw.begin() + 1160);
  held.valid.erase(held.valid.begin(), held.valid.begin() + 1160);
  const NormStats stats = fit_norm(train);

  std::vector<double> rmses;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    SeededRng rng(seed);
    S2SParams model = S2SParams::init(1, 8, 0.08, rng);
    TrainConfig pre;
    pre.unroll_steps = 24;
    pre.epochs = 8;
    pre.learning_rate = 5e-3;
    pre.seed = seed;
    pretrain_encoder(model, train, stats, pre);
    TrainConfig joint;
    joint.epochs = 42;
    joint.learning_rate = 5e-3;
    joint.seed = seed;
    joint.window_stride = 7;
    joint_train(model, train, stats, joint, 24, 24);

    RunConfig rc;
    rc.architecture = "s2s";
    rc.layers = 1;
    rc.units = 8;
    rc.window = 24;
    rc.horizon = 24;
    Checkpoint ckpt{rc, stats, model};
    const EvalResult r = evaluate(ckpt, held, EvalOptions{24, 24, false});
    rmses.push_back(r.rmse_kw);  // raw units of the unit-amplitude series
  }
  const double med = median5(rmses);
  const double secs = timer.seconds();
  const bool pass = med < 0.1 && secs < 300.0;
  return {true, pass,
          "held-out RMSE 5-seed median " + fmt(med) + " (< 0.1), " + fmt(secs) +
              " s (budget 300)"};
}

// ---------------------------------------------------------------------------
// Dataset plumbing for criteria 3-6.

struct Dataset {
  LoadSeries minutes;
  LoadSeries hours;
  ParseReport report;
};

std::optional<std::string> find_dataset(const std::string& cli_path) {
  std::vector<std::string> candidates;
  if (!cli_path.empty()) candidates.push_back(cli_path);
  if (const char* env = std::getenv("GRIDCAST_DATA")) candidates.push_back(env);
  candidates.push_back("data/household_power_consumption.txt");
  candidates.push_back("household_power_consumption.txt");
  for (const std::string& c : candidates) {
    std::ifstream probe(c);
    if (probe) return c;
  }
  return std::nullopt;
}

Dataset load_dataset(const std::string& path) {
  ParsedDataset parsed = parse_dataset(path);
  Dataset d;
  d.report = parsed.report;
  d.minutes = to_minute_series(std::move(parsed.records));
  d.hours = resample_hourly(d.minutes);
  return d;
}

Checkpoint make_ckpt(const std::string& arch, std::size_t layers, std::size_t units,
                     std::size_t lag, const std::string& resolution, const NormStats& stats,
                     std::uint64_t seed) {
  RunConfig rc;
  rc.architecture = arch;
  rc.layers = layers;
  rc.units = units;
  rc.lag = lag;
  rc.resolution = resolution;
  rc.seed = seed;
  return init_checkpoint(rc, stats);
}

// ---------------------------------------------------------------------------
// Criterion 3: hourly benchmark reproduction.

Outcome criterion_hourly(const Dataset& d) {
  Timer timer;
  auto [train, test] = split(d.hours, SplitSpec::first_three_years(d.hours));
  const NormStats stats = fit_norm(train);

  Checkpoint ckpt = make_ckpt("s2s", 2, 10, 1, "hour", stats, 2026);
  ckpt.config.window = 60;
  ckpt.config.horizon = 60;

  TrainConfig pre;
  pre.unroll_steps = 50;
  pre.epochs = 8;
  pre.learning_rate = 1e-3;
  pre.dropout_rate = 0.2;
  pre.seed = 2026;
  pretrain_encoder(ckpt.s2s(), train, stats, pre);
  TrainConfig joint;
  joint.epochs = 40;
  joint.learning_rate = 1e-3;
  joint.dropout_rate = 0.2;
  joint.seed = 2026;
  joint_train(ckpt.s2s(), train, stats, joint, 60, 60);

  const EvalResult train_r = evaluate(ckpt, train, EvalOptions{60, 60, false});
  const EvalResult test_r = evaluate(ckpt, test, EvalOptions{60, 60, false});
  const double secs = timer.seconds();
  const bool pass = test_r.rmse_norm > 0.475 && test_r.rmse_norm < 0.775 && secs < 3600.0;
  return {true, pass,
          "normalized test RMSE " + fmt(test_r.rmse_norm) + " (band 0.625 +/- 0.15), train " +
              fmt(train_r.rmse_norm) + ", " + fmt(secs) + " s (budget 3600)"};
}

// ---------------------------------------------------------------------------
// Criterion 4: capacity trend.

Outcome criterion_capacity_trend(const Dataset& d) {
  auto [train, test] = split(d.hours, SplitSpec::first_three_years(d.hours));
  const NormStats stats = fit_norm(train);

  const std::size_t unit_grid[4] = {5, 20, 50, 100};
  std::vector<double> train_rmse, test_rmse;
  for (std::size_t units : unit_grid) {
    Checkpoint ckpt = make_ckpt("s2s", 1, units, 1, "hour", stats, 2026);
    TrainConfig pre;
    pre.unroll_steps = 50;
    pre.epochs = 4;
    pre.learning_rate = 1e-3;
    pre.seed = 2026;
    pretrain_encoder(ckpt.s2s(), train, stats, pre);
    TrainConfig joint;
    joint.epochs = 20;
    joint.learning_rate = 1e-3;
    joint.seed = 2026;
    const TrainLog log = joint_train(ckpt.s2s(), train, stats, joint, 60, 60);
    train_rmse.push_back(log.epochs.back().rmse_train);
    test_rmse.push_back(evaluate(ckpt, test, EvalOptions{60, 60, false}).rmse_norm);
  }

  bool train_decreases = true;
  for (int i = 0; i < 3; ++i) train_decreases = train_decreases && train_rmse[i + 1] < train_rmse[i];
  bool test_improves_monotonically = true;
  for (int i = 0; i < 3; ++i) {
    test_improves_monotonically = test_improves_monotonically && test_rmse[i + 1] < test_rmse[i];
  }

  std::string detail = "train RMSE (5/20/50/100 units): ";
  for (double r : train_rmse) detail += fmt(r) + " ";
  detail += "| test: ";
  for (double r : test_rmse) detail += fmt(r) + " ";
  return {true, train_decreases && !test_improves_monotonically, detail};
}

// ---------------------------------------------------------------------------
// Criterion 5: naive-mapping reproduction and the delayed-input escape.

Outcome criterion_naive_mapping(const Dataset& d) {
  // Minute data: a one-step model nearly ties persistence (within 10%) and
  // collapses recursively (>= 2x its one-step RMSE over 60-step horizons).
  auto [mtrain, mtest] = split(d.minutes, SplitSpec::first_three_years(d.minutes));
  const NormStats mstats = fit_norm(mtrain);

  Checkpoint minute_ckpt = make_ckpt("standard", 1, 20, 1, "minute", mstats, 2026);
  TrainConfig mcfg;
  mcfg.unroll_steps = 50;
  mcfg.epochs = 3;
  mcfg.learning_rate = 1e-3;
  mcfg.seed = 2026;
  fit(minute_ckpt.stack(), build_supervised(mtrain, mstats, 1), mcfg);

  const EvalResult one_step = evaluate(minute_ckpt, mtest, EvalOptions{0, 0, true});
  const EvalResult recursive = evaluate(minute_ckpt, mtest, EvalOptions{60, 60, false});
  const double vs_persistence =
      std::fabs(one_step.rmse_norm - one_step.rmse_persistence_norm) /
      one_step.rmse_persistence_norm;
  const double collapse = recursive.rmse_norm / one_step.rmse_norm;
  const bool minute_part = vs_persistence <= 0.10 && collapse >= 2.0;

  // Hourly data: the lag-5 delayed-input model beats the lag-1 recursive
  // model over the same 60-step blocks.
  auto [htrain, htest] = split(d.hours, SplitSpec::first_three_years(d.hours));
  const NormStats hstats = fit_norm(htrain);
  auto train_hourly = [&](std::size_t lag) {
    Checkpoint ckpt = make_ckpt("standard", 1, 20, lag, "hour", hstats, 2026);
    TrainConfig cfg;
    cfg.unroll_steps = 50;
    cfg.epochs = 15;
    cfg.learning_rate = 1e-3;
    cfg.seed = 2026;
    fit(ckpt.stack(), build_supervised(htrain, hstats, lag), cfg);
    return ckpt;
  };
  const Checkpoint k1 = train_hourly(1);
  const Checkpoint k5 = train_hourly(5);
  const double rec_rmse = evaluate(k1, htest, EvalOptions{60, 60, false}).rmse_norm;
  const double del_rmse = evaluate(k5, htest, EvalOptions{60, 60, false}).rmse_norm;
  const bool hourly_part = del_rmse < rec_rmse;

  return {true, minute_part && hourly_part,
          "one-step vs persistence " + fmt(100 * vs_persistence) + "% (<= 10%), recursive/one-step " +
              fmt(collapse) + "x (>= 2), delayed k=5 " + fmt(del_rmse) + " vs recursive k=1 " +
              fmt(rec_rmse)};
}

// ---------------------------------------------------------------------------
// Criterion 6: pipeline fidelity.

// Independent recount: a from-scratch pass over the raw file that shares no
// code with the pipeline. Counts well-formed rows and the distinct hours
// holding at least one valid power value.
struct Recount {
  std::size_t records = 0;
  std::size_t hours_with_valid_minute = 0;
};

Recount independent_recount(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  Recount rc;
  std::map<std::string, bool> hour_seen;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    // Date;Time;power;... -> cut at the third ';'
    const std::size_t p1 = line.find(';');
    const std::size_t p2 = p1 == std::string::npos ? p1 : line.find(';', p1 + 1);
    const std::size_t p3 = p2 == std::string::npos ? p2 : line.find(';', p2 + 1);
    if (p3 == std::string::npos) continue;
    int day = 0, mon = 0, year = 0, hh = 0, mm = 0, ss = 0;
    if (std::sscanf(line.c_str(), "%d/%d/%d;%d:%d:%d", &day, &mon, &year, &hh, &mm, &ss) != 6) {
      continue;
    }
    ++rc.records;
    const std::string power = line.substr(p2 + 1, p3 - p2 - 1);
    if (power != "?" && !power.empty()) {
      char key[32];
      std::snprintf(key, sizeof(key), "%04d-%02d-%02d %02d", year, mon, day, hh);
      hour_seen[key] = true;
    }
  }
  rc.hours_with_valid_minute = hour_seen.size();
  return rc;
}

Outcome criterion_pipeline(const Dataset& d, const std::string& path) {
  std::vector<std::string> problems;

  if (d.report.records != 2075259) {
    problems.push_back("parsed " + std::to_string(d.report.records) +
                       " records, expected 2075259");
  }

  // First record of the published file: 2006-12-16 17:24, 4.216 kW.
  {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);
    if (line.rfind("16/12/2006;17:24:00;4.216;", 0) != 0) {
      problems.push_back("first data line is not the benchmark's known first record");
    }
  }

  const Recount rc = independent_recount(path);
  if (rc.records != d.report.records) {
    problems.push_back("recount records " + std::to_string(rc.records) + " != parser " +
                       std::to_string(d.report.records));
  }
  if (rc.hours_with_valid_minute != d.hours.valid_count()) {
    problems.push_back("recount valid hours " + std::to_string(rc.hours_with_valid_minute) +
                       " != pipeline " + std::to_string(d.hours.valid_count()));
  }

  auto [train, test] = split(d.hours, SplitSpec::first_three_years(d.hours));
  const Timestamp boundary = add_years(d.hours.start, 3);
  const CivilTime b = civil_from(test.start);
  const CivilTime s = civil_from(d.hours.start);
  if (test.start != boundary || b.year != s.year + 3 || b.month != s.month || b.day != s.day ||
      b.hour != s.hour) {
    problems.push_back("split boundary " + iso8601(test.start) + " is not start + 3 years");
  }
  if (train.timestamp_at(train.size() - 1) + 3600 != test.start ||
      train.size() + test.size() != d.hours.size()) {
    problems.push_back("partitions are not contiguous and exhaustive");
  }

  // Leakage audit: the statistics are a function of the train partition only.
  const NormStats before = fit_norm(train);
  LoadSeries mutated_test = test;
  for (double& v : mutated_test.values_kw) v = -v * 7.0;
  const NormStats after = fit_norm(train);
  if (!(before == after)) problems.push_back("NormStats changed when test values mutated");

  if (problems.empty()) {
    return {true, true,
            std::to_string(d.report.records) + " records, " +
                std::to_string(d.hours.valid_count()) + " valid hours (recount agrees), " +
                "boundary " + iso8601(test.start)};
  }
  std::string detail;
  for (const std::string& p : problems) detail += p + "; ";
  return {true, false, detail};
}

// ---------------------------------------------------------------------------
// Criterion 7: unit/property bundle.

Outcome criterion_properties() {
  std::vector<std::string> problems;

  // Norm clipping: post-norm bound and exact direction preservation.
  {
    SeededRng rng(71);
    GradSet g;
    g.tensors = {uniform_init(4, 4, 3.0, rng), uniform_init(1, 9, 3.0, rng)};
    const double before = g.norm();
    GradSet c = clip_global_norm(g, 1.0);
    if (!(c.norm() <= 1.0 * (1 + 1e-12))) problems.push_back("clip post-norm exceeds threshold");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < g.tensors.size(); ++i) {
      for (std::size_t j = 0; j < g.tensors[i].values().size(); ++j) {
        const double a = g.tensors[i].values()[j], b = c.tensors[i].values()[j];
        dot += a * b;
        na += a * a;
        nb += b * b;
      }
    }
    if (std::fabs(dot / std::sqrt(na * nb) - 1.0) > 1e-12) {
      problems.push_back("clip changed the gradient direction");
    }
    if (before <= 1.0) problems.push_back("clip fixture did not exceed the threshold");
  }

  // ADAM: first-step magnitude ~ alpha.
  {
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    Matrix theta{{2.0, -1.0}};
    AdamState adam = AdamState::init_for({&theta});
    GradSet g;
    g.tensors = {Matrix{{17.0, -0.3}}};
    adam_step({&theta}, adam, g, cfg);
    if (std::fabs(std::fabs(theta.at(0, 0) - 2.0) - 0.05) > 1e-6 ||
        std::fabs(std::fabs(theta.at(0, 1) + 1.0) - 0.05) > 1e-6) {
      problems.push_back("ADAM first-step magnitude is not ~alpha");
    }
  }

  // Checkpoint round trip: bitwise parameters, identical re-serialization.
  {
    RunConfig rc;
    rc.architecture = "s2s";
    rc.layers = 2;
    rc.units = 4;
    rc.seed = 99;
    Checkpoint ckpt = init_checkpoint(rc, NormStats{1.5, 0.5});
    const std::string p1 = "/tmp/gridcast_accept_a.ckpt";
    const std::string p2 = "/tmp/gridcast_accept_b.ckpt";
    save_checkpoint(ckpt, p1);
    Checkpoint back = load_checkpoint(p1);
    save_checkpoint(back, p2);
    std::ifstream f1(p1), f2(p2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    if (s1.str() != s2.str()) problems.push_back("checkpoint round trip not byte-stable");
    auto ta = param_tensors(std::as_const(ckpt).s2s());
    auto tb = param_tensors(std::as_const(back).s2s());
    for (std::size_t i = 0; i < ta.size(); ++i) {
      if (!(*ta[i] == *tb[i])) {
        problems.push_back("checkpoint round trip altered tensor values");
        break;
      }
    }
    std::remove(p1.c_str());
    std::remove(p2.c_str());
  }

  // Determinism: identical seed, identical parameters after training.
  {
    const LoadSeries series = testutil::make_sine_series(300, {.seed = 73});
    const NormStats stats = fit_norm(series);
    auto train_once = [&]() {
      SeededRng rng(73);
      StackParams m = StackParams::init(4, 1, 4, 0.08, rng);
      TrainConfig cfg;
      cfg.unroll_steps = 20;
      cfg.epochs = 2;
      cfg.dropout_rate = 0.2;
      cfg.seed = 73;
      fit(m, build_supervised(series, stats, 1), cfg);
      return m;
    };
    StackParams a = train_once();
    StackParams b = train_once();
    auto ta = param_tensors(std::as_const(a));
    auto tb = param_tensors(std::as_const(b));
    for (std::size_t i = 0; i < ta.size(); ++i) {
      if (!(*ta[i] == *tb[i])) {
        problems.push_back("training is not bit-deterministic for a fixed seed");
        break;
      }
    }
  }

  // Decoder input audit: no load value can reach the decoder.
  {
    SeededRng rng(79);
    S2SParams model = S2SParams::init(1, 4, 0.3, rng);
    const LoadSeries series = testutil::make_sine_series(300, {.seed = 79});
    const NormStats stats = fit_norm(series);
    std::size_t probed = 0;
    bool pure_calendar = true;
    set_decoder_input_probe([&](const CalendarFeatures& c, const Matrix& m) {
      ++probed;
      pure_calendar = pure_calendar && m.cols() == 3 && m.at(0, 0) == c.day_scaled() &&
                      m.at(0, 1) == c.day_week_scaled() && m.at(0, 2) == c.hour_scaled();
    });
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 79;
    joint_train(model, series, stats, cfg, 24, 12);
    std::vector<double> window_kw(series.values_kw.begin(), series.values_kw.begin() + 24);
    std::vector<Timestamp> window_ts, future_ts;
    for (std::size_t j = 0; j < 24; ++j) window_ts.push_back(series.timestamp_at(j));
    for (std::size_t j = 24; j < 36; ++j) future_ts.push_back(series.timestamp_at(j));
    s2s_forecast(model, stats, window_kw, window_ts, future_ts);
    set_decoder_input_probe(nullptr);
    if (probed == 0 || !pure_calendar) {
      problems.push_back("decoder input audit failed");
    }
    if (model.decoder.input_dim() != 3) problems.push_back("decoder input is not 3-wide");
  }

  if (problems.empty()) {
    return {true, true, "clip, ADAM, checkpoint round trip, determinism, decoder audit"};
  }
  std::string detail;
  for (const std::string& p : problems) detail += p + "; ";
  return {true, false, detail};
}

const char* kNames[8] = {"",
                         "gradient oracle",
                         "synthetic convergence",
                         "hourly benchmark reproduction",
                         "capacity trend",
                         "naive-mapping reproduction",
                         "pipeline fidelity",
                         "unit/property suites"};

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;  // 0 = all
  std::string data_path;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) criterion = std::atoi(argv[++i]);
    else if (!std::strcmp(argv[i], "--data") && i + 1 < argc) data_path = argv[++i];
    else {
      std::fprintf(stderr, "usage: acceptance [--criterion 1..7] [--data benchmark.txt]\n");
      return 1;
    }
  }

  const bool needs_dataset =
      criterion == 0 || (criterion >= 3 && criterion <= 6);
  std::optional<std::string> dataset_file;
  std::optional<Dataset> dataset;
  if (needs_dataset) {
    dataset_file = find_dataset(data_path);
    if (dataset_file && (criterion == 0 || criterion >= 3)) {
      std::fprintf(stderr, "loading benchmark dataset %s ...\n", dataset_file->c_str());
      dataset = load_dataset(*dataset_file);
    }
  }

  bool any_fail = false;
  bool any_not_run = false;
  for (int id = 1; id <= 7; ++id) {
    if (criterion != 0 && id != criterion) continue;

    Outcome out;
    if (id >= 3 && id <= 6 && !dataset) {
      out.ran = false;
      out.detail =
          "benchmark dataset not provided (pass --data household_power_consumption.txt, "
          "set GRIDCAST_DATA, or place it under ./data/)";
    } else {
      switch (id) {
        case 1: out = criterion_gradients(); break;
        case 2: out = criterion_synthetic_convergence(); break;
        case 3: out = criterion_hourly(*dataset); break;
        case 4: out = criterion_capacity_trend(*dataset); break;
        case 5: out = criterion_naive_mapping(*dataset); break;
        case 6: out = criterion_pipeline(*dataset, *dataset_file); break;
        case 7: out = criterion_properties(); break;
      }
    }

    const char* status = out.ran ? (out.pass ? "PASS" : "FAIL") : "NOT RUN";
    std::printf("criterion %d (%s): %s — %s\n", id, kNames[id], status, out.detail.c_str());
    std::fflush(stdout);
    if (out.ran && !out.pass) any_fail = true;
    if (!out.ran) any_not_run = true;
  }

  if (any_fail) return 1;
  if (any_not_run) return 4;
  return 0;
}
