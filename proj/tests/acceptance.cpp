// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...]
//
// Exit status is 0 only when every selected criterion passes.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "driftcomp/datagen.hpp"
#include "driftcomp/eval.hpp"
#include "driftcomp/scenario_csv.hpp"
#include "driftcomp/suite.hpp"
#include "driftcomp/training.hpp"
#include "gradcheck.hpp"

using namespace driftcomp;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradEps = 1e-5;
constexpr double kGradSeconds = 30;
constexpr double kGruOracle = 0.380797;
constexpr double kGruOracleTol = 1e-6;
constexpr double kLsmCoeffTol = 1e-9;
constexpr double kLsmRmseTol = 1e-6;
constexpr double kOrderingSeconds = 600;
constexpr std::size_t kOrderingEpochs = 200;
constexpr std::size_t kOrderingStride = 4;
constexpr double kGruVsLsm = 0.1;
constexpr double kProtocolRatio = 0.25;
constexpr double kProtocolSeconds = 120;
constexpr double kWalkingRatio = 0.2;
constexpr std::size_t kProtocolEpochs = 150;
constexpr double kStreamTol = 1e-12;
constexpr double kLagTarget = 0.632;
constexpr double kLagTol = 0.005;
constexpr int kAdamSteps = 2000;
constexpr double kAdamTarget = 1e-3;
constexpr double kLatencyMicros = 100;
constexpr int kLatencyCalls = 100000;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

int run_cli(const std::vector<std::string>& args, const std::string& input = {},
        std::string* output = nullptr) {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  if (output) *output = out.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// ------------------------------------------------------------------ 1

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::string where;
  std::size_t checked = 0;
  auto run = [&](const char* label, const auto& model, std::size_t window) {
    for (std::size_t batch : {1u, 8u}) {
      const auto [x, y] = testing::random_batch(window, batch, 100 + batch);
      const auto r = testing::gradient_check(model, x, y, kGradEps);
      checked += r.checked;
      if (r.worst_rel_error > worst) {
        worst = r.worst_rel_error;
        where = std::string(label) + " " + r.worst_param + " batch " + std::to_string(batch);
      }
    }
  };
  run("MLP", init_mlp<double>(1, 36, 3, 1), 1);
  run("MLP-Seq", init_mlp<double>(10, 36, 3, 2), 10);
  run("TCN", init_tcn<double>(16, 3), 10);
  run("GRU", init_gru<double>(32, 4), 10);
  const double secs = seconds_since(t0);
  return {worst < kGradRelTol && secs < kGradSeconds,
          fmt("worst relative error %.2e at %s over %zu entries, %.1f s", worst, where.c_str(),
              checked, secs)};
}

// ------------------------------------------------------------------ 2

Outcome gru_oracle() {
  GruModel<double> zero = init_gru<double>(3, 1);
  GruModel<double>::visit([](const std::string&, auto& p) { p.setZero(); }, zero);
  Vector h_prev(3);
  h_prev << 0.7, -1.25, 3.0;
  Vector x(1);
  x << 0.4;
  const Vector h = gru_cell(zero, x, h_prev);
  const bool half = h == 0.5 * h_prev;

  GruModel<double> one = init_gru<double>(1, 1);
  GruModel<double>::visit([](const std::string&, auto& p) { p.setZero(); }, one);
  one.w_xg(0, 0) = 1.0;
  Vector x1(1), h0(1);
  x1 << 1.0;
  h0 << 0.0;
  const double v = gru_cell(one, x1, h0)(0);
  return {half && std::abs(v - kGruOracle) <= kGruOracleTol,
          fmt("zero cell %s 0.5*h_prev, scalar cell %.9f", half ? "==" : "!=", v)};
}

// ------------------------------------------------------------------ 3

Outcome lsm_exactness() {
  const Wrench offset{1.5, -2.0, 12.0, 0.05, -0.02, 0.01};
  const Wrench slope{0.35, -0.2, 1.1, 0.012, 0.015, -0.008};
  CalibrationMatrix calib;
  calib.c = Matrix::Identity(6, 6) * 1e-6;

  Scenario s;
  s.name = "affine";
  s.sample_rate_hz = 10;
  s.truth_drift.emplace();
  s.truth_applied.emplace();
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    SensorFrame f;
    f.time_s = i / 10.0;
    f.temp_c = quantize_temperature(rng.uniform(-20, 60));
    Wrench d;
    for (std::size_t a = 0; a < kAxes; ++a) d[a] = offset[a] + slope[a] * f.temp_c;
    const auto raw = wrench_to_raw(d, calib);
    for (std::size_t a = 0; a < kAxes; ++a) f.adc[a] = static_cast<std::int32_t>(std::llround(raw[a]));
    s.frames.push_back(f);
    s.truth_drift->push_back(d);
    s.truth_applied->push_back(Wrench{});
  }
  s.validate();

  const auto set = windows_from_scenario(s, kDefaultWindow, 1);
  const auto res = train(init_model(ModelFamily::Lsm, 0), set, TrainConfig{});
  const auto& lsm = std::get<LsmModel<double>>(res.model.net);
  double coeff_err = 0;
  for (std::size_t a = 0; a < kAxes; ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    coeff_err = std::max(coeff_err, std::abs(lsm.o(i) - offset[a]));
    coeff_err = std::max(coeff_err, std::abs(lsm.c_t(i) - slope[a]));
  }
  const auto cmp = compare_methods(s, {res.model}, calib);
  double worst_rmse = 0;
  const auto& rmse = cmp.report.row("LSM").rmse;
  for (std::size_t a = 0; a < kAxes; ++a) worst_rmse = std::max(worst_rmse, rmse[a]);
  return {coeff_err <= kLsmCoeffTol && worst_rmse < kLsmRmseTol,
          fmt("max coefficient error %.2e, worst compensated RMSE %.2e N", coeff_err, worst_rmse)};
}

// ------------------------------------------------------------------ 4

Outcome ordering() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SuiteConfig cfg;
    cfg.seed = seed;
    cfg.epochs = kOrderingEpochs;
    cfg.stride = kOrderingStride;
    const Scenario chamber = chamber_scenario(cfg);
    if (chamber.frames.size() < 20000) ok = false;
    const auto fits = fit_all_families(chamber, cfg);
    auto r = [&](ModelFamily f) {
      for (const auto& fit : fits) {
        if (fit.family == f) return fit.test_nrmse;
      }
      return 0.0;
    };
    const double lsm = r(ModelFamily::Lsm), mlp = r(ModelFamily::Mlp),
                 seq = r(ModelFamily::MlpSeq), tcn = r(ModelFamily::Tcn),
                 gru = r(ModelFamily::Gru);
    const bool seed_ok = gru < tcn && tcn < seq && seq <= mlp && mlp < lsm && gru <= kGruVsLsm * lsm;
    ok = ok && seed_ok;
    detail += fmt("seed %d [GRU %.4f TCN %.4f MLP-Seq %.4f MLP %.4f LSM %.4f]%s; ",
                  static_cast<int>(seed), gru, tcn, seq, mlp, lsm, seed_ok ? "" : " out of order");
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kOrderingSeconds;
  return {ok, detail + fmt("%zu epochs, stride %zu, %.0f s", kOrderingEpochs, kOrderingStride, secs)};
}

// ------------------------------------------------------------------ 5, 6

const DriftModel& protocol_gru() {
  static const DriftModel model = [] {
    SuiteConfig cfg;
    cfg.epochs = kProtocolEpochs;
    cfg.stride = 1;
    const Scenario chamber = chamber_scenario(cfg);
    const auto split = split_chronological(windows_from_scenario(chamber, cfg.window, 1), 1.0);
    return fit_family(ModelFamily::Gru, split, cfg).model;
  }();
  return model;
}

Outcome protocol_improvement() {
  const DriftModel& gru = protocol_gru();
  const auto t0 = Clock::now();
  SuiteConfig cfg;
  bool ok = true;
  std::string detail;
  const std::array<std::pair<ProfileKind, const char*>, 2> protocols = {
      {{ProfileKind::Heater, "heating"}, {ProfileKind::Ice, "cooling"}}};
  for (const auto& [kind, name] : protocols) {
    const Scenario s = protocol_scenario(kind, cfg);
    const auto cmp = compare_methods(s, {gru}, CalibrationMatrix::default_sensor());
    const auto& raw = cmp.report.row(kNoCompensation).rmse;
    const auto& comp = cmp.report.row("GRU").rmse;
    double worst = 0;
    for (std::size_t a = 0; a < kAxes; ++a) worst = std::max(worst, comp[a] / raw[a]);
    ok = ok && worst <= kProtocolRatio;
    detail += fmt("%s worst axis ratio %.4f (fz %.3f -> %.3f N); ", name, worst, raw.fz, comp.fz);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kProtocolSeconds;
  return {ok, detail + fmt("GRU trained %zu epochs on the chamber cycle, evaluation %.1f s",
                           kProtocolEpochs, secs)};
}

Outcome walking_improvement() {
  const DriftModel& gru = protocol_gru();
  SuiteConfig cfg;
  const Scenario s = protocol_scenario(ProfileKind::Walking, cfg);
  const auto cmp = compare_methods(s, {gru}, CalibrationMatrix::default_sensor());
  const double raw = cmp.report.row(kNoCompensation).rmse.fz;
  const double comp = cmp.report.row("GRU").rmse.fz;
  return {comp <= kWalkingRatio * raw,
          fmt("fz %.3f -> %.3f N (ratio %.4f), compression %.0f", raw, comp, comp / raw,
              cfg.compression)};
}

// ------------------------------------------------------------------ 7

Outcome stream_batch() {
  ProfileSpec spec = ProfileSpec::defaults(ProfileKind::ChamberCycle);
  spec.duration_s = 100;
  spec.seed = 7;
  const Scenario s = gen_scenario(spec, ThermalModel{});
  std::ostringstream csv;
  write_scenario_csv(s, csv);

  const fs::path dir = fs::temp_directory_path() / "driftcomp-acceptance-7";
  fs::create_directories(dir);
  double worst = 0;
  bool ok = s.frames.size() == 1000;
  for (auto family : kAllFamilies) {
    DriftModel m = init_model(family, 11);
    if (family == ModelFamily::Lsm) m.net = lsm_fit<double>(windows_from_scenario(s, 10, 1));
    m.axis_scale = {40, 30, 150, 1, 1, 0.5};
    const fs::path model_path = dir / (std::string(family_tag(family)) + ".json");
    save_model(m, model_path);
    std::string streamed;
    if (run_cli({"compensate", "--model", model_path.string()}, csv.str(), &streamed) != 0) ok = false;
    const auto batch = batch_drift(s, m);
    std::istringstream lines(streamed);
    std::string line;
    std::getline(lines, line);
    std::size_t i = 0;
    while (std::getline(lines, line)) {
      std::vector<double> cols;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cols.push_back(std::stod(cell));
      if (cols.size() != 13 || i >= batch.size()) {
        ok = false;
        break;
      }
      for (std::size_t a = 0; a < kAxes; ++a) worst = std::max(worst, std::abs(cols[7 + a] - batch[i][a]));
      ++i;
    }
    if (i != batch.size()) ok = false;
  }
  fs::remove_all(dir);
  return {ok && worst <= kStreamTol,
          fmt("%zu frames, all five families, max |stream - batch| %.1e", s.frames.size(), worst)};
}

// ------------------------------------------------------------------ 8

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "driftcomp-acceptance-8";
  fs::remove_all(root);
  std::vector<std::string> mismatched;
  int failures = 0;
  auto cli = [&](const std::vector<std::string>& args) {
    if (run_cli(args) != 0) ++failures;
  };
  auto run_all = [&](const fs::path& d, const char* threads) {
    setenv("DRIFTCOMP_THREADS", threads, 1);
    const std::string data = (d / "chamber.csv").string();
    const std::string cool = (d / "ice.csv").string();
    cli({"generate", "--profile", "chamber", "--seed", "4", "--duration", "300", "--out", data});
    cli({"generate", "--profile", "ice", "--seed", "4", "--out", cool});
    for (const char* fam : {"lsm", "mlp", "mlp-seq", "tcn", "gru"}) {
      cli({"train", "--model", fam, "--data", data, "--seed", "4", "--epochs", "8", "--out",
           (d / "models" / (std::string(fam) + ".json")).string()});
    }
    std::vector<std::string> eval{"evaluate", "--data", cool, "--out", (d / "eval").string()};
    for (const char* fam : {"lsm", "mlp", "mlp-seq", "tcn", "gru"}) {
      eval.push_back("--model");
      eval.push_back((d / "models" / (std::string(fam) + ".json")).string());
    }
    cli(eval);
  };
  run_all(root / "a", "1");
  run_all(root / "b", "3");
  unsetenv("DRIFTCOMP_THREADS");
  const fs::path replay = root / "replay";
  cli({"replay", (root / "a" / "models" / "gru.manifest.json").string(), "--out",
       (replay / "gru.json").string()});
  cli({"replay", (root / "a" / "eval" / "manifest.json").string(), "--out",
       (replay / "eval").string()});

  std::size_t compared = 0;
  auto same = [&](const fs::path& x, const fs::path& y) {
    ++compared;
    if (!fs::exists(x) || !fs::exists(y) || slurp(x) != slurp(y)) {
      mismatched.push_back(fs::relative(y, root).string());
    }
  };
  for (const char* f : {"chamber.csv", "ice.csv", "eval/report.csv", "eval/report.txt",
                        "eval/plot.csv"}) {
    same(root / "a" / f, root / "b" / f);
  }
  for (const char* fam : {"lsm", "mlp", "mlp-seq", "tcn", "gru"}) {
    same(root / "a" / "models" / (std::string(fam) + ".json"),
         root / "b" / "models" / (std::string(fam) + ".json"));
    same(root / "a" / "models" / (std::string(fam) + ".history.csv"),
         root / "b" / "models" / (std::string(fam) + ".history.csv"));
  }
  same(root / "a" / "models" / "gru.json", replay / "gru.json");
  same(root / "a" / "eval" / "report.csv", replay / "eval" / "report.csv");
  fs::remove_all(root);
  std::string detail = fmt("%zu file pairs compared (1 vs 3 workers, and manifest replays)", compared);
  for (const auto& m : mismatched) detail += "; differs: " + m;
  if (failures) detail += fmt("; %d commands failed", failures);
  return {mismatched.empty() && failures == 0, detail};
}

// ------------------------------------------------------------------ 9

Outcome thermal_lag() {
  ThermalModel tm;
  tm.tau_s = 30;
  tm.t_int_0 = 0;
  const double dt = tm.tau_s / 100;
  const std::vector<double> step(101, 10.0);
  const double frac = internal_temperature(step, tm, dt)[100] / 10.0;
  return {std::abs(frac - kLagTarget) <= kLagTol,
          fmt("fraction of the step at t = tau: %.5f", frac)};
}

// ------------------------------------------------------------------ 10

struct ScalarParam {
  Matrix p = Matrix::Zero(1, 1);
  template <typename F, typename... Ms>
  static void visit(F&& f, Ms&... ms) {
    f("p", ms.p...);
  }
};

Outcome adam_oracle() {
  ScalarParam p;
  p.p(0, 0) = 1.0;
  AdamState<ScalarParam> st(p);
  TrainConfig cfg;
  int reached = 0;
  for (int t = 1; t <= 10000 && reached == 0; ++t) {
    ScalarParam g;
    g.p(0, 0) = 2 * p.p(0, 0);
    adam_step(p, g, st, cfg);
    if (std::abs(p.p(0, 0)) < kAdamTarget) reached = t;
  }
  ScalarParam q;
  q.p(0, 0) = 0.3;
  AdamState<ScalarParam> qs(q);
  adam_step(q, ScalarParam{}, qs, cfg);
  const bool noop = q.p(0, 0) == 0.3;
  return {reached > 0 && reached <= kAdamSteps && noop,
          fmt("|p| < 1e-3 first reached at step %d (limit %d); zero-gradient step %s", reached,
              kAdamSteps, noop ? "is a no-op" : "moved the parameter")};
}

// ------------------------------------------------------------------ 11

Outcome latency() {
  auto model = std::make_shared<const DriftModel>(init_model(ModelFamily::Gru, 5, 32, 10));
  Compensator comp(model, CalibrationMatrix::default_sensor());
  SensorFrame f;
  double sink = 0;
  for (int i = 0; i < 1000; ++i) {
    f.temp_c = 20 + 0.001 * i;
    sink += comp.push_frame(f).drift.fz;
  }
  const auto t0 = Clock::now();
  for (int i = 0; i < kLatencyCalls; ++i) {
    f.time_s = 0.1 * i;
    f.temp_c = 20 + 10 * std::sin(0.001 * i);
    sink += comp.push_frame(f).drift.fz;
  }
  const double micros = seconds_since(t0) * 1e6 / kLatencyCalls;
  return {micros < kLatencyMicros && std::isfinite(sink),
          fmt("mean push_frame %.2f us over %d calls (GRU 32, window 10)", micros, kLatencyCalls)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"GRU cell oracle", gru_oracle},
      {"LSM exactness", lsm_exactness},
      {"method ordering on the chamber cycle", ordering},
      {"heating and cooling improvement", protocol_improvement},
      {"walking improvement", walking_improvement},
      {"stream/batch equivalence", stream_batch},
      {"determinism", determinism},
      {"thermal-lag oracle", thermal_lag},
      {"Adam oracle", adam_oracle},
      {"pipeline latency", latency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
