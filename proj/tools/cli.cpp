#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "driftcomp/datagen.hpp"
#include "driftcomp/eval.hpp"
#include "driftcomp/scenario_csv.hpp"
#include "driftcomp/suite.hpp"
#include "driftcomp/training.hpp"

namespace driftcomp::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr int kManifestVersion = 1;

std::string abs_path(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension(suffix);
  return p;
}

void ensure_parent(const fs::path& p) {
  const fs::path dir = p.parent_path();
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

template <typename F>
void write_file(const fs::path& path, F&& body) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
  body(f);
  f.flush();
  if (!f) fail(ErrorKind::Io, "write failed for " + path.string());
}

// Fully resolved command line, kept in order so a manifest can replay it.
class Resolved {
 public:
  explicit Resolved(std::string command) : command_(std::move(command)) {}

  void set(const std::string& flag, const std::string& value) { items_.emplace_back(flag, value); }
  void set(const std::string& flag, double value) { set(flag, format_double(value)); }
  void set_count(const std::string& flag, std::uint64_t value) { set(flag, std::to_string(value)); }
  void flag(const std::string& name) { items_.emplace_back(name, std::nullopt); }

  std::vector<std::string> argv() const {
    std::vector<std::string> out{command_};
    for (const auto& [k, v] : items_) {
      out.push_back("--" + k);
      if (v) out.push_back(*v);
    }
    return out;
  }

  Json flags() const {
    Json j = Json::object();
    for (const auto& [k, v] : items_) {
      const Json val = v ? Json(*v) : Json(true);
      if (!j.contains(k)) {
        j[k] = val;
      } else {
        if (!j[k].is_array()) j[k] = Json::array({j[k]});
        j[k].push_back(val);
      }
    }
    return j;
  }

  const std::string& command() const { return command_; }

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::optional<std::string>>> items_;
};

struct Manifest {
  Json seeds = Json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Json results = Json::object();
};

void write_manifest(const Resolved& r, const Manifest& m, const fs::path& path) {
  Json j;
  j["format"] = "driftcomp-manifest";
  j["version"] = kManifestVersion;
  j["tool_version"] = kToolVersion;
  j["command"] = r.command();
  j["argv"] = r.argv();
  j["flags"] = r.flags();
  j["seeds"] = m.seeds;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["results"] = m.results;
  write_file(path, [&](std::ostream& f) { f << j.dump(2) << '\n'; });
}

ModelFamily family_flag(const std::string& tag) {
  try {
    return parse_family(tag);
  } catch (const Error& e) {
    fail(ErrorKind::Usage, e.what());
  }
}

CalibrationMatrix calibration_or_default(const std::string& path) {
  return path.empty() ? CalibrationMatrix::default_sensor() : load_calibration(path);
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string profile = "chamber";
  std::uint64_t seed = 1;
  std::string out;
  double rate_hz = 10.0;
  double compress = 60.0;
  std::optional<double> duration;
  double tau = ThermalModel{}.tau_s;
  double noise = 0.05;
  std::string calib;
  bool load = false;
  bool no_load = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const ProfileKind kind = parse_profile(a.profile);
  require(a.rate_hz > 0 && std::isfinite(a.rate_hz), ErrorKind::Usage, "--rate-hz must be positive");
  require(a.compress > 0 && std::isfinite(a.compress), ErrorKind::Usage,
          "--compress must be positive");
  require(a.tau > 0 && std::isfinite(a.tau), ErrorKind::Usage, "--tau must be positive");
  require(a.noise >= 0, ErrorKind::Usage, "--noise must be nonnegative");
  if (a.duration) {
    require(*a.duration > 0 && std::isfinite(*a.duration), ErrorKind::Usage,
            "--duration must be positive");
  }

  ProfileSpec spec = ProfileSpec::defaults(kind);
  spec.seed = a.seed;
  spec.noise_sigma_c = a.noise;
  if (kind == ProfileKind::Walking) {
    spec.compression = a.compress;
    spec.duration_s = static_cast<double>(spec.plate_c.size()) * spec.contact_s / spec.compression;
  }
  if (a.duration) {
    spec.duration_s = *a.duration;
    if (kind == ProfileKind::Heater || kind == ProfileKind::Ice) {
      spec.hold_s = std::max(0.0, (spec.duration_s - spec.ramp_s) / 2.0);
    }
  }
  ThermalModel tm;
  tm.tau_s = a.tau;
  ScenarioOptions opts;
  opts.rate_hz = a.rate_hz;
  opts.calib = calibration_or_default(a.calib);
  const bool load = a.load || (kind == ProfileKind::Walking && !a.no_load);
  if (load) opts.load = LoadSchedule{};

  const Scenario s = gen_scenario(spec, tm, opts);
  ensure_parent(a.out);
  save_scenario_csv(s, a.out);

  Resolved r("generate");
  r.set("profile", std::string(profile_tag(kind)));
  r.set_count("seed", a.seed);
  r.set("rate-hz", a.rate_hz);
  r.set("duration", spec.duration_s);
  r.set("tau", a.tau);
  r.set("noise", a.noise);
  r.set("compress", a.compress);
  if (!a.calib.empty()) r.set("calib", abs_path(a.calib));
  r.flag(load ? "load" : "no-load");
  r.set("out", abs_path(a.out));

  Manifest m;
  m.seeds["profile"] = a.seed;
  if (!a.calib.empty()) m.inputs.push_back(abs_path(a.calib));
  m.outputs.push_back(abs_path(a.out));
  m.results["frames"] = s.frames.size();
  write_manifest(r, m, sibling(a.out, ".manifest.json"));
  out << "wrote " << a.out << " (" << s.frames.size() << " frames)\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string model;
  std::string data;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t window = kDefaultWindow;
  std::optional<std::size_t> hidden;
  double lr = 0.001;
  std::size_t batch = 128;
  std::size_t epochs = 2000;
  std::string calib;
  double split = 0.8;
  std::size_t stride = 1;
  std::optional<double> early_stop;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const ModelFamily family = family_flag(a.model);
  require(a.window >= 1, ErrorKind::Usage, "--window must be at least 1");
  require(!a.hidden || *a.hidden >= 1, ErrorKind::Usage, "--hidden must be at least 1");
  require(a.lr > 0 && std::isfinite(a.lr), ErrorKind::Usage, "--lr must be positive");
  require(a.batch >= 1, ErrorKind::Usage, "--batch must be at least 1");
  require(a.stride >= 1, ErrorKind::Usage, "--stride must be at least 1");
  require(a.split > 0 && a.split <= 1, ErrorKind::Usage, "--split must lie in (0, 1]");
  require(!a.early_stop || *a.early_stop >= 0, ErrorKind::Usage,
          "--early-stop must be nonnegative");

  Scenario s = load_scenario_csv(a.data);
  if (!s.truth_drift) s.truth_drift = drift_labels(s, calibration_or_default(a.calib));
  const auto split = split_chronological(windows_from_scenario(s, a.window, a.stride), a.split);

  const std::size_t hidden = a.hidden.value_or(default_hidden(family));
  TrainConfig cfg;
  cfg.lr = a.lr;
  cfg.batch = a.batch;
  cfg.max_epochs = a.epochs;
  cfg.seed = a.seed;
  cfg.early_stop_rmse = a.early_stop;
  const auto every = std::max<std::size_t>(1, a.epochs / 20);
  auto res = train(init_model(family, a.seed, hidden, a.window), split.train, cfg,
                   [&](const EpochReport& e) {
                     if (e.epoch % every == 0 || e.epoch == a.epochs) {
                       err << "epoch " << e.epoch << " loss " << e.loss << '\n';
                     }
                   });
  const double train_nrmse = std::sqrt(normalized_mse(res.model, split.train));
  const bool held_out = split.test.size() > 0;
  const double test_nrmse = held_out ? std::sqrt(normalized_mse(res.model, split.test)) : 0.0;

  const fs::path history_path = sibling(a.out, ".history.csv");
  ensure_parent(a.out);
  save_model(res.model, a.out);
  write_file(history_path, [&](std::ostream& f) { write_history_csv(res.history, f); });

  Resolved r("train");
  r.set("model", std::string(family_tag(family)));
  r.set("data", abs_path(a.data));
  r.set_count("seed", a.seed);
  r.set_count("window", a.window);
  r.set_count("hidden", hidden);
  r.set("lr", a.lr);
  r.set_count("batch", a.batch);
  r.set_count("epochs", a.epochs);
  if (!a.calib.empty()) r.set("calib", abs_path(a.calib));
  r.set("split", a.split);
  r.set_count("stride", a.stride);
  if (a.early_stop) r.set("early-stop", *a.early_stop);
  r.set("out", abs_path(a.out));

  Manifest m;
  m.seeds["init"] = a.seed;
  m.seeds["shuffle"] = a.seed;
  m.inputs.push_back(abs_path(a.data));
  if (!a.calib.empty()) m.inputs.push_back(abs_path(a.calib));
  m.outputs = {abs_path(a.out), abs_path(history_path.string())};
  m.results["epochs_run"] = res.history.size();
  m.results["train_windows"] = split.train.size();
  m.results["held_out_windows"] = split.test.size();
  m.results["train_nrmse"] = train_nrmse;
  m.results["held_out_nrmse"] = held_out ? Json(test_nrmse) : Json(nullptr);
  write_manifest(r, m, sibling(a.out, ".manifest.json"));

  out << family_label(family) << " train_nrmse " << format_double(train_nrmse);
  if (held_out) out << " held_out_nrmse " << format_double(test_nrmse);
  out << " epochs " << res.history.size() << '\n';
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string data;
  std::vector<std::string> models;
  std::string out;
  std::string calib;
  std::optional<std::size_t> window;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Scenario s = load_scenario_csv(a.data);
  const CalibrationMatrix calib = calibration_or_default(a.calib);
  std::vector<DriftModel> models;
  for (const auto& path : a.models) {
    models.push_back(load_model(path));
    if (a.window) {
      require(models.back().window == *a.window, ErrorKind::Configuration,
              path + ": model window " + std::to_string(models.back().window) +
                  " does not match --window " + std::to_string(*a.window));
    }
  }
  const Comparison cmp = compare_methods(s, models, calib);

  const fs::path dir = a.out;
  ensure_dir(dir);
  write_file(dir / "report.csv", [&](std::ostream& f) { write_report_csv(cmp.report, f); });
  write_file(dir / "report.txt", [&](std::ostream& f) { write_report_table(cmp.report, f); });
  write_file(dir / "plot.csv", [&](std::ostream& f) { write_plot_csv(s, cmp, f); });

  Resolved r("evaluate");
  r.set("data", abs_path(a.data));
  for (const auto& p : a.models) r.set("model", abs_path(p));
  if (!a.calib.empty()) r.set("calib", abs_path(a.calib));
  if (a.window) r.set_count("window", *a.window);
  r.set("out", abs_path(a.out));

  Manifest m;
  m.inputs.push_back(abs_path(a.data));
  for (const auto& p : a.models) m.inputs.push_back(abs_path(p));
  if (!a.calib.empty()) m.inputs.push_back(abs_path(a.calib));
  for (const char* f : {"report.csv", "report.txt", "plot.csv"}) {
    m.outputs.push_back(abs_path((dir / f).string()));
  }
  m.results["best_method"] = cmp.report.best_method;
  write_manifest(r, m, dir / "manifest.json");
  write_report_table(cmp.report, out);
  return 0;
}

// -------------------------------------------------------------- compensate

struct CompensateArgs {
  std::string model;
  std::string calib;
  std::string data;
  std::string out;
};

std::string compensated_header() {
  std::string h = "time_s";
  for (const char* n : kAxisNames) h += std::string(",") + n;
  for (const char* n : kAxisNames) h += std::string(",d") + n;
  return h;
}

int stream_compensate(Compensator& comp, std::istream& in, std::ostream& out, std::ostream& err) {
  out << compensated_header() << '\n' << std::flush;
  std::optional<ScenarioCsvLayout> layout;
  std::optional<double> last_time;
  std::string line;
  std::size_t line_no = 0;
  std::size_t skipped = 0;
  std::string row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!layout) {
      layout = ScenarioCsvLayout::from_header(line, line_no);
      continue;
    }
    SensorFrame frame;
    try {
      frame = layout->parse_row(line, line_no).frame;
      require(frame.temp_c >= kTemperatureMinC && frame.temp_c <= kTemperatureMaxC,
              ErrorKind::Validation,
              "line " + std::to_string(line_no) + ": temperature outside the sensor range");
      require(!last_time || frame.time_s > *last_time, ErrorKind::Validation,
              "line " + std::to_string(line_no) + ": time does not increase");
    } catch (const Error& e) {
      err << "skipped: " << e.what() << '\n';
      ++skipped;
      continue;
    }
    last_time = frame.time_s;
    const CompensatedFrame c = comp.push_frame(frame);
    row = format_double(frame.time_s);
    for (std::size_t k = 0; k < kAxes; ++k) row += ',' + format_double(c.compensated[k]);
    for (std::size_t k = 0; k < kAxes; ++k) row += ',' + format_double(c.drift[k]);
    out << row << '\n' << std::flush;
  }
  if (skipped) {
    err << "error: " << skipped << " malformed row" << (skipped == 1 ? "" : "s") << " skipped\n";
    return 3;
  }
  return 0;
}

int cmd_compensate(const CompensateArgs& a, std::istream& in, std::ostream& out,
                   std::ostream& err) {
  auto model = std::make_shared<const DriftModel>(load_model(a.model));
  Compensator comp(model, calibration_or_default(a.calib));

  std::ifstream data_file;
  if (!a.data.empty()) {
    data_file.open(a.data, std::ios::binary);
    if (!data_file) fail(ErrorKind::Io, "cannot open " + a.data);
  }
  std::istream& src = a.data.empty() ? in : data_file;
  if (a.out.empty()) return stream_compensate(comp, src, out, err);

  int status = 0;
  write_file(a.out, [&](std::ostream& f) { status = stream_compensate(comp, src, f, err); });
  Resolved r("compensate");
  r.set("model", abs_path(a.model));
  if (!a.calib.empty()) r.set("calib", abs_path(a.calib));
  if (!a.data.empty()) r.set("data", abs_path(a.data));
  r.set("out", abs_path(a.out));
  Manifest m;
  m.inputs.push_back(abs_path(a.model));
  if (!a.calib.empty()) m.inputs.push_back(abs_path(a.calib));
  m.inputs.push_back(a.data.empty() ? "<stdin>" : abs_path(a.data));
  m.outputs.push_back(abs_path(a.out));
  m.results["frames"] = comp.count_seen();
  write_manifest(r, m, sibling(a.out, ".manifest.json"));
  return status;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  bool paper_suite = false;
  std::string out;
  SuiteConfig suite;
  std::optional<std::size_t> hidden;
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  require(a.paper_suite, ErrorKind::Usage, "report: nothing to do without --paper-suite");
  SuiteConfig cfg = a.suite;
  cfg.hidden = a.hidden.value_or(0);
  cfg.validate();

  const fs::path dir = a.out;
  ensure_dir(dir);
  Manifest m;
  auto record = [&](const fs::path& p) { m.outputs.push_back(abs_path(p.string())); };

  const Scenario chamber = chamber_scenario(cfg);
  save_scenario_csv(chamber, dir / "chamber.csv");
  record(dir / "chamber.csv");

  ModelFamily current = ModelFamily::Lsm;
  const auto every = std::max<std::size_t>(1, cfg.epochs / 5);
  const EpochCallback progress = [&](const EpochReport& e) {
    if (e.epoch % every == 0) {
      err << family_tag(current) << " epoch " << e.epoch << " loss " << e.loss << '\n';
    }
  };
  const auto split = split_chronological(windows_from_scenario(chamber, cfg.window, cfg.stride),
                                         cfg.train_fraction);
  std::vector<FamilyFit> fits;
  std::vector<DriftModel> models;
  for (auto family : kAllFamilies) {
    current = family;
    fits.push_back(fit_family(family, split, cfg, progress));
    models.push_back(fits.back().model);
    const std::string tag(family_tag(family));
    const fs::path model_path = dir / "models" / (tag + ".json");
    ensure_parent(model_path);
    save_model(fits.back().model, model_path);
    write_file(dir / "models" / (tag + ".history.csv"),
               [&](std::ostream& f) { write_history_csv(fits.back().history, f); });
    record(model_path);
    record(dir / "models" / (tag + ".history.csv"));
  }
  write_file(dir / "convergence.csv", [&](std::ostream& f) { write_ordering_csv(fits, f); });
  write_file(dir / "convergence.txt", [&](std::ostream& f) { write_ordering_table(fits, f); });
  record(dir / "convergence.csv");
  record(dir / "convergence.txt");
  out << "Normalized RMSE on the chamber cycle (seed " << cfg.seed << ")\n";
  write_ordering_table(fits, out);
  for (const auto& f : fits) {
    m.results["convergence"][std::string(family_tag(f.family))] = {{"train_nrmse", f.train_nrmse},
                                                                   {"held_out_nrmse", f.test_nrmse}};
  }

  const CalibrationMatrix calib = CalibrationMatrix::default_sensor();
  for (auto [kind, name] : {std::pair{ProfileKind::Heater, "heating"},
                            std::pair{ProfileKind::Ice, "cooling"},
                            std::pair{ProfileKind::Walking, "walking"}}) {
    const Scenario s = protocol_scenario(kind, cfg);
    const std::string stem = name;
    save_scenario_csv(s, dir / (stem + ".csv"));
    const Comparison cmp = compare_methods(s, models, calib);
    write_file(dir / (stem + "_report.csv"), [&](std::ostream& f) { write_report_csv(cmp.report, f); });
    write_file(dir / (stem + "_report.txt"),
               [&](std::ostream& f) { write_report_table(cmp.report, f); });
    write_file(dir / (stem + "_plot.csv"), [&](std::ostream& f) { write_plot_csv(s, cmp, f); });
    for (const auto& suffix : {".csv", "_report.csv", "_report.txt", "_plot.csv"}) {
      record(dir / (stem + suffix));
    }
    out << '\n' << name << " (RMSE against ground truth)\n";
    write_report_table(cmp.report, out);
    m.results[stem]["best_method"] = cmp.report.best_method;
  }

  Resolved r("report");
  r.flag("paper-suite");
  r.set_count("seed", cfg.seed);
  r.set_count("epochs", cfg.epochs);
  r.set_count("stride", cfg.stride);
  r.set_count("window", cfg.window);
  if (a.hidden) r.set_count("hidden", *a.hidden);
  r.set("lr", cfg.lr);
  r.set_count("batch", cfg.batch);
  r.set("rate-hz", cfg.rate_hz);
  r.set("compress", cfg.compression);
  r.set("out", abs_path(a.out));
  m.seeds["scenarios"] = cfg.seed;
  m.seeds["init"] = cfg.seed;
  m.seeds["shuffle"] = cfg.seed;
  write_manifest(r, m, dir / "manifest.json");
  return 0;
}

// ------------------------------------------------------------------ replay

struct ReplayArgs {
  std::string manifest;
  std::string out;
};

std::vector<std::string> replay_argv(const ReplayArgs& a) {
  std::ifstream f(a.manifest, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open manifest " + a.manifest);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const std::exception& e) {
    fail(ErrorKind::Parse, a.manifest + ": " + e.what());
  }
  std::vector<std::string> argv;
  try {
    require(j.at("format") == "driftcomp-manifest", ErrorKind::Parse,
            a.manifest + ": not a driftcomp manifest");
    require(j.at("version") == kManifestVersion, ErrorKind::Parse,
            a.manifest + ": unsupported manifest version");
    argv = j.at("argv").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, a.manifest + ": " + e.what());
  }
  require(!argv.empty() && argv.front() != "replay", ErrorKind::Parse,
          a.manifest + ": manifest holds no replayable command");
  if (!a.out.empty()) {
    const auto it = std::find(argv.begin(), argv.end(), "--out");
    require(it != argv.end() && it + 1 != argv.end(), ErrorKind::Usage,
            "the recorded command has no --out to override");
    *(it + 1) = a.out;
  }
  return argv;
}

int exit_for(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return e.exit_code();
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Temperature-drift compensation for six-axis force/torque sensors", "driftcomp"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic scenario CSV");
  g->add_option("--profile", gen.profile, "chamber, heater, ice, walking or constant")
      ->capture_default_str();
  g->add_option("--seed", gen.seed, "Scenario seed")->capture_default_str();
  g->add_option("--out", gen.out, "Scenario CSV to write")->required();
  g->add_option("--rate-hz", gen.rate_hz, "Sample rate")->capture_default_str();
  g->add_option("--compress", gen.compress, "Walking time compression")->capture_default_str();
  g->add_option("--duration", gen.duration, "Duration in seconds (profile default if omitted)");
  g->add_option("--tau", gen.tau, "Thermal time constant in seconds")->capture_default_str();
  g->add_option("--noise", gen.noise, "Temperature noise sigma in C")->capture_default_str();
  g->add_option("--calib", gen.calib, "Calibration file used to encode ADC counts");
  auto* load_on = g->add_flag("--load", gen.load, "Apply the stance/swing load");
  auto* load_off = g->add_flag("--no-load", gen.no_load, "No applied load, even when walking");
  load_on->excludes(load_off);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train one drift model on a scenario");
  t->add_option("--model", tr.model, "lsm, mlp, mlp-seq, tcn or gru")->required();
  t->add_option("--data", tr.data, "Scenario CSV with drift or load truth")->required();
  t->add_option("--out", tr.out, "Model file to write")->required();
  t->add_option("--seed", tr.seed, "Initialisation and shuffle seed")->capture_default_str();
  t->add_option("--window", tr.window, "Temperature window length")->capture_default_str();
  t->add_option("--hidden", tr.hidden,
                "Hidden width (GRU state, MLP nodes per layer, TCN channels); default 32 for GRU, "
                "36 for MLP, 16 for TCN");
  t->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  t->add_option("--batch", tr.batch, "Mini-batch size")->capture_default_str();
  t->add_option("--epochs", tr.epochs, "Maximum epochs")->capture_default_str();
  t->add_option("--calib", tr.calib, "Calibration for labels derived from applied load");
  t->add_option("--split", tr.split, "Chronological training fraction")->capture_default_str();
  t->add_option("--stride", tr.stride, "Stride between training windows")->capture_default_str();
  t->add_option("--early-stop", tr.early_stop, "Stop once the epoch RMSE reaches this value");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Compare models on a scenario");
  e->add_option("--data", ev.data, "Scenario CSV")->required();
  e->add_option("--model", ev.models, "Model file (repeatable)")->required();
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_option("--calib", ev.calib, "Calibration file");
  e->add_option("--window", ev.window, "Required window length of every model");

  CompensateArgs co;
  auto* c = app.add_subcommand("compensate", "Stream scenario rows through the compensator");
  c->add_option("--model", co.model, "Model file")->required();
  c->add_option("--calib", co.calib, "Calibration file");
  c->add_option("--data", co.data, "Scenario CSV (standard input if omitted)");
  c->add_option("--out", co.out, "Output CSV (standard output if omitted)");

  ReportArgs rep;
  auto* rp = app.add_subcommand("report", "Desk-scale reproduction runs");
  rp->add_flag("--paper-suite", rep.paper_suite,
               "Generate, train all five methods and evaluate heating, cooling and walking");
  rp->add_option("--out", rep.out, "Output directory")->required();
  rp->add_option("--seed", rep.suite.seed)->capture_default_str();
  rp->add_option("--epochs", rep.suite.epochs)->capture_default_str();
  rp->add_option("--stride", rep.suite.stride, "Stride between training windows")
      ->capture_default_str();
  rp->add_option("--window", rep.suite.window)->capture_default_str();
  rp->add_option("--hidden", rep.hidden, "Hidden width for every network family");
  rp->add_option("--lr", rep.suite.lr)->capture_default_str();
  rp->add_option("--batch", rep.suite.batch)->capture_default_str();
  rp->add_option("--rate-hz", rep.suite.rate_hz)->capture_default_str();
  rp->add_option("--compress", rep.suite.compression)->capture_default_str();

  ReplayArgs re;
  auto* rl = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  rl->add_option("manifest", re.manifest, "Manifest file")->required();
  rl->add_option("--out", re.out, "Write to this path instead of the recorded one");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& pe) {
    err << "usage error: " << pe.what() << '\n';
    return 2;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*t) return cmd_train(tr, out, err);
    if (*e) return cmd_evaluate(ev, out);
    if (*c) return cmd_compensate(co, in, out, err);
    if (*rp) return cmd_report(rep, out, err);
    if (*rl) return run(replay_argv(re), in, out, err);
  } catch (const Error& ex) {
    return exit_for(ex, err);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace driftcomp::cli
