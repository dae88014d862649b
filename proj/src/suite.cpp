#include "driftcomp/suite.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "driftcomp/scenario_csv.hpp"

namespace driftcomp {

TrainTestSplit split_chronological(const SupervisedSet& all, double train_fraction) {
  require(train_fraction > 0 && train_fraction <= 1, ErrorKind::InvalidInput,
          "train fraction must lie in (0, 1]");
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(all.size()) * train_fraction));
  require(n_train >= 1, ErrorKind::InvalidInput, "split leaves no training windows");
  TrainTestSplit out{slice(all, 0, n_train), slice(all, n_train, all.size())};
  out.train.axis_scale = max_abs_scale(out.train.targets);
  out.test.axis_scale = out.train.axis_scale;
  return out;
}

void SuiteConfig::validate() const {
  require(epochs >= 1, ErrorKind::Usage, "epochs must be at least 1");
  require(stride >= 1, ErrorKind::Usage, "stride must be at least 1");
  require(window >= 1, ErrorKind::Usage, "window must be at least 1");
  require(lr > 0 && std::isfinite(lr), ErrorKind::Usage, "learning rate must be positive");
  require(batch >= 1, ErrorKind::Usage, "batch must be at least 1");
  require(rate_hz > 0 && std::isfinite(rate_hz), ErrorKind::Usage, "rate must be positive");
  require(compression > 0 && std::isfinite(compression), ErrorKind::Usage,
          "compression must be positive");
  require(train_fraction > 0 && train_fraction < 1, ErrorKind::Usage,
          "train fraction must lie in (0, 1)");
}

Scenario chamber_scenario(const SuiteConfig& cfg) {
  ProfileSpec spec = ProfileSpec::defaults(ProfileKind::ChamberCycle);
  spec.seed = cfg.seed;
  ScenarioOptions opts;
  opts.rate_hz = cfg.rate_hz;
  return gen_scenario(spec, ThermalModel{}, opts);
}

Scenario protocol_scenario(ProfileKind kind, const SuiteConfig& cfg) {
  ProfileSpec spec = ProfileSpec::defaults(kind);
  spec.seed = cfg.seed;
  ScenarioOptions opts;
  opts.rate_hz = cfg.rate_hz;
  if (kind == ProfileKind::Walking) {
    spec.compression = cfg.compression;
    spec.duration_s = static_cast<double>(spec.plate_c.size()) * spec.contact_s / spec.compression;
    opts.load = LoadSchedule{};
  }
  return gen_scenario(spec, ThermalModel{}, opts);
}

FamilyFit fit_family(ModelFamily family, const TrainTestSplit& split, const SuiteConfig& cfg,
                     const EpochCallback& on_epoch) {
  TrainConfig tc;
  tc.lr = cfg.lr;
  tc.batch = cfg.batch;
  tc.max_epochs = cfg.epochs;
  tc.seed = cfg.seed;
  tc.threads = cfg.threads;
  auto res = train(init_model(family, cfg.seed, cfg.hidden, cfg.window), split.train, tc, on_epoch);
  FamilyFit fit{family, std::move(res.model), std::move(res.history)};
  fit.train_nrmse = std::sqrt(normalized_mse(fit.model, split.train));
  fit.test_nrmse = split.test.size() ? std::sqrt(normalized_mse(fit.model, split.test)) : 0.0;
  return fit;
}

std::vector<FamilyFit> fit_all_families(const Scenario& chamber, const SuiteConfig& cfg,
                                        const EpochCallback& on_epoch) {
  cfg.validate();
  const auto split =
      split_chronological(windows_from_scenario(chamber, cfg.window, cfg.stride), cfg.train_fraction);
  std::vector<FamilyFit> fits;
  for (auto family : kAllFamilies) fits.push_back(fit_family(family, split, cfg, on_epoch));
  return fits;
}

void write_ordering_csv(const std::vector<FamilyFit>& fits, std::ostream& out) {
  out << "method,train_nrmse,test_nrmse\n";
  for (const auto& f : fits) {
    out << family_label(f.family) << ',' << format_double(f.train_nrmse) << ','
        << format_double(f.test_nrmse) << '\n';
  }
}

void write_ordering_table(const std::vector<FamilyFit>& fits, std::ostream& out) {
  char line[96];
  std::snprintf(line, sizeof line, "%-10s %16s %16s\n", "Method", "train [norm]", "held-out [norm]");
  out << line;
  for (const auto& f : fits) {
    std::snprintf(line, sizeof line, "%-10s %16.4f %16.4f\n",
                  std::string(family_label(f.family)).c_str(), f.train_nrmse, f.test_nrmse);
    out << line;
  }
}

}  // namespace driftcomp
