#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "driftcomp/datagen.hpp"
#include "driftcomp/eval.hpp"
#include "driftcomp/training.hpp"

namespace driftcomp {

struct TrainTestSplit {
  SupervisedSet train;
  SupervisedSet test;
};

/// First `train_fraction` of the windows for training, the rest held out. Both
/// halves share the axis scale of the training targets.
TrainTestSplit split_chronological(const SupervisedSet& all, double train_fraction);

/// Settings of the desk-scale reproduction run.
struct SuiteConfig {
  std::uint64_t seed = 1;
  std::size_t epochs = 300;
  std::size_t stride = 4;
  std::size_t window = kDefaultWindow;
  std::size_t hidden = 0;  // 0: per-family default
  double lr = 0.001;
  std::size_t batch = 128;
  double rate_hz = 10.0;
  double compression = 60.0;
  double train_fraction = 0.8;
  std::size_t threads = 0;

  void validate() const;
};

struct FamilyFit {
  ModelFamily family;
  DriftModel model;
  std::vector<double> history;
  double train_nrmse = 0;
  double test_nrmse = 0;
};

/// Default chamber-cycle scenario for a seed.
Scenario chamber_scenario(const SuiteConfig& cfg);

/// Heating, cooling or loaded walking scenario with the suite's seed and rates.
Scenario protocol_scenario(ProfileKind kind, const SuiteConfig& cfg);

/// Trains one family on the split and scores both halves in normalized units.
FamilyFit fit_family(ModelFamily family, const TrainTestSplit& split, const SuiteConfig& cfg,
                     const EpochCallback& on_epoch = {});

/// All five families on the chamber scenario, in report order.
std::vector<FamilyFit> fit_all_families(const Scenario& chamber, const SuiteConfig& cfg,
                                        const EpochCallback& on_epoch = {});

/// `method,train_nrmse,test_nrmse` rows.
void write_ordering_csv(const std::vector<FamilyFit>& fits, std::ostream& out);
void write_ordering_table(const std::vector<FamilyFit>& fits, std::ostream& out);

}  // namespace driftcomp
