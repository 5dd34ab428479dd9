#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critperc/io.hpp"

namespace critperc {

struct ExperimentConfig {
  int d = 2;
  int n = 2;
  std::optional<double> p;  // unset: literature value for d
  std::uint64_t n_samples = 10000;
  std::uint64_t seed = 1;
  double tol = kDefaultTolerance;
  std::uint64_t budget = kDefaultNodeBudget;
  std::string out_dir = "out";
  Method oracle = Method::MonteCarlo;
  unsigned workers = 0;
  std::uint64_t boundary_samples = 1000;  // per face

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
  double effective_p() const;
  PercParams params() const;

  bool operator==(const ExperimentConfig&) const = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Worker count is left out when `with_workers` is false so that outputs do
/// not depend on it.
json to_json(const ExperimentConfig& c, bool with_workers = true);

/// Fields present in `j` replace those of `base`; unknown keys are rejected.
ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Lazily evaluated stages of the construction. Each accessor runs the
/// stages it depends on once and caches the result.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config);

  const ExperimentConfig& config() const { return cfg_; }

  std::vector<Classification> good_set();
  const GrowthTrace& trace();
  const GoodPath& good_path();
  const GMap& gmap();
  const BoundaryReport& boundary();
  const FacePreservationReport& face_preservation();
  const std::vector<PreimageResult>& preimages();  // lattice targets of [0,n]^d
  std::vector<PreimageResult> preimages(const std::vector<Point>& targets);
  const std::vector<ChainRow>& chain();            // every x in Λ(n)
  json summary();

 private:
  EstimatorResult good_probability(const Site& z);
  void ensure_direct();

  ExperimentConfig cfg_;
  std::optional<GrowthTrace> trace_;
  std::optional<GoodPath> path_;
  std::optional<GMap> gmap_;
  std::optional<BoundaryReport> boundary_;
  std::optional<FacePreservationReport> faces_;
  std::optional<std::vector<PreimageResult>> preimages_;
  std::optional<std::vector<ChainRow>> chain_;
  std::optional<std::vector<Classification>> good_;
  std::vector<EstimatorResult> direct_;  // P(0 <-> x in Λ(4n)), indexed by Box order of Λ(4n)
  std::vector<Box> direct_box_;
};

/// Failure of a named stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what) : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineOutcome {
  bool ok = false;
  std::string stage;    // failing stage when !ok
  std::string error;
  std::vector<std::string> files;
};

/// Runs every stage and writes the artifacts into cfg.out_dir. On failure
/// writes error.json there as well.
PipelineOutcome run_pipeline(const ExperimentConfig& cfg);

json error_record(const std::string& stage, const std::string& type, const std::string& message);

}  // namespace critperc
