#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldnn/reweight.hpp"

namespace ldnn {

// Raised for malformed, incomplete, or inconsistent experiment documents.
// Messages name the offending field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class PriorKind { kBernoulli, kGroupBernoulli, kGaussian, kPointMass, kParticleFile };
enum class InitKind { kOnes, kGaussian, kConstant };

struct InitSpec {
  InitKind kind = InitKind::kOnes;
  double stddev = 1.0;  // gaussian: must be > 0 so weights start nonzero
  double value = 1.0;   // constant: must be nonzero
};

// Joint law of one (V0-block, Theta*-block) pair. Blocks are i.i.d. across
// the signal; group_bernoulli draws one coin per block, everything else is
// entry-wise i.i.d. within the block.
struct PriorSpec {
  PriorKind kind = PriorKind::kBernoulli;
  double p = 0.0;        // bernoulli / group_bernoulli
  double mean = 0.0;     // gaussian
  double stddev = 1.0;   // gaussian
  double value = 0.0;    // point_mass
  std::string path;      // particle_file: CSV rows V_1..V_b,Theta_1..Theta_b
  InitSpec init;         // ignored by particle_file (the file carries V)
};

enum class MetricKind { kL1Error, kSquaredError };

struct ExperimentConfig {
  int n = 0;
  int d = 0;
  double kappa = 0.0;  // d / n, derived
  double sigma = 0.0;
  double lambda = 0.0;
  int b = 1;
  int T = 0;
  int trials = 1;
  std::uint64_t seed = 0;
  std::int64_t particles = 1'000'000;
  ReweightSpec psi;
  PriorSpec prior;
  std::vector<MetricKind> metrics{MetricKind::kL1Error};
};

// Parses a complete experiment document. Every field is required except
// "metrics" (default ["l1_error"]) and "particles" (default 1e6); there are
// no other silent defaults.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical JSON of the experiment identity: model and algorithm parameters
// only. Execution knobs (seed, trials, particles) are excluded so runs of the
// same experiment remain joinable when those are overridden.
std::string canonical_config_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);  // 16 hex chars, FNV-1a

const char* to_string(MetricKind m);
MetricKind metric_from_string(const std::string& name);  // throws ConfigError
const char* to_string(PriorKind k);
const char* to_string(InitKind k);
std::string describe(const PriorSpec& prior);

// Theta* entries bounded almost surely (the setting the exact predictions
// assume); a gaussian signal prior is the labeled exception.
bool prior_within_assumption(const PriorSpec& prior);
bool metric_within_guarantee(MetricKind m);  // squared error is the labeled exception

}  // namespace ldnn
