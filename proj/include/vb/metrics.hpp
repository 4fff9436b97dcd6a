#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vb/distribution.hpp"
#include "vb/simulator.hpp"

namespace vb {

struct UniformOutcomeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingIdealOutcomeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroProbabilityOutcomeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MetricArgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Outcome binning applied before a TVD comparison.
struct CoarseGraining {
  enum class Variant { NoGraining, HeavyLight, SingleBitMarginal, TargetSet };
  Variant variant = Variant::NoGraining;
  std::set<std::uint64_t> heavy;   // HeavyLight
  int bit = 0;                     // SingleBitMarginal
  std::set<std::uint64_t> target;  // TargetSet
};

struct CircuitCriterion {
  enum class Variant {
    CorrectOutcome,
    HeavyOutput,
    TvdBelow,
    HammingBall,
    CrossEntropyBelow,
  };
  Variant variant = Variant::CorrectOutcome;
  double threshold = 2.0 / 3.0;
  double confidence = 0.95;
  int radius = 0;           // HammingBall
  CoarseGraining coarse;    // TvdBelow

  std::string to_json() const;
  static CircuitCriterion from_json(const std::string& text);
};

struct EnsembleCriterion {
  enum class Variant { AllPass, FractionPass, MeanScoreAbove };
  Variant variant = Variant::AllPass;
  double fraction = 0.9;          // FractionPass
  double threshold = 2.0 / 3.0;   // MeanScoreAbove

  std::string to_json() const;
  static EnsembleCriterion from_json(const std::string& text);
};

struct ScoreResult {
  double score = 0.0;
  bool pass = false;
};

// Strings whose ideal probability is strictly greater than the median of all
// 2^w probabilities; throws UniformOutcomeError when every probability is
// equal.
std::set<std::uint64_t> heavy_set(const Distribution& ideal);

double heavy_output_probability(const OutcomeRecord& counts,
                                const std::set<std::uint64_t>& heavy);

// Exact one-sided Clopper-Pearson lower confidence bound for a binomial
// proportion (bisection, tolerance 1e-10).
double binomial_lower_bound(std::uint64_t successes, std::uint64_t trials,
                            double confidence);

Distribution coarse_grain(const Distribution& dist, const CoarseGraining& g);

// Percentile upper confidence bound on TVD(empirical, ideal) after coarse
// graining, from a seeded nonparametric bootstrap with B resamples.
double bootstrap_tvd_upper(const OutcomeRecord& counts,
                           const Distribution& ideal,
                           const CoarseGraining& g, double confidence,
                           std::uint64_t seed, int resamples = 1000);

ScoreResult score_circuit(const OutcomeRecord& counts,
                          const std::optional<Distribution>& ideal,
                          const CircuitCriterion& criterion,
                          const std::optional<std::string>& ideal_outcome,
                          std::uint64_t bootstrap_seed = 0);

ScoreResult score_ensemble(const std::vector<ScoreResult>& per_circuit,
                           const EnsembleCriterion& rule);

// Pooled-confidence variant for frequency criteria: sums successes and trials
// across circuits before taking the binomial bound.  Off by default in the
// pipeline.
ScoreResult score_pooled_binomial(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>&
        successes_trials,
    double threshold, double confidence);

}  // namespace vb
