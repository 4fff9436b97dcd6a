#include "vb/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "json.hpp"

#include "vb/rng.hpp"

namespace vb {

namespace {

using json = nlohmann::ordered_json;

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// P(X >= k) for X ~ Binomial(n, p), computed in log space term by term.
double binom_upper_tail(std::uint64_t k, std::uint64_t n, double p) {
  if (k == 0) return 1.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double tail = 0.0;
  const double lp = std::log(p), lq = std::log1p(-p);
  for (std::uint64_t i = k; i <= n; ++i) {
    tail += std::exp(log_choose(n, i) + static_cast<double>(i) * lp +
                     static_cast<double>(n - i) * lq);
  }
  return std::min(tail, 1.0);
}

std::uint64_t total_shots(const OutcomeRecord& counts) {
  std::uint64_t n = 0;
  for (const auto& [key, c] : counts.counts) n += c;
  return n;
}

Distribution empirical_distribution(const OutcomeRecord& counts) {
  Distribution d;
  d.width = counts.width;
  const double n = static_cast<double>(total_shots(counts));
  for (const auto& [key, c] : counts.counts) {
    d.probs[key] = static_cast<double>(c) / n;
  }
  return d;
}

const char* cg_name(CoarseGraining::Variant v) {
  switch (v) {
    case CoarseGraining::Variant::NoGraining:
      return "no_graining";
    case CoarseGraining::Variant::HeavyLight:
      return "heavy_light";
    case CoarseGraining::Variant::SingleBitMarginal:
      return "single_bit_marginal";
    case CoarseGraining::Variant::TargetSet:
      return "target_set";
  }
  return "?";
}

}  // namespace

std::set<std::uint64_t> heavy_set(const Distribution& ideal) {
  if (ideal.width < 1 || ideal.width > 62) {
    throw MetricArgError("heavy_set: unsupported width");
  }
  const std::uint64_t n = std::uint64_t{1} << ideal.width;
  std::vector<double> nonzero;
  nonzero.reserve(ideal.probs.size());
  for (const auto& [key, p] : ideal.probs) nonzero.push_back(p);
  std::sort(nonzero.begin(), nonzero.end());
  const std::uint64_t zeros = n - nonzero.size();
  // order statistic v[i] over all n probabilities, zeros first
  const auto order_stat = [&](std::uint64_t i) {
    return i < zeros ? 0.0 : nonzero[i - zeros];
  };
  const double median =
      0.5 * (order_stat(n / 2 - 1) + order_stat(n / 2));
  const double lo = order_stat(0), hi = order_stat(n - 1);
  if (hi - lo < 1e-15) {
    throw UniformOutcomeError(
        "heavy_set: all outcome probabilities are equal");
  }
  std::set<std::uint64_t> heavy;
  for (const auto& [key, p] : ideal.probs) {
    if (p > median) heavy.insert(key);
  }
  if (heavy.empty()) {
    throw UniformOutcomeError(
        "heavy_set: no probability exceeds the median");
  }
  return heavy;
}

double heavy_output_probability(const OutcomeRecord& counts,
                                const std::set<std::uint64_t>& heavy) {
  const std::uint64_t n = total_shots(counts);
  if (n == 0) return 0.0;
  std::uint64_t hits = 0;
  for (const auto& [key, c] : counts.counts) {
    if (heavy.count(key)) hits += c;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

double binomial_lower_bound(std::uint64_t successes, std::uint64_t trials,
                            double confidence) {
  if (trials == 0) throw MetricArgError("binomial bound: zero trials");
  if (successes == 0) return 0.0;
  const double alpha = 1.0 - confidence;
  // Find p with P(X >= k | p) = alpha; the tail is increasing in p.
  double lo = 0.0, hi = static_cast<double>(successes) / trials;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (binom_upper_tail(successes, trials, mid) < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Distribution coarse_grain(const Distribution& dist, const CoarseGraining& g) {
  switch (g.variant) {
    case CoarseGraining::Variant::NoGraining:
      return dist;
    case CoarseGraining::Variant::HeavyLight: {
      Distribution out;
      out.width = 1;
      double h = 0.0, total = 0.0;
      for (const auto& [key, p] : dist.probs) {
        total += p;
        if (g.heavy.count(key)) h += p;
      }
      out.probs[1] = h;
      out.probs[0] = total - h;
      return out;
    }
    case CoarseGraining::Variant::SingleBitMarginal: {
      if (g.bit < 0 || g.bit >= dist.width) {
        throw MetricArgError("coarse_grain: bit index out of range");
      }
      Distribution out;
      out.width = 1;
      out.probs[0] = 0.0;
      out.probs[1] = 0.0;
      for (const auto& [key, p] : dist.probs) {
        out.probs[(key >> g.bit) & 1] += p;
      }
      return out;
    }
    case CoarseGraining::Variant::TargetSet: {
      Distribution out;
      out.width = 1;
      double h = 0.0, total = 0.0;
      for (const auto& [key, p] : dist.probs) {
        total += p;
        if (g.target.count(key)) h += p;
      }
      out.probs[1] = h;
      out.probs[0] = total - h;
      return out;
    }
  }
  throw MetricArgError("coarse_grain: unknown variant");
}

double bootstrap_tvd_upper(const OutcomeRecord& counts,
                           const Distribution& ideal,
                           const CoarseGraining& g, double confidence,
                           std::uint64_t seed, int resamples) {
  const std::uint64_t n = total_shots(counts);
  if (n == 0) throw MetricArgError("bootstrap: empty counts");
  const Distribution ideal_cg = coarse_grain(ideal, g);
  const Distribution emp_cg = coarse_grain(empirical_distribution(counts), g);
  // Resampling strings and then binning equals resampling over bins.
  std::vector<std::uint64_t> bin_keys;
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& [key, p] : emp_cg.probs) {
    bin_keys.push_back(key);
    acc += p;
    cum.push_back(acc);
  }
  Rng rng(derive_seed(seed, "bootstrap_tvd", {n}));
  std::vector<double> tvds(resamples);
  std::vector<double> resampled(bin_keys.size());
  for (int b = 0; b < resamples; ++b) {
    std::fill(resampled.begin(), resampled.end(), 0.0);
    for (std::uint64_t s = 0; s < n; ++s) {
      const double u = rng.uniform() * acc;
      const auto it = std::lower_bound(cum.begin(), cum.end(), u);
      const std::size_t idx =
          std::min(static_cast<std::size_t>(it - cum.begin()),
                   bin_keys.size() - 1);
      resampled[idx] += 1.0;
    }
    Distribution boot;
    boot.width = emp_cg.width;
    for (std::size_t i = 0; i < bin_keys.size(); ++i) {
      boot.probs[bin_keys[i]] = resampled[i] / static_cast<double>(n);
    }
    tvds[b] = total_variation_distance(boot, ideal_cg);
  }
  std::sort(tvds.begin(), tvds.end());
  const int idx =
      static_cast<int>(std::ceil(confidence * resamples)) - 1;
  return tvds[std::max(0, std::min(idx, resamples - 1))];
}

ScoreResult score_circuit(const OutcomeRecord& counts,
                          const std::optional<Distribution>& ideal,
                          const CircuitCriterion& criterion,
                          const std::optional<std::string>& ideal_outcome,
                          std::uint64_t bootstrap_seed) {
  const std::uint64_t n = total_shots(counts);
  if (n == 0) throw MetricArgError("score_circuit: empty counts");
  switch (criterion.variant) {
    case CircuitCriterion::Variant::CorrectOutcome: {
      if (!ideal_outcome) {
        throw MissingIdealOutcomeError(
            "CorrectOutcome requires an ideal outcome");
      }
      const std::uint64_t key = key_of_bitstring(*ideal_outcome);
      std::uint64_t k = 0;
      if (auto it = counts.counts.find(key); it != counts.counts.end()) {
        k = it->second;
      }
      const double score = static_cast<double>(k) / n;
      return {score, binomial_lower_bound(k, n, criterion.confidence) >
                         criterion.threshold};
    }
    case CircuitCriterion::Variant::HeavyOutput: {
      if (!ideal) {
        throw MetricArgError("HeavyOutput requires the ideal distribution");
      }
      const std::set<std::uint64_t> heavy = heavy_set(*ideal);
      std::uint64_t k = 0;
      for (const auto& [key, c] : counts.counts) {
        if (heavy.count(key)) k += c;
      }
      const double score = static_cast<double>(k) / n;
      return {score, binomial_lower_bound(k, n, criterion.confidence) >
                         criterion.threshold};
    }
    case CircuitCriterion::Variant::TvdBelow: {
      if (!ideal) {
        throw MetricArgError("TvdBelow requires the ideal distribution");
      }
      const Distribution emp = empirical_distribution(counts);
      const double tvd =
          total_variation_distance(coarse_grain(emp, criterion.coarse),
                                   coarse_grain(*ideal, criterion.coarse));
      const double upper =
          bootstrap_tvd_upper(counts, *ideal, criterion.coarse,
                              criterion.confidence, bootstrap_seed);
      return {1.0 - tvd, upper < criterion.threshold};
    }
    case CircuitCriterion::Variant::HammingBall: {
      if (!ideal_outcome) {
        throw MissingIdealOutcomeError(
            "HammingBall requires an ideal outcome");
      }
      const std::uint64_t target = key_of_bitstring(*ideal_outcome);
      std::uint64_t k = 0;
      for (const auto& [key, c] : counts.counts) {
        if (std::popcount(key ^ target) <= criterion.radius) k += c;
      }
      const double score = static_cast<double>(k) / n;
      return {score, binomial_lower_bound(k, n, criterion.confidence) >
                         criterion.threshold};
    }
    case CircuitCriterion::Variant::CrossEntropyBelow: {
      if (!ideal) {
        throw MetricArgError(
            "CrossEntropyBelow requires the ideal distribution");
      }
      double xe = 0.0;
      for (const auto& [key, c] : counts.counts) {
        const double p = ideal->prob(key);
        if (p <= 0.0) {
          throw ZeroProbabilityOutcomeError(
              "observed outcome '" + bitstring_of(key, counts.width) +
              "' has ideal probability 0");
        }
        xe -= static_cast<double>(c) * std::log(p);
      }
      xe /= static_cast<double>(n);
      return {std::exp(-xe), xe < criterion.threshold};
    }
  }
  throw MetricArgError("score_circuit: unknown criterion");
}

ScoreResult score_ensemble(const std::vector<ScoreResult>& per_circuit,
                           const EnsembleCriterion& rule) {
  if (per_circuit.empty()) {
    throw MetricArgError("score_ensemble: empty circuit list");
  }
  switch (rule.variant) {
    case EnsembleCriterion::Variant::AllPass: {
      double mn = 1.0;
      bool all = true;
      for (const ScoreResult& r : per_circuit) {
        mn = std::min(mn, r.score);
        all = all && r.pass;
      }
      return {mn, all};
    }
    case EnsembleCriterion::Variant::FractionPass: {
      double passed = 0.0;
      for (const ScoreResult& r : per_circuit) passed += r.pass ? 1.0 : 0.0;
      const double frac = passed / per_circuit.size();
      return {frac, frac >= rule.fraction};
    }
    case EnsembleCriterion::Variant::MeanScoreAbove: {
      double mean = 0.0;
      for (const ScoreResult& r : per_circuit) mean += r.score;
      mean /= per_circuit.size();
      return {mean, mean >= rule.threshold};
    }
  }
  throw MetricArgError("score_ensemble: unknown rule");
}

ScoreResult score_pooled_binomial(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>&
        successes_trials,
    double threshold, double confidence) {
  std::uint64_t k = 0, n = 0;
  for (const auto& [s, t] : successes_trials) {
    k += s;
    n += t;
  }
  if (n == 0) throw MetricArgError("pooled score: zero trials");
  const double score = static_cast<double>(k) / n;
  return {score, binomial_lower_bound(k, n, confidence) > threshold};
}

// ---------------------------------------------------------------------------
// JSON forms.

std::string CircuitCriterion::to_json() const {
  json j;
  switch (variant) {
    case Variant::CorrectOutcome:
      j["variant"] = "correct_outcome";
      break;
    case Variant::HeavyOutput:
      j["variant"] = "heavy_output";
      break;
    case Variant::TvdBelow:
      j["variant"] = "tvd_below";
      break;
    case Variant::HammingBall:
      j["variant"] = "hamming_ball";
      break;
    case Variant::CrossEntropyBelow:
      j["variant"] = "cross_entropy_below";
      break;
  }
  j["threshold"] = threshold;
  j["confidence"] = confidence;
  if (variant == Variant::HammingBall) j["radius"] = radius;
  if (variant == Variant::TvdBelow) {
    json cg;
    cg["variant"] = cg_name(coarse.variant);
    if (coarse.variant == CoarseGraining::Variant::HeavyLight) {
      cg["heavy"] = json::array();
      for (std::uint64_t k : coarse.heavy) cg["heavy"].push_back(k);
    } else if (coarse.variant == CoarseGraining::Variant::SingleBitMarginal) {
      cg["bit"] = coarse.bit;
    } else if (coarse.variant == CoarseGraining::Variant::TargetSet) {
      cg["target"] = json::array();
      for (std::uint64_t k : coarse.target) cg["target"].push_back(k);
    }
    j["coarse_graining"] = cg;
  }
  return j.dump(2);
}

CircuitCriterion CircuitCriterion::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError{std::string("criterion: ") + e.what()};
  }
  CircuitCriterion c;
  const std::string v = j.at("variant").get<std::string>();
  if (v == "correct_outcome") {
    c.variant = Variant::CorrectOutcome;
  } else if (v == "heavy_output") {
    c.variant = Variant::HeavyOutput;
  } else if (v == "tvd_below") {
    c.variant = Variant::TvdBelow;
  } else if (v == "hamming_ball") {
    c.variant = Variant::HammingBall;
  } else if (v == "cross_entropy_below") {
    c.variant = Variant::CrossEntropyBelow;
  } else {
    throw ParseError{"criterion: unknown variant '" + v + "'"};
  }
  c.threshold = j.value("threshold", 2.0 / 3.0);
  c.confidence = j.value("confidence", 0.95);
  c.radius = j.value("radius", 0);
  if ((c.threshold <= 0.0 || c.threshold >= 1.0) &&
      c.variant != Variant::CrossEntropyBelow) {
    throw ParseError{"criterion: threshold must lie in (0,1)"};
  }
  if (c.confidence <= 0.0 || c.confidence >= 1.0) {
    throw ParseError{"criterion: confidence must lie in (0,1)"};
  }
  if (c.radius < 0) throw ParseError{"criterion: radius must be >= 0"};
  if (j.contains("coarse_graining")) {
    const json& cg = j["coarse_graining"];
    const std::string cv = cg.at("variant").get<std::string>();
    if (cv == "no_graining") {
      c.coarse.variant = CoarseGraining::Variant::NoGraining;
    } else if (cv == "heavy_light") {
      c.coarse.variant = CoarseGraining::Variant::HeavyLight;
      for (const auto& e : cg.at("heavy")) {
        c.coarse.heavy.insert(e.get<std::uint64_t>());
      }
    } else if (cv == "single_bit_marginal") {
      c.coarse.variant = CoarseGraining::Variant::SingleBitMarginal;
      c.coarse.bit = cg.at("bit").get<int>();
    } else if (cv == "target_set") {
      c.coarse.variant = CoarseGraining::Variant::TargetSet;
      for (const auto& e : cg.at("target")) {
        c.coarse.target.insert(e.get<std::uint64_t>());
      }
    } else {
      throw ParseError{"criterion: unknown coarse graining '" + cv + "'"};
    }
  }
  return c;
}

std::string EnsembleCriterion::to_json() const {
  json j;
  switch (variant) {
    case Variant::AllPass:
      j["variant"] = "all_pass";
      break;
    case Variant::FractionPass:
      j["variant"] = "fraction_pass";
      j["fraction"] = fraction;
      break;
    case Variant::MeanScoreAbove:
      j["variant"] = "mean_score_above";
      j["threshold"] = threshold;
      break;
  }
  return j.dump(2);
}

EnsembleCriterion EnsembleCriterion::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError{std::string("ensemble criterion: ") + e.what()};
  }
  EnsembleCriterion c;
  const std::string v = j.at("variant").get<std::string>();
  if (v == "all_pass") {
    c.variant = Variant::AllPass;
  } else if (v == "fraction_pass") {
    c.variant = Variant::FractionPass;
    c.fraction = j.value("fraction", 0.9);
    if (c.fraction <= 0.0 || c.fraction > 1.0) {
      throw ParseError{"ensemble criterion: fraction must lie in (0,1]"};
    }
  } else if (v == "mean_score_above") {
    c.variant = Variant::MeanScoreAbove;
    c.threshold = j.value("threshold", 2.0 / 3.0);
    if (c.threshold <= 0.0 || c.threshold >= 1.0) {
      throw ParseError{"ensemble criterion: threshold must lie in (0,1)"};
    }
  } else {
    throw ParseError{"ensemble criterion: unknown variant '" + v + "'"};
  }
  return c;
}

}  // namespace vb
