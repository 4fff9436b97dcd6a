#include "doctest.h"

#include <cmath>

#include "vb/metrics.hpp"
#include "vb/rng.hpp"

using namespace vb;

namespace {

Distribution make_dist(int width,
                       std::initializer_list<std::pair<std::uint64_t, double>>
                           entries) {
  Distribution d;
  d.width = width;
  for (const auto& [k, p] : entries) d.probs[k] = p;
  return d;
}

OutcomeRecord make_counts(
    int width,
    std::initializer_list<std::pair<std::uint64_t, std::uint64_t>> entries) {
  OutcomeRecord r;
  r.width = width;
  for (const auto& [k, n] : entries) {
    r.counts[k] = n;
    r.shots += n;
  }
  return r;
}

// Independent Clopper-Pearson oracle: long-double pmf recurrence plus
// bisection, no lgamma.
double cp_lower_oracle(std::uint64_t k, std::uint64_t n, double conf) {
  if (k == 0) return 0.0;
  const double alpha = 1.0 - conf;
  auto upper_tail = [&](double p) {
    // P(X >= k) with pmf recurrence.
    long double term = std::pow((long double)(1.0 - p), (long double)n);
    long double cdf = term;  // P(X = 0)
    for (std::uint64_t i = 1; i < k; ++i) {
      term *= (long double)(n - i + 1) / i * ((long double)p / (1.0 - p));
      cdf += term;
    }
    return (double)(1.0L - cdf);
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (upper_tail(mid) >= alpha)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("heavy set is the strictly-above-median set") {
  // Definite outcome on 2 qubits: only the outcome is heavy.
  const Distribution def = make_dist(2, {{3, 1.0}});
  const auto heavy = heavy_set(def);
  CHECK(heavy == std::set<std::uint64_t>{3});

  // Uniform distribution has no heavy outputs.
  const Distribution unif =
      make_dist(2, {{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}});
  CHECK_THROWS_AS(heavy_set(unif), UniformOutcomeError);

  // Median ties are light: {0.4, 0.4, 0.2, 0.0} -> median 0.3.
  const Distribution mix = make_dist(2, {{0, 0.4}, {1, 0.4}, {2, 0.2}});
  CHECK(heavy_set(mix) == std::set<std::uint64_t>{0, 1});
}

TEST_CASE("heavy output probability is the mass on the heavy set") {
  const OutcomeRecord r = make_counts(2, {{0, 60}, {1, 25}, {2, 15}});
  CHECK(heavy_output_probability(r, {0, 1}) == doctest::Approx(0.85));
  CHECK(heavy_output_probability(r, {3}) == doctest::Approx(0.0));
}

TEST_CASE("Clopper-Pearson bound matches an independent oracle") {
  for (const auto& [k, n] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{
           {689, 1000}, {5, 10}, {10, 10}, {0, 50}, {1, 3}, {950, 1000}}) {
    const double got = binomial_lower_bound(k, n, 0.95);
    const double want = cp_lower_oracle(k, n, 0.95);
    CHECK(got == doctest::Approx(want).epsilon(1e-7));
  }
}

TEST_CASE("689 heads in 1000 flips fails a 2/3 threshold at 95% confidence") {
  const double bound = binomial_lower_bound(689, 1000, 0.95);
  CHECK(bound < 2.0 / 3.0);
  CHECK(bound > 0.5);
}

TEST_CASE("binomial bound monotonicity") {
  double prev = -1;
  for (std::uint64_t k = 0; k <= 100; k += 10) {
    const double b = binomial_lower_bound(k, 100, 0.95);
    CHECK(b >= prev);
    prev = b;
  }
  // Same frequency, more trials: bound does not decrease.
  CHECK(binomial_lower_bound(660, 1000, 0.95) >=
        binomial_lower_bound(66, 100, 0.95));
}

TEST_CASE("coarse graining preserves probability mass") {
  Rng rng(12);
  Distribution d;
  d.width = 4;
  double total = 0;
  for (std::uint64_t k = 0; k < 16; ++k) {
    d.probs[k] = rng.uniform();
    total += d.probs[k];
  }
  for (auto& [k, p] : d.probs) p /= total;

  CoarseGraining heavy;
  heavy.variant = CoarseGraining::Variant::HeavyLight;
  heavy.heavy = {1, 2, 3};
  CoarseGraining bit;
  bit.variant = CoarseGraining::Variant::SingleBitMarginal;
  bit.bit = 2;
  CoarseGraining target;
  target.variant = CoarseGraining::Variant::TargetSet;
  target.target = {0};
  for (const CoarseGraining& g : {CoarseGraining{}, heavy, bit, target}) {
    const Distribution cg = coarse_grain(d, g);
    CHECK(cg.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Single-bit marginal puts P(bit 2 = 1) in bin 1.
  const Distribution m = coarse_grain(d, bit);
  double want = 0;
  for (const auto& [k, p] : d.probs)
    if (k >> 2 & 1) want += p;
  CHECK(m.prob(1) == doctest::Approx(want));
}

TEST_CASE("TVD is a metric on coarse-grained distributions") {
  Rng rng(77);
  for (int it = 0; it < 30; ++it) {
    Distribution a, b, c;
    a.width = b.width = c.width = 3;
    double ta = 0, tb = 0, tc = 0;
    for (std::uint64_t k = 0; k < 8; ++k) {
      a.probs[k] = rng.uniform();
      b.probs[k] = rng.uniform();
      c.probs[k] = rng.uniform();
      ta += a.probs[k];
      tb += b.probs[k];
      tc += c.probs[k];
    }
    for (std::uint64_t k = 0; k < 8; ++k) {
      a.probs[k] /= ta;
      b.probs[k] /= tb;
      c.probs[k] /= tc;
    }
    const double ab = total_variation_distance(a, b);
    const double ba = total_variation_distance(b, a);
    const double ac = total_variation_distance(a, c);
    const double cb = total_variation_distance(c, b);
    CHECK(ab == doctest::Approx(ba));
    CHECK(ab >= 0);
    CHECK(ab <= 1.0 + 1e-12);
    CHECK(ab <= ac + cb + 1e-12);
    CHECK(total_variation_distance(a, a) == doctest::Approx(0.0));
  }
}

TEST_CASE("bootstrap TVD upper bound is seeded and sane") {
  const Distribution ideal = make_dist(1, {{0, 0.5}, {1, 0.5}});
  const OutcomeRecord r = make_counts(1, {{0, 260}, {1, 240}});
  const double u1 = bootstrap_tvd_upper(r, ideal, CoarseGraining{}, 0.95, 4);
  const double u2 = bootstrap_tvd_upper(r, ideal, CoarseGraining{}, 0.95, 4);
  CHECK(u1 == u2);
  const double tvd = 0.02;  // |0.52-0.5|
  CHECK(u1 >= tvd);
  CHECK(u1 < 0.1);
}

TEST_CASE("score_circuit criteria behave at their boundaries") {
  CircuitCriterion correct;
  correct.variant = CircuitCriterion::Variant::CorrectOutcome;

  // 689/1000 looks above 2/3 but fails with confidence.
  const OutcomeRecord r = make_counts(2, {{0b00, 689}, {0b01, 311}});
  const auto res = score_circuit(r, std::nullopt, correct,
                                 std::string("00"));
  CHECK(res.score == doctest::Approx(0.689));
  CHECK(!res.pass);

  // 720/1000 passes comfortably.
  const OutcomeRecord r2 = make_counts(2, {{0b00, 720}, {0b01, 280}});
  CHECK(score_circuit(r2, std::nullopt, correct, std::string("00")).pass);

  CHECK_THROWS_AS(
      score_circuit(r, std::nullopt, correct, std::nullopt),
      MissingIdealOutcomeError);

  CircuitCriterion ball;
  ball.variant = CircuitCriterion::Variant::HammingBall;
  ball.radius = 1;
  const OutcomeRecord r3 = make_counts(2, {{0b00, 500}, {0b01, 300},
                                           {0b11, 200}});
  const auto ballres = score_circuit(r3, std::nullopt, ball,
                                     std::string("00"));
  CHECK(ballres.score == doctest::Approx(0.8));

  CircuitCriterion xe;
  xe.variant = CircuitCriterion::Variant::CrossEntropyBelow;
  xe.threshold = 1.0;
  const Distribution ideal = make_dist(2, {{0b00, 0.5}, {0b01, 0.5}});
  CHECK_THROWS_AS(score_circuit(r3, ideal, xe, std::nullopt),
                  ZeroProbabilityOutcomeError);
  const auto xeres = score_circuit(r, ideal, xe, std::nullopt);
  CHECK(xeres.score == doctest::Approx(0.5));
  CHECK(xeres.pass);
}

TEST_CASE("ensemble rules") {
  const std::vector<ScoreResult> mixed = {{0.9, true}, {0.5, false}};
  EnsembleCriterion all;
  all.variant = EnsembleCriterion::Variant::AllPass;
  CHECK(!score_ensemble(mixed, all).pass);
  CHECK(score_ensemble({{0.9, true}, {0.8, true}}, all).pass);
  CHECK(score_ensemble({{0.9, true}, {0.8, true}}, all).score ==
        doctest::Approx(0.8));

  EnsembleCriterion mean;
  mean.variant = EnsembleCriterion::Variant::MeanScoreAbove;
  mean.threshold = 2.0 / 3.0;
  const auto meanres = score_ensemble(mixed, mean);
  CHECK(meanres.score == doctest::Approx(0.7));
  CHECK(meanres.pass);

  EnsembleCriterion frac;
  frac.variant = EnsembleCriterion::Variant::FractionPass;
  frac.fraction = 0.9;
  std::vector<ScoreResult> nine(9, {1.0, true});
  nine.push_back({0.0, false});
  CHECK(score_ensemble(nine, frac).pass);
  std::vector<ScoreResult> eight(8, {1.0, true});
  eight.push_back({0.0, false});
  eight.push_back({0.0, false});
  CHECK(!score_ensemble(eight, frac).pass);
}

TEST_CASE("criterion JSON round-trips and validates") {
  CircuitCriterion tvd;
  tvd.variant = CircuitCriterion::Variant::TvdBelow;
  tvd.threshold = 0.1;
  tvd.coarse.variant = CoarseGraining::Variant::SingleBitMarginal;
  tvd.coarse.bit = 1;
  const CircuitCriterion back =
      CircuitCriterion::from_json(tvd.to_json());
  CHECK(back.to_json() == tvd.to_json());

  CHECK_THROWS_AS(
      CircuitCriterion::from_json(R"({"variant":"bogus"})"), ParseError);
  CHECK_THROWS_AS(CircuitCriterion::from_json(
                      R"({"variant":"correct_outcome","threshold":1.5})"),
                  ParseError);

  EnsembleCriterion frac;
  frac.variant = EnsembleCriterion::Variant::FractionPass;
  frac.fraction = 0.9;
  CHECK(EnsembleCriterion::from_json(frac.to_json()).to_json() ==
        frac.to_json());
}

TEST_CASE("pooled binomial scoring") {
  const std::vector<std::pair<std::uint64_t, std::uint64_t>> per = {
      {70, 100}, {71, 100}, {69, 100}};
  const auto res = score_pooled_binomial(per, 2.0 / 3.0, 0.95);
  CHECK(res.score == doctest::Approx(0.7));
  // Pooled N=300 at 0.70: lower bound ~0.653 < 2/3.
  CHECK(res.pass == (binomial_lower_bound(210, 300, 0.95) > 2.0 / 3.0));
}
