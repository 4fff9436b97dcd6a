#include "vb/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include <omp.h>

#include "vb/rng.hpp"
#include "vb/svg.hpp"

namespace vb {

namespace {

using json = nlohmann::ordered_json;

double param_double(const std::map<std::string, std::string>& params,
                    const std::string& name, double fallback) {
  auto it = params.find(name);
  if (it == params.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + name + "' is not a number: " +
                      it->second);
  }
}

json noise_to_json(const NoiseModel& n) {
  json j;
  j["eps1"] = n.eps1;
  j["eps2"] = n.eps2;
  j["eps_idle"] = n.eps_idle;
  j["eps_readout"] = n.eps_readout;
  j["coherent_overrotation"] = n.coherent_overrotation;
  return j;
}

NoiseModel noise_from_json(const json& j) {
  NoiseModel n;
  n.eps1 = j.value("eps1", 0.0);
  n.eps2 = j.value("eps2", 0.0);
  n.eps_idle = j.value("eps_idle", 0.0);
  n.eps_readout = j.value("eps_readout", 0.0);
  n.coherent_overrotation = j.value("coherent_overrotation", 0.0);
  return n;
}

json outcome_to_json(const OutcomeRecord& r) {
  json j;
  j["circuit_id"] = r.circuit_id;
  j["width"] = r.width;
  j["shots"] = r.shots;
  json jc = json::object();
  for (const auto& [k, n] : r.counts) jc[bitstring_of(k, r.width)] = n;
  j["counts"] = jc;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PipelineError("cannot write " + path.string());
  f << text;
}

// Permissive alphabet used when an ensemble forbids compilation: the circuit
// runs verbatim, so every concrete gate kind is acceptable.
NativeGateSet verbatim_gate_set() {
  NativeGateSet n;
  n.oneq = {GateKind::Id, GateKind::X,  GateKind::Y,   GateKind::Z,
            GateKind::H,  GateKind::S,  GateKind::Sdg, GateKind::RX,
            GateKind::RY, GateKind::RZ, GateKind::U1q};
  n.twoq = {GateKind::CNOT, GateKind::CZ, GateKind::SWAP};
  return n;
}

bool criterion_needs_ideal(CircuitCriterion::Variant v) {
  return v == CircuitCriterion::Variant::HeavyOutput ||
         v == CircuitCriterion::Variant::TvdBelow ||
         v == CircuitCriterion::Variant::CrossEntropyBelow;
}

}  // namespace

std::string BenchmarkConfig::to_json() const {
  json j;
  json je;
  je["family"] = family;
  je["k"] = k;
  je["seed"] = seed;
  json jp = json::object();
  for (const auto& [key, v] : family_params) jp[key] = v;
  je["params"] = jp;
  if (policy_override) je["policy"] = *policy_override;
  j["ensemble"] = je;

  json jl;
  if (!shapes.empty()) {
    jl["shapes"] = json::array();
    for (const Shape& s : shapes)
      jl["shapes"].push_back(json{{"w", s.w}, {"d", s.d}});
  } else {
    jl["max_w"] = max_w;
    jl["max_d"] = max_d;
    jl["depth_base"] = depth_base;
    jl["width_base"] = width_base;
    jl["include_zero_depth"] = include_zero_depth;
  }
  j["lattice"] = jl;

  json js;
  js["noise"] = noise_to_json(noise);
  js["shots"] = shots;
  j["simulator"] = js;

  json jc = json::object();
  if (native) jc["native_gate_set"] = json::parse(native->to_json());
  j["compiler"] = jc;

  json jm;
  jm["criterion"] = json::parse(criterion.to_json());
  jm["ensemble_rule"] = json::parse(ensemble_rule.to_json());
  jm["pooled"] = pooled;
  j["metrics"] = jm;

  json jo;
  jo["dir"] = output_dir;
  jo["threads"] = threads;
  j["output"] = jo;
  return j.dump(2);
}

BenchmarkConfig BenchmarkConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  BenchmarkConfig c;
  try {
    const json& je = j.at("ensemble");
    c.family = je.at("family").get<std::string>();
    c.k = je.value("k", 10);
    c.seed = je.value("seed", std::uint64_t{0});
    if (je.contains("params"))
      for (const auto& [key, v] : je.at("params").items())
        c.family_params[key] =
            v.is_string() ? v.get<std::string>() : v.dump();
    if (je.contains("policy"))
      c.policy_override = je.at("policy").get<std::string>();

    if (j.contains("lattice")) {
      const json& jl = j.at("lattice");
      if (jl.contains("shapes")) {
        for (const auto& s : jl.at("shapes"))
          c.shapes.push_back({s.at("w").get<int>(), s.at("d").get<int>()});
      } else {
        c.max_w = jl.value("max_w", 4);
        c.max_d = jl.value("max_d", 16);
        c.depth_base = jl.value("depth_base", 2);
        c.width_base = jl.value("width_base", 1.2);
        c.include_zero_depth = jl.value("include_zero_depth", false);
      }
    }

    if (j.contains("simulator")) {
      const json& js = j.at("simulator");
      if (js.contains("noise")) c.noise = noise_from_json(js.at("noise"));
      c.shots = js.value("shots", std::uint64_t{1000});
    }

    if (j.contains("compiler") &&
        j.at("compiler").contains("native_gate_set"))
      c.native = NativeGateSet::from_json(
          j.at("compiler").at("native_gate_set").dump());

    if (j.contains("metrics")) {
      const json& jm = j.at("metrics");
      if (jm.contains("criterion"))
        c.criterion = CircuitCriterion::from_json(jm.at("criterion").dump());
      if (jm.contains("ensemble_rule"))
        c.ensemble_rule =
            EnsembleCriterion::from_json(jm.at("ensemble_rule").dump());
      c.pooled = jm.value("pooled", false);
    }

    if (j.contains("output")) {
      c.output_dir = j.at("output").value("dir", std::string{});
      c.threads = j.at("output").value("threads", 0);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema violation: ") + e.what());
  }
  if (c.k < 1) throw ConfigError("ensemble.k must be >= 1");
  if (c.shots < 1) throw ConfigError("simulator.shots must be >= 1");
  return c;
}

std::vector<Shape> BenchmarkConfig::lattice() const {
  if (!shapes.empty()) {
    std::vector<Shape> out = shapes;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  return shape_lattice(max_w, max_d, depth_base, width_base,
                       include_zero_depth);
}

EnsembleSpec generate_family(const BenchmarkConfig& config, Shape shape) {
  const auto& p = config.family_params;
  const std::string& f = config.family;
  if (f == "qv") return qv_ensemble(shape, config.k, config.seed);
  if (f == "clifford_rb")
    return clifford_rb_ensemble(shape, config.k, config.seed);
  if (f == "direct_rb")
    return direct_rb_ensemble(shape, config.k, config.seed,
                              param_double(p, "two_qubit_density", 0.25));
  if (f == "simultaneous_rb")
    return simultaneous_rb_ensemble(shape, config.k, config.seed);
  if (f == "rabi") return rabi_ensemble(shape);
  if (f == "ramsey")
    return ramsey_ensemble(shape, param_double(p, "theta", 0.0));
  if (f == "idle_tomography") return idle_tomography_ensemble(shape);
  if (f == "germ_periodic") return germ_periodic_ensemble(shape);
  if (f == "grover") {
    std::optional<std::uint64_t> marked;
    auto it = p.find("marked");
    if (it != p.end()) marked = std::stoull(it->second);
    return grover_ensemble(shape, marked, config.k, config.seed);
  }
  if (f == "trotter")
    return trotter_ensemble(shape, param_double(p, "J", 1.0),
                            param_double(p, "h", 1.0),
                            param_double(p, "dt", 0.1));
  throw ConfigError("unknown ensemble family '" + f + "'");
}

VolumetricGrid run_benchmark(const BenchmarkConfig& config) {
  const std::vector<Shape> shapes = config.lattice();
  VolumetricGrid grid;
  grid.family = config.family;

  const bool want_dir = !config.output_dir.empty();
  std::filesystem::path dir(config.output_dir);
  if (want_dir) std::filesystem::create_directories(dir);

  for (const Shape& shape : shapes) {
    EnsembleSpec espec;
    try {
      espec = generate_family(config, shape);
    } catch (const ShapeUnsupportedError&) {
      grid.entries[shape] = GridEntry{};  // untested
      continue;
    }

    const std::string policy_str =
        config.policy_override.value_or(espec.compilation_policy);
    const auto pv = policy_from_name(policy_str);
    if (!pv) throw ConfigError("unknown compilation policy '" + policy_str +
                               "'");
    const CompilationPolicy policy{*pv};
    const NativeGateSet native =
        config.native ? *config.native
                      : (*pv == PolicyVariant::None ? verbatim_gate_set()
                                                    : default_native_gate_set());

    const int n = static_cast<int>(espec.circuits.size());
    std::vector<OutcomeRecord> records(n);
    std::vector<ScoreResult> results(n);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pooled_counts(n);
    std::vector<std::string> errors(n);

    // Per-circuit fan-out; every random stream is derived from
    // (config.seed, shape, index), so the schedule cannot change results.
    const int nthreads = config.threads;
#pragma omp parallel for schedule(dynamic) if (nthreads != 1) \
    num_threads(nthreads > 0 ? nthreads : omp_get_max_threads())
    for (int i = 0; i < n; ++i) {
      try {
        const Circuit& raw = espec.circuits[i];
        const Circuit compiled = compile(raw, policy, native);
        const std::uint64_t sim_seed = derive_seed(
            config.seed, "sim",
            {static_cast<std::uint64_t>(shape.w),
             static_cast<std::uint64_t>(shape.d),
             static_cast<std::uint64_t>(i)});
        OutcomeRecord rec =
            sample_noisy(compiled, config.noise, config.shots, sim_seed);
        std::ostringstream id;
        id << config.family << "_w" << shape.w << "_d" << shape.d << "_c"
           << i;
        rec.circuit_id = id.str();

        std::optional<Distribution> ideal;
        if (criterion_needs_ideal(config.criterion.variant))
          ideal = ideal_distribution(compiled);

        std::optional<std::string> outcome = espec.ideal_outcome;
        auto it = raw.metadata.extra.find("ideal_outcome");
        if (it != raw.metadata.extra.end()) outcome = it->second;

        const std::uint64_t boot_seed = derive_seed(
            config.seed, "boot",
            {static_cast<std::uint64_t>(shape.w),
             static_cast<std::uint64_t>(shape.d),
             static_cast<std::uint64_t>(i)});
        results[i] = score_circuit(rec, ideal, config.criterion, outcome,
                                   boot_seed);

        if (config.pooled) {
          std::uint64_t succ = 0;
          if (config.criterion.variant ==
                  CircuitCriterion::Variant::CorrectOutcome &&
              outcome) {
            succ = [&] {
              auto c = rec.counts.find(key_of_bitstring(*outcome));
              return c == rec.counts.end() ? std::uint64_t{0} : c->second;
            }();
          } else if (config.criterion.variant ==
                         CircuitCriterion::Variant::HeavyOutput &&
                     ideal) {
            const auto heavy = heavy_set(*ideal);
            for (const auto& [key, cnt] : rec.counts)
              if (heavy.count(key)) succ += cnt;
          }
          pooled_counts[i] = {succ, rec.shots};
        }
        records[i] = std::move(rec);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }

    for (int i = 0; i < n; ++i)
      if (!errors[i].empty()) {
        std::ostringstream msg;
        msg << "shape (" << shape.w << "," << shape.d << ") circuit " << i
            << ": " << errors[i];
        throw PipelineError(msg.str());
      }

    ScoreResult ens;
    if (config.pooled &&
        (config.criterion.variant ==
             CircuitCriterion::Variant::CorrectOutcome ||
         config.criterion.variant == CircuitCriterion::Variant::HeavyOutput)) {
      ens = score_pooled_binomial(pooled_counts, config.criterion.threshold,
                                  config.criterion.confidence);
    } else {
      ens = score_ensemble(results, config.ensemble_rule);
    }

    GridEntry entry;
    entry.tested = true;
    entry.pass = ens.pass;
    entry.score = ens.score;
    entry.n_circuits = n;
    entry.metadata["policy"] = policy_str;
    entry.metadata["family_rule"] = espec.family_rule;
    grid.entries[shape] = entry;

    if (want_dir) {
      std::ostringstream stem;
      stem << config.family << "_w" << shape.w << "_d" << shape.d;
      write_file(dir / (stem.str() + "_manifest.json"),
                 serialize_manifest(espec));
      json jr = json::array();
      for (const OutcomeRecord& r : records) jr.push_back(outcome_to_json(r));
      write_file(dir / (stem.str() + "_outcomes.json"), jr.dump(2));
    }
  }

  if (want_dir) {
    write_file(dir / "config.json", config.to_json());
    write_file(dir / "grid.json", grid.to_json());
    PlotSpec ps;
    ps.title = config.family;
    ps.show_qv = true;
    ps.metadata["family"] = config.family;
    ps.metadata["criterion"] = config.criterion.to_json();
    ps.metadata["ensemble_rule"] = config.ensemble_rule.to_json();
    ps.metadata["k"] = std::to_string(config.k);
    ps.metadata["shots"] = std::to_string(config.shots);
    ps.metadata["seed"] = std::to_string(config.seed);
    write_file(dir / "plot.svg", render_plot(ps, {grid}));
  }
  return grid;
}

}  // namespace vb
