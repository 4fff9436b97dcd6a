// vb: volumetric-benchmark command line tool.
//
// Subcommands cover the pipeline end to end: lattice, generate, compile,
// simulate, score, frontier, qv, predict, report, plot, run.  Exit codes:
// 0 success, 1 usage error, 2 data/validation error, 3 internal error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vb/analysis.hpp"
#include "vb/compiler.hpp"
#include "vb/ensembles.hpp"
#include "vb/metrics.hpp"
#include "vb/pipeline.hpp"
#include "vb/rng.hpp"
#include "vb/simulator.hpp"
#include "vb/svg.hpp"

namespace {

using json = nlohmann::ordered_json;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_output(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw DataError("cannot write " + out);
  f << text;
}

json outcome_to_json(const vb::OutcomeRecord& r) {
  json j;
  j["circuit_id"] = r.circuit_id;
  j["width"] = r.width;
  j["shots"] = r.shots;
  json jc = json::object();
  for (const auto& [k, n] : r.counts) jc[vb::bitstring_of(k, r.width)] = n;
  j["counts"] = jc;
  return j;
}

vb::OutcomeRecord outcome_from_json(const json& j) {
  vb::OutcomeRecord r;
  r.circuit_id = j.value("circuit_id", std::string{});
  r.width = j.at("width").get<int>();
  r.shots = j.at("shots").get<std::uint64_t>();
  for (const auto& [key, v] : j.at("counts").items())
    r.counts[vb::key_of_bitstring(key)] = v.get<std::uint64_t>();
  return r;
}

vb::BenchmarkConfig load_config(const std::string& path) {
  return vb::BenchmarkConfig::from_json(read_file(path));
}

std::map<std::string, std::string> parse_params(
    const std::vector<std::string>& kvs) {
  std::map<std::string, std::string> out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw DataError("--param expects key=value, got '" + kv + "'");
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

std::optional<std::string> ideal_outcome_of(const vb::Circuit& c,
                                            const vb::EnsembleSpec& spec) {
  auto it = c.metadata.extra.find("ideal_outcome");
  if (it != c.metadata.extra.end()) return it->second;
  return spec.ideal_outcome;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"volumetric benchmark toolkit"};
  app.require_subcommand(1);

  // lattice
  auto* c_lat = app.add_subcommand("lattice", "print the shape lattice");
  int max_w = 13, max_d = 16, depth_base = 2;
  double width_base = 1.2;
  bool zero_depth = false;
  std::string lat_out;
  c_lat->add_option("--max-w", max_w);
  c_lat->add_option("--max-d", max_d);
  c_lat->add_option("--depth-base", depth_base);
  c_lat->add_option("--width-base", width_base);
  c_lat->add_flag("--include-zero-depth", zero_depth);
  c_lat->add_option("--out", lat_out);

  // generate
  auto* c_gen = app.add_subcommand("generate", "generate one ensemble");
  std::string gen_family = "qv", gen_out;
  int gen_w = 2, gen_d = 2, gen_k = 10;
  std::uint64_t gen_seed = 0;
  std::vector<std::string> gen_params;
  c_gen->add_option("--family", gen_family)->required();
  c_gen->add_option("--w", gen_w)->required();
  c_gen->add_option("--d", gen_d)->required();
  c_gen->add_option("--k", gen_k);
  c_gen->add_option("--seed", gen_seed);
  c_gen->add_option("--param", gen_params);
  c_gen->add_option("--out", gen_out);

  // compile
  auto* c_cmp = app.add_subcommand("compile", "compile an ensemble manifest");
  std::string cmp_in, cmp_out, cmp_policy, cmp_native;
  c_cmp->add_option("--in", cmp_in)->required();
  c_cmp->add_option("--policy", cmp_policy);
  c_cmp->add_option("--native", cmp_native);
  c_cmp->add_option("--out", cmp_out);

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "sample noisy outcomes");
  std::string sim_in, sim_out;
  std::uint64_t sim_shots = 1000, sim_seed = 0;
  vb::NoiseModel sim_noise;
  c_sim->add_option("--in", sim_in)->required();
  c_sim->add_option("--shots", sim_shots);
  c_sim->add_option("--seed", sim_seed);
  c_sim->add_option("--eps1", sim_noise.eps1);
  c_sim->add_option("--eps2", sim_noise.eps2);
  c_sim->add_option("--eps-idle", sim_noise.eps_idle);
  c_sim->add_option("--eps-readout", sim_noise.eps_readout);
  c_sim->add_option("--overrotation", sim_noise.coherent_overrotation);
  c_sim->add_option("--out", sim_out);

  // score
  auto* c_sco = app.add_subcommand("score", "score outcomes");
  std::string sco_manifest, sco_outcomes, sco_criterion, sco_rule, sco_out;
  std::uint64_t sco_seed = 0;
  c_sco->add_option("--manifest", sco_manifest)->required();
  c_sco->add_option("--outcomes", sco_outcomes)->required();
  c_sco->add_option("--criterion", sco_criterion);
  c_sco->add_option("--rule", sco_rule);
  c_sco->add_option("--seed", sco_seed);
  c_sco->add_option("--out", sco_out);

  // frontier
  auto* c_fro = app.add_subcommand("frontier", "Pareto frontier of a grid");
  std::string fro_grid, fro_out;
  c_fro->add_option("--grid", fro_grid)->required();
  c_fro->add_option("--out", fro_out);

  // qv
  auto* c_qv = app.add_subcommand("qv", "log2 quantum volume of a grid");
  std::string qv_grid, qv_out;
  c_qv->add_option("--grid", qv_grid)->required();
  c_qv->add_option("--out", qv_out);

  // predict
  auto* c_pre = app.add_subcommand("predict", "depolarizing-model grid");
  std::string pre_config, pre_out;
  c_pre->add_option("--config", pre_config)->required();
  c_pre->add_option("--out", pre_out);

  // report
  auto* c_rep = app.add_subcommand("report", "observed-vs-predicted flags");
  std::string rep_obs, rep_pred, rep_out;
  c_rep->add_option("--observed", rep_obs)->required();
  c_rep->add_option("--predicted", rep_pred)->required();
  c_rep->add_option("--out", rep_out);

  // plot
  auto* c_plo = app.add_subcommand("plot", "render a volumetric SVG plot");
  std::vector<std::string> plo_grids;
  std::string plo_pred, plo_out, plo_title;
  bool plo_qv = false, plo_score = false, plo_frontier_only = false;
  bool plo_linear = false;
  c_plo->add_option("--grid", plo_grids)->required();
  c_plo->add_option("--predicted", plo_pred);
  c_plo->add_option("--title", plo_title);
  c_plo->add_flag("--qv", plo_qv);
  c_plo->add_flag("--score-shading", plo_score);
  c_plo->add_flag("--frontier-only", plo_frontier_only);
  c_plo->add_flag("--linear", plo_linear);
  c_plo->add_option("--out", plo_out);

  // run
  auto* c_run = app.add_subcommand("run", "full benchmark pipeline");
  std::string run_config, run_out;
  c_run->add_option("--config", run_config)->required();
  c_run->add_option("--out", run_out);

  CLI11_PARSE(app, argc, argv);

  if (c_lat->parsed()) {
    const auto shapes = vb::shape_lattice(max_w, max_d, depth_base,
                                          width_base, zero_depth);
    json j = json::array();
    for (const vb::Shape& s : shapes)
      j.push_back(json{{"w", s.w}, {"d", s.d}});
    write_output(lat_out, j.dump(2));
  } else if (c_gen->parsed()) {
    vb::BenchmarkConfig cfg;
    cfg.family = gen_family;
    cfg.k = gen_k;
    cfg.seed = gen_seed;
    cfg.family_params = parse_params(gen_params);
    const vb::EnsembleSpec spec =
        vb::generate_family(cfg, vb::Shape{gen_w, gen_d});
    write_output(gen_out, vb::serialize_manifest(spec));
  } else if (c_cmp->parsed()) {
    vb::EnsembleSpec spec = vb::deserialize_manifest(read_file(cmp_in));
    const std::string policy_str =
        cmp_policy.empty() ? spec.compilation_policy : cmp_policy;
    const auto pv = vb::policy_from_name(policy_str);
    if (!pv) throw DataError("unknown policy '" + policy_str + "'");
    const vb::NativeGateSet native =
        cmp_native.empty() ? vb::default_native_gate_set()
                           : vb::NativeGateSet::from_json(read_file(cmp_native));
    for (vb::Circuit& c : spec.circuits)
      c = vb::compile(c, vb::CompilationPolicy{*pv}, native);
    spec.compilation_policy = policy_str;
    write_output(cmp_out, vb::serialize_manifest(spec));
  } else if (c_sim->parsed()) {
    const vb::EnsembleSpec spec = vb::deserialize_manifest(read_file(sim_in));
    json j = json::array();
    for (std::size_t i = 0; i < spec.circuits.size(); ++i) {
      const std::uint64_t s = vb::derive_seed(
          sim_seed, "sim",
          {static_cast<std::uint64_t>(spec.shape.w),
           static_cast<std::uint64_t>(spec.shape.d), i});
      vb::OutcomeRecord rec =
          vb::sample_noisy(spec.circuits[i], sim_noise, sim_shots, s);
      std::ostringstream id;
      id << spec.family << "_w" << spec.shape.w << "_d" << spec.shape.d
         << "_c" << i;
      rec.circuit_id = id.str();
      j.push_back(outcome_to_json(rec));
    }
    write_output(sim_out, j.dump(2));
  } else if (c_sco->parsed()) {
    const vb::EnsembleSpec spec =
        vb::deserialize_manifest(read_file(sco_manifest));
    vb::CircuitCriterion criterion;
    if (!sco_criterion.empty())
      criterion = vb::CircuitCriterion::from_json(read_file(sco_criterion));
    vb::EnsembleCriterion rule;
    if (!sco_rule.empty())
      rule = vb::EnsembleCriterion::from_json(read_file(sco_rule));
    std::vector<vb::OutcomeRecord> records;
    for (const auto& jr : json::parse(read_file(sco_outcomes)))
      records.push_back(outcome_from_json(jr));
    if (records.size() != spec.circuits.size())
      throw DataError("outcome count does not match manifest circuit count");

    std::vector<vb::ScoreResult> per;
    json jper = json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
      std::optional<vb::Distribution> ideal;
      if (criterion.variant == vb::CircuitCriterion::Variant::HeavyOutput ||
          criterion.variant == vb::CircuitCriterion::Variant::TvdBelow ||
          criterion.variant ==
              vb::CircuitCriterion::Variant::CrossEntropyBelow)
        ideal = vb::ideal_distribution(spec.circuits[i]);
      const auto res = vb::score_circuit(
          records[i], ideal, criterion,
          ideal_outcome_of(spec.circuits[i], spec),
          vb::derive_seed(sco_seed, "boot", {i}));
      per.push_back(res);
      jper.push_back(json{{"score", res.score}, {"pass", res.pass}});
    }
    const vb::ScoreResult ens = vb::score_ensemble(per, rule);
    json j;
    j["per_circuit"] = jper;
    j["ensemble"] = json{{"score", ens.score}, {"pass", ens.pass}};
    write_output(sco_out, j.dump(2));
  } else if (c_fro->parsed()) {
    const auto grid = vb::VolumetricGrid::from_json(read_file(fro_grid));
    const auto f = vb::pareto_frontier(grid);
    json j = json::array();
    for (const vb::Shape& p : f.points)
      j.push_back(json{{"w", p.w}, {"d_max", p.d}});
    write_output(fro_out, j.dump(2));
  } else if (c_qv->parsed()) {
    const auto grid = vb::VolumetricGrid::from_json(read_file(qv_grid));
    const auto r = vb::quantum_volume(grid);
    write_output(qv_out, std::to_string(r.log2_quantum_volume));
  } else if (c_pre->parsed()) {
    const vb::BenchmarkConfig cfg = load_config(pre_config);
    vb::DepolarizingPredictor pred;
    pred.eps1 = cfg.noise.eps1;
    pred.eps2 = cfg.noise.eps2;
    pred.mode =
        cfg.criterion.variant == vb::CircuitCriterion::Variant::HeavyOutput
            ? vb::DepolarizingPredictor::Mode::HeavyOutput
            : vb::DepolarizingPredictor::Mode::DefiniteOutcome;
    const auto grid = vb::predict(
        cfg.lattice(),
        [&cfg](vb::Shape s) {
          vb::BenchmarkConfig one = cfg;
          one.k = 1;
          return vb::generate_family(one, s).circuits.at(0);
        },
        pred, cfg.criterion.threshold, cfg.family + " (predicted)");
    write_output(pre_out, grid.to_json());
  } else if (c_rep->parsed()) {
    const auto obs = vb::VolumetricGrid::from_json(read_file(rep_obs));
    const auto pre = vb::VolumetricGrid::from_json(read_file(rep_pred));
    json j = json::array();
    for (const auto& fl : vb::discrepancy_report(obs, pre)) {
      json jf;
      jf["kind"] = fl.kind == vb::DiscrepancyFlag::Kind::WidthDeficiency
                       ? "width_deficiency"
                       : "depth_deficiency";
      jf["w"] = fl.w;
      jf["annotation"] = fl.annotation;
      j.push_back(jf);
    }
    write_output(rep_out, j.dump(2));
  } else if (c_plo->parsed()) {
    std::vector<vb::VolumetricGrid> grids;
    for (const std::string& g : plo_grids)
      grids.push_back(vb::VolumetricGrid::from_json(read_file(g)));
    std::optional<vb::VolumetricGrid> pred;
    if (!plo_pred.empty())
      pred = vb::VolumetricGrid::from_json(read_file(plo_pred));
    vb::PlotSpec ps;
    ps.title = plo_title.empty() ? grids[0].family : plo_title;
    ps.show_qv = plo_qv;
    ps.shading = plo_score ? vb::PlotSpec::Shading::Score
                           : vb::PlotSpec::Shading::Binary;
    ps.frontier_only = plo_frontier_only;
    ps.axes = plo_linear ? vb::PlotSpec::Axes::Linear : vb::PlotSpec::Axes::Log;
    for (const auto& g : grids) ps.metadata["family"] = g.family;
    write_output(plo_out,
                 vb::render_plot(ps, grids, pred ? &*pred : nullptr));
  } else if (c_run->parsed()) {
    vb::BenchmarkConfig cfg = load_config(run_config);
    if (!run_out.empty()) cfg.output_dir = run_out;
    const auto grid = vb::run_benchmark(cfg);
    std::cout << grid.to_json() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vb::ParseError& e) {
    std::cerr << "error: " << e.message << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
