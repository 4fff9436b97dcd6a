#include "vb/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vb {

namespace {

using json = nlohmann::ordered_json;

constexpr double kUnitaryTol = 1e-10;

struct KindInfo {
  GateKind kind;
  const char* name;
  int arity;  // -1: width-dependent / variable
};

constexpr KindInfo kKinds[] = {
    {GateKind::Id, "Id", 1},       {GateKind::X, "X", 1},
    {GateKind::Y, "Y", 1},         {GateKind::Z, "Z", 1},
    {GateKind::H, "H", 1},         {GateKind::S, "S", 1},
    {GateKind::Sdg, "Sdg", 1},     {GateKind::RX, "RX", 1},
    {GateKind::RY, "RY", 1},       {GateKind::RZ, "RZ", 1},
    {GateKind::U1q, "U1q", 1},     {GateKind::CNOT, "CNOT", 2},
    {GateKind::CZ, "CZ", 2},       {GateKind::SWAP, "SWAP", 2},
    {GateKind::SU4, "SU4", 2},     {GateKind::PermuteAll, "PermuteAll", -1},
    {GateKind::SubroutineRef, "SubroutineRef", -1},
};

int expected_params(GateKind kind) {
  switch (kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      return 1;
    case GateKind::U1q:
      return 3;
    default:
      return 0;
  }
}

}  // namespace

const char* gate_kind_name(GateKind kind) {
  for (const auto& info : kKinds)
    if (info.kind == kind) return info.name;
  return "?";
}

std::optional<GateKind> gate_kind_from_name(const std::string& name) {
  for (const auto& info : kKinds)
    if (name == info.name) return info.kind;
  return std::nullopt;
}

int gate_arity(GateKind kind) {
  for (const auto& info : kKinds)
    if (info.kind == kind) return info.arity;
  return -1;
}

bool is_one_qubit_kind(GateKind kind) {
  return gate_arity(kind) == 1;
}

bool is_two_qubit_kind(GateKind kind) {
  return gate_arity(kind) == 2;
}

bool is_rotation_kind(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ ||
         kind == GateKind::U1q;
}

bool is_clifford_kind(GateKind kind) {
  switch (kind) {
    case GateKind::Id:
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::H:
    case GateKind::S:
    case GateKind::Sdg:
    case GateKind::CNOT:
    case GateKind::CZ:
    case GateKind::SWAP:
    case GateKind::PermuteAll:
      return true;
    default:
      return false;
  }
}

Shape shape(const Circuit& c) {
  return Shape{c.width, static_cast<int>(c.central.size())};
}

namespace {

void validate_gate(const GateApplication& g, int width, int layer_index,
                   const char* section, std::vector<Violation>& out) {
  auto add = [&](const std::string& rule, const std::string& msg) {
    std::ostringstream os;
    os << section << " layer " << layer_index << ": " << msg;
    out.push_back({rule, layer_index, os.str()});
  };

  const int arity = gate_arity(g.kind);
  if (arity >= 0 && static_cast<int>(g.targets.size()) != arity) {
    add("arity", std::string(gate_kind_name(g.kind)) + " expects " +
                     std::to_string(arity) + " targets, got " +
                     std::to_string(g.targets.size()));
  }
  if (g.kind == GateKind::PermuteAll &&
      static_cast<int>(g.targets.size()) != width) {
    add("arity", "PermuteAll must target all qubits");
  }

  std::set<int> seen;
  for (int t : g.targets) {
    if (t < 0 || t >= width)
      add("target out of range", "target " + std::to_string(t) +
                                    " outside width " + std::to_string(width));
    if (!seen.insert(t).second)
      add("duplicate target",
          std::string(gate_kind_name(g.kind)) + " repeats target " +
              std::to_string(t));
  }

  const int np = expected_params(g.kind);
  if (g.kind != GateKind::PermuteAll &&
      static_cast<int>(g.params.size()) != np) {
    add("params", std::string(gate_kind_name(g.kind)) + " expects " +
                      std::to_string(np) + " params");
  }
  for (double p : g.params) {
    if (!std::isfinite(p)) add("params", "non-finite parameter");
  }

  if (g.kind == GateKind::PermuteAll) {
    std::vector<bool> hit(width, false);
    bool ok = static_cast<int>(g.params.size()) == width;
    if (ok) {
      for (double p : g.params) {
        const int v = static_cast<int>(std::llround(p));
        if (p != static_cast<double>(v) || v < 0 || v >= width || hit[v]) {
          ok = false;
          break;
        }
        hit[v] = true;
      }
    }
    if (!ok) add("permutation", "PermuteAll params are not a bijection");
  }

  if (g.kind == GateKind::SU4) {
    if (g.matrix.size() != 16) {
      add("unitarity", "SU4 requires a 4x4 matrix");
    } else {
      // U U^dagger = I within tolerance.
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          std::complex<double> acc = 0;
          for (int k = 0; k < 4; ++k)
            acc += g.matrix[4 * i + k] * std::conj(g.matrix[4 * j + k]);
          const double want = i == j ? 1.0 : 0.0;
          if (std::abs(acc - want) > kUnitaryTol) {
            add("unitarity", "SU4 matrix is not unitary");
            i = j = 4;
          }
        }
      }
    }
  }

  if (g.kind == GateKind::SubroutineRef) {
    if (!g.body) {
      add("subroutine", "SubroutineRef without body");
    } else {
      if (g.body->width != static_cast<int>(g.targets.size()))
        add("subroutine", "SubroutineRef body width does not match targets");
      auto inner = validate(*g.body);
      for (const auto& v : inner)
        add("subroutine/" + v.rule, "in body of '" + g.label + "': " + v.message);
    }
  }
}

void validate_layers(const std::vector<Layer>& layers, int width,
                     const char* section, std::vector<Violation>& out) {
  for (int li = 0; li < static_cast<int>(layers.size()); ++li) {
    std::set<int> used;
    for (const auto& g : layers[li].gates) {
      validate_gate(g, width, li, section, out);
      for (int t : g.targets) {
        if (t >= 0 && t < width && !used.insert(t).second) {
          std::ostringstream os;
          os << section << " layer " << li << ": qubit " << t
             << " used by more than one gate";
          out.push_back({"duplicate target", li, os.str()});
        }
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate(const Circuit& c) {
  std::vector<Violation> out;
  if (c.width < 1) out.push_back({"width", -1, "width must be positive"});
  if (c.barriers.size() != c.central.size() + 1)
    out.push_back({"barriers", -1,
                   "barriers length must be central layer count + 1"});
  validate_layers(c.prefix, c.width, "prefix", out);
  validate_layers(c.central, c.width, "central", out);
  validate_layers(c.postfix, c.width, "postfix", out);
  return out;
}

Circuit make_circuit(int width, std::vector<Layer> prefix,
                     std::vector<Layer> central, std::vector<Layer> postfix) {
  Circuit c;
  c.width = width;
  c.prefix = std::move(prefix);
  c.central = std::move(central);
  c.postfix = std::move(postfix);
  c.barriers.assign(c.central.size() + 1, 0);
  return c;
}

GateApplication gate(GateKind kind, std::vector<int> targets,
                     std::vector<double> params) {
  GateApplication g;
  g.kind = kind;
  g.targets = std::move(targets);
  g.params = std::move(params);
  return g;
}

GateApplication su4_gate(int a, int b,
                         const std::vector<std::complex<double>>& matrix) {
  GateApplication g;
  g.kind = GateKind::SU4;
  g.targets = {a, b};
  g.matrix = matrix;
  return g;
}

GateApplication permute_all_gate(const std::vector<int>& perm) {
  GateApplication g;
  g.kind = GateKind::PermuteAll;
  for (int i = 0; i < static_cast<int>(perm.size()); ++i) g.targets.push_back(i);
  for (int p : perm) g.params.push_back(static_cast<double>(p));
  return g;
}

GateApplication subroutine_gate(std::string label, std::vector<int> targets,
                                std::shared_ptr<const Circuit> body) {
  GateApplication g;
  g.kind = GateKind::SubroutineRef;
  g.label = std::move(label);
  g.targets = std::move(targets);
  g.body = std::move(body);
  return g;
}

namespace {

json gate_to_json(const GateApplication& g) {
  json j;
  j["kind"] = gate_kind_name(g.kind);
  j["targets"] = g.targets;
  if (g.kind == GateKind::SU4) {
    json rows = json::array();
    for (const auto& e : g.matrix) rows.push_back({e.real(), e.imag()});
    j["params"] = json{{"matrix", rows}};
  } else {
    j["params"] = g.params;
  }
  if (g.kind == GateKind::SubroutineRef) {
    j["label"] = g.label;
    json body;
    body["width"] = g.body->width;
    json sections[3];
    const std::vector<Layer>* parts[3] = {&g.body->prefix, &g.body->central,
                                          &g.body->postfix};
    const char* names[3] = {"prefix", "central", "postfix"};
    for (int s = 0; s < 3; ++s) {
      json layers = json::array();
      for (const auto& layer : *parts[s]) {
        json gl = json::array();
        for (const auto& gg : layer.gates) gl.push_back(gate_to_json(gg));
        layers.push_back(gl);
      }
      body[names[s]] = layers;
    }
    json barriers = json::array();
    for (auto b : g.body->barriers) barriers.push_back(static_cast<bool>(b));
    body["barriers"] = barriers;
    body["metadata"] = json::object();
    j["body"] = body;
  }
  return j;
}

json circuit_to_json(const Circuit& c) {
  json j;
  j["width"] = c.width;
  const std::vector<Layer>* parts[3] = {&c.prefix, &c.central, &c.postfix};
  const char* names[3] = {"prefix", "central", "postfix"};
  for (int s = 0; s < 3; ++s) {
    json layers = json::array();
    for (const auto& layer : *parts[s]) {
      json gl = json::array();
      for (const auto& g : layer.gates) gl.push_back(gate_to_json(g));
      layers.push_back(gl);
    }
    j[names[s]] = layers;
  }
  json barriers = json::array();
  for (auto b : c.barriers) barriers.push_back(static_cast<bool>(b));
  j["barriers"] = barriers;
  json meta;
  meta["family"] = c.metadata.family;
  meta["shape_w"] = c.metadata.shape_w;
  meta["shape_d"] = c.metadata.shape_d;
  meta["seed"] = c.metadata.seed;
  meta["index"] = c.metadata.index;
  json extra = json::object();
  for (const auto& [k, v] : c.metadata.extra) extra[k] = v;
  meta["extra"] = extra;
  j["metadata"] = meta;
  return j;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError{"circuit schema error at " + where + ": " + what};
}

const json& require(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field)) fail(where, std::string("missing field '") + field + "'");
  return j.at(field);
}

GateApplication gate_from_json(const json& j, const std::string& where);

Circuit circuit_from_json(const json& j, const std::string& where) {
  Circuit c;
  const auto& wj = require(j, "width", where);
  if (!wj.is_number_integer()) fail(where + ".width", "must be an integer");
  c.width = wj.get<int>();

  std::vector<Layer>* parts[3] = {&c.prefix, &c.central, &c.postfix};
  const char* names[3] = {"prefix", "central", "postfix"};
  for (int s = 0; s < 3; ++s) {
    const auto& sect = require(j, names[s], where);
    if (!sect.is_array()) fail(where + "." + names[s], "must be an array");
    int li = 0;
    for (const auto& lj : sect) {
      const std::string lwhere =
          where + "." + names[s] + "[" + std::to_string(li) + "]";
      if (!lj.is_array()) fail(lwhere, "layer must be an array of gates");
      Layer layer;
      int gi = 0;
      for (const auto& gj : lj) {
        layer.gates.push_back(
            gate_from_json(gj, lwhere + "[" + std::to_string(gi) + "]"));
        ++gi;
      }
      parts[s]->push_back(std::move(layer));
      ++li;
    }
  }

  const auto& bj = require(j, "barriers", where);
  if (!bj.is_array()) fail(where + ".barriers", "must be an array of booleans");
  for (const auto& b : bj) {
    if (!b.is_boolean()) fail(where + ".barriers", "must contain booleans");
    c.barriers.push_back(b.get<bool>() ? 1 : 0);
  }

  const auto& mj = require(j, "metadata", where);
  if (!mj.is_object()) fail(where + ".metadata", "must be an object");
  if (mj.contains("family")) c.metadata.family = mj.at("family").get<std::string>();
  if (mj.contains("shape_w")) c.metadata.shape_w = mj.at("shape_w").get<int>();
  if (mj.contains("shape_d")) c.metadata.shape_d = mj.at("shape_d").get<int>();
  if (mj.contains("seed")) c.metadata.seed = mj.at("seed").get<std::uint64_t>();
  if (mj.contains("index")) c.metadata.index = mj.at("index").get<int>();
  if (mj.contains("extra"))
    for (const auto& [k, v] : mj.at("extra").items())
      c.metadata.extra[k] = v.get<std::string>();
  return c;
}

GateApplication gate_from_json(const json& j, const std::string& where) {
  GateApplication g;
  if (!j.is_object()) fail(where, "gate must be an object");
  const auto& kj = require(j, "kind", where);
  if (!kj.is_string()) fail(where + ".kind", "must be a string");
  auto kind = gate_kind_from_name(kj.get<std::string>());
  if (!kind) fail(where + ".kind", "unknown gate kind '" + kj.get<std::string>() + "'");
  g.kind = *kind;

  const auto& tj = require(j, "targets", where);
  if (!tj.is_array()) fail(where + ".targets", "must be an array of integers");
  for (const auto& t : tj) {
    if (!t.is_number_integer()) fail(where + ".targets", "must contain integers");
    g.targets.push_back(t.get<int>());
  }

  const auto& pj = require(j, "params", where);
  if (pj.is_object()) {
    const auto& mj = require(pj, "matrix", where + ".params");
    if (!mj.is_array() || mj.size() != 16)
      fail(where + ".params.matrix", "must be an array of 16 [re,im] pairs");
    for (const auto& e : mj) {
      if (!e.is_array() || e.size() != 2)
        fail(where + ".params.matrix", "entries must be [re,im] pairs");
      g.matrix.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
  } else if (pj.is_array()) {
    for (const auto& p : pj) {
      if (!p.is_number()) fail(where + ".params", "must contain numbers");
      g.params.push_back(p.get<double>());
    }
  } else {
    fail(where + ".params", "must be an array or a {\"matrix\": ...} object");
  }

  if (g.kind == GateKind::SubroutineRef) {
    const auto& lj = require(j, "label", where);
    if (!lj.is_string()) fail(where + ".label", "must be a string");
    g.label = lj.get<std::string>();
    const auto& bj = require(j, "body", where);
    g.body = std::make_shared<Circuit>(circuit_from_json(bj, where + ".body"));
  }
  return g;
}

}  // namespace

std::string serialize(const Circuit& c) {
  return circuit_to_json(c).dump(2) + "\n";
}

Circuit deserialize(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError{std::string("invalid JSON: ") + e.what()};
  }
  return circuit_from_json(j, "$");
}

}  // namespace vb
