#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "shearsep/experiments.hpp"

namespace shearsep::experiments {

using nlohmann::json;

namespace {

struct NamedKind {
  ExperimentKind kind;
  const char* name;
};
constexpr NamedKind kExperimentNames[] = {
    {ExperimentKind::SingleScale, "single_scale"},
    {ExperimentKind::RescaledBlock, "rescaled_block"},
    {ExperimentKind::Multiscale, "multiscale"},
    {ExperimentKind::Explosive, "explosive"},
    {ExperimentKind::NonuniquenessDemo, "nonuniqueness_demo"},
    {ExperimentKind::HeuristicScaling, "heuristic_scaling"},
};

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(fmt::format("config: '{}' must be an object", where));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw std::invalid_argument(fmt::format("config: unknown key '{}' in {}", key, where));
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(fmt::format("config: bad value for '{}': {}", key, e.what()));
    }
  }
}

Direction parse_direction(int d) {
  if (d == 1) return Direction::E1;
  if (d == 2) return Direction::E2;
  throw std::invalid_argument("config: direction must be 1 or 2");
}

fields::FieldParams parse_field(const json& j) {
  check_keys(j, "field",
             {"kind", "exponent", "sharpness", "n_min", "n_max", "direction", "tag", "blocks", "gain", "pinned_A"});
  fields::FieldParams p;
  std::string kind = fields::kind_name(p.kind);
  read(j, "kind", kind);
  p.kind = fields::parse_kind(kind);
  read(j, "exponent", p.exponent);
  read(j, "sharpness", p.sharpness);
  read(j, "n_min", p.n_min);
  read(j, "n_max", p.n_max);
  int dir = 1;
  read(j, "direction", dir);
  p.direction = parse_direction(dir);
  read(j, "tag", p.tag);
  read(j, "blocks", p.blocks);
  read(j, "gain", p.gain);
  if (j.contains("pinned_A") && !j.at("pinned_A").is_null()) p.pinned_A = j.at("pinned_A").get<double>();
  return p;
}

NoiseConfig parse_noise(const json& j) {
  check_keys(j, "noise", {"kind", "hurst", "beta", "amplitude", "cells_per_block", "max_nodes"});
  NoiseConfig n;
  std::string kind = "brownian";
  read(j, "kind", kind);
  if (kind == "brownian") {
    n.kind = noise::Brownian{};
  } else if (kind == "fbm") {
    noise::FractionalBrownian f;
    read(j, "hurst", f.hurst);
    n.kind = f;
  } else if (kind == "zero") {
    n.kind = noise::ZeroNoise{};
  } else if (kind == "holder") {
    noise::DeterministicHolder h;
    read(j, "beta", h.beta);
    read(j, "amplitude", h.amplitude);
    n.kind = h;
  } else {
    throw std::invalid_argument("config: unknown noise kind '" + kind + "'");
  }
  noise::validate(n.kind);
  read(j, "amplitude", n.amplitude);
  read(j, "cells_per_block", n.cells_per_block);
  read(j, "max_nodes", n.max_nodes);
  if (n.cells_per_block < 1) throw std::invalid_argument("config: cells_per_block must be >= 1");
  return n;
}

flow::IntegratorConfig parse_integrator(const json& j) {
  check_keys(j, "integrator", {"method", "substeps_per_block", "quadrature_nodes"});
  flow::IntegratorConfig c;
  std::string method = "exact_shear";
  read(j, "method", method);
  if (method == "exact_shear") {
    c.method = flow::Method::ExactShear;
  } else if (method == "euler") {
    c.method = flow::Method::GenericEuler;
  } else {
    throw std::invalid_argument("config: unknown integrator '" + method + "'");
  }
  read(j, "substeps_per_block", c.substeps_per_block);
  read(j, "quadrature_nodes", c.quadrature_nodes);
  c.validate();
  return c;
}

template <class V>
void require_nonempty(const V& v, const char* what) {
  if (v.empty()) throw std::invalid_argument(fmt::format("config: sweep list '{}' is empty", what));
}

void parse_sweep(const json& j, ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::SingleScale: {
      check_keys(j, "sweep", {"blocks", "L", "read_separation", "moment_nodes", "clt"});
      auto& s = cfg.single_scale;
      read(j, "blocks", s.blocks);
      read(j, "L", s.L);
      read(j, "read_separation", s.read_separation);
      read(j, "moment_nodes", s.moment_nodes);
      read(j, "clt", s.clt);
      require_nonempty(s.blocks, "blocks");
      break;
    }
    case ExperimentKind::RescaledBlock: {
      check_keys(j, "sweep", {"settings", "beta", "pathwise_trials"});
      auto& s = cfg.rescaled;
      if (j.contains("settings")) {
        s.settings.clear();
        for (const json& e : j.at("settings")) {
          check_keys(e, "settings[]", {"exponent", "n"});
          RescaledSetting r;
          read(e, "exponent", r.exponent);
          read(e, "n", r.n);
          s.settings.push_back(r);
        }
      }
      read(j, "beta", s.beta);
      read(j, "pathwise_trials", s.pathwise_trials);
      require_nonempty(s.settings, "settings");
      break;
    }
    case ExperimentKind::Multiscale: {
      check_keys(j, "sweep", {"pairs", "separation_factor", "beta", "doubling_floor"});
      auto& s = cfg.multiscale;
      if (j.contains("pairs")) {
        s.pairs.clear();
        for (const json& e : j.at("pairs")) {
          check_keys(e, "pairs[]", {"m", "n"});
          ScalePair p;
          read(e, "m", p.m);
          read(e, "n", p.n);
          s.pairs.push_back(p);
        }
      }
      read(j, "separation_factor", s.separation_factor);
      read(j, "beta", s.beta);
      read(j, "doubling_floor", s.doubling_floor);
      require_nonempty(s.pairs, "pairs");
      break;
    }
    case ExperimentKind::Explosive: {
      check_keys(j, "sweep", {"n", "delta", "r", "m"});
      auto& s = cfg.explosive;
      read(j, "n", s.n);
      read(j, "delta", s.delta);
      read(j, "r", s.r);
      read(j, "m", s.m);
      require_nonempty(s.n, "n");
      require_nonempty(s.delta, "delta");
      require_nonempty(s.r, "r");
      require_nonempty(s.m, "m");
      break;
    }
    case ExperimentKind::NonuniquenessDemo: {
      check_keys(j, "sweep", {"n", "m", "directions", "origin", "launch_order"});
      auto& s = cfg.demo;
      read(j, "n", s.n);
      read(j, "m", s.m);
      read(j, "directions", s.directions);
      if (j.contains("origin")) {
        const auto o = j.at("origin").get<std::vector<double>>();
        if (o.size() != 2) throw std::invalid_argument("config: origin needs two coordinates");
        s.origin = {o[0], o[1]};
      }
      read(j, "launch_order", s.launch_order);
      break;
    }
    case ExperimentKind::HeuristicScaling: {
      check_keys(j, "sweep", {"blocks", "read_separation", "gain_ratio"});
      auto& s = cfg.heuristic;
      read(j, "blocks", s.blocks);
      read(j, "read_separation", s.read_separation);
      read(j, "gain_ratio", s.gain_ratio);
      require_nonempty(s.blocks, "blocks");
      break;
    }
  }
}

json noise_json(const NoiseConfig& n) {
  json j = {{"kind", noise::name_of(n.kind)},
            {"amplitude", n.amplitude},
            {"cells_per_block", n.cells_per_block},
            {"max_nodes", n.max_nodes}};
  if (const auto* f = std::get_if<noise::FractionalBrownian>(&n.kind)) j["hurst"] = f->hurst;
  if (const auto* h = std::get_if<noise::DeterministicHolder>(&n.kind)) {
    j["beta"] = h->beta;
    j["amplitude"] = h->amplitude;
  }
  return j;
}

json field_json(const fields::FieldParams& p) {
  json j = {{"kind", fields::kind_name(p.kind)},
            {"exponent", p.exponent},
            {"sharpness", p.sharpness},
            {"n_min", p.n_min},
            {"n_max", p.n_max},
            {"direction", static_cast<int>(p.direction)},
            {"tag", p.tag},
            {"blocks", p.blocks},
            {"gain", p.gain}};
  if (p.pinned_A) j["pinned_A"] = *p.pinned_A;
  return j;
}

json sweep_json(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::SingleScale: {
      const auto& s = cfg.single_scale;
      return {{"blocks", s.blocks}, {"L", s.L}, {"read_separation", s.read_separation},
              {"moment_nodes", s.moment_nodes}, {"clt", s.clt}};
    }
    case ExperimentKind::RescaledBlock: {
      json settings = json::array();
      for (const auto& r : cfg.rescaled.settings) settings.push_back({{"exponent", r.exponent}, {"n", r.n}});
      return {{"settings", settings}, {"beta", cfg.rescaled.beta}, {"pathwise_trials", cfg.rescaled.pathwise_trials}};
    }
    case ExperimentKind::Multiscale: {
      json pairs = json::array();
      for (const auto& p : cfg.multiscale.pairs) pairs.push_back({{"m", p.m}, {"n", p.n}});
      return {{"pairs", pairs},
              {"separation_factor", cfg.multiscale.separation_factor},
              {"beta", cfg.multiscale.beta},
              {"doubling_floor", cfg.multiscale.doubling_floor}};
    }
    case ExperimentKind::Explosive: {
      const auto& s = cfg.explosive;
      return {{"n", s.n}, {"delta", s.delta}, {"r", s.r}, {"m", s.m}};
    }
    case ExperimentKind::NonuniquenessDemo: {
      const auto& s = cfg.demo;
      return {{"n", s.n},
              {"m", s.m},
              {"directions", s.directions},
              {"origin", {s.origin.x1, s.origin.x2}},
              {"launch_order", s.launch_order}};
    }
    case ExperimentKind::HeuristicScaling: {
      const auto& s = cfg.heuristic;
      return {{"blocks", s.blocks}, {"read_separation", s.read_separation}, {"gain_ratio", s.gain_ratio}};
    }
  }
  return json::object();
}

json labelled_json(const Labelled& l) {
  json j = json::object();
  for (const auto& [k, v] : l) j[k] = v;
  return j;
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  for (const auto& e : kExperimentNames) {
    if (e.kind == kind) return e.name;
  }
  return "unknown";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (const auto& e : kExperimentNames) {
    if (name == e.name) return e.kind;
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  check_keys(j, "config",
             {"experiment", "field", "noise", "trials", "batch_size", "seeds", "integrator",
              "override_preconditions", "threads", "trace", "sweep"});
  ExperimentConfig cfg;
  std::string name;
  read(j, "experiment", name);
  if (name.empty()) throw std::invalid_argument("config: 'experiment' is required");
  cfg.experiment = parse_experiment(name);
  if (j.contains("field")) cfg.field = parse_field(j.at("field"));
  if (j.contains("noise")) cfg.noise = parse_noise(j.at("noise"));
  if (j.contains("integrator")) cfg.integrator = parse_integrator(j.at("integrator"));
  read(j, "trials", cfg.trials);
  read(j, "batch_size", cfg.batch_size);
  if (j.contains("seeds")) {
    check_keys(j.at("seeds"), "seeds", {"field", "noise"});
    read(j.at("seeds"), "field", cfg.field_seed);
    read(j.at("seeds"), "noise", cfg.noise_seed);
  }
  read(j, "override_preconditions", cfg.override_preconditions);
  read(j, "threads", cfg.threads);
  read(j, "trace", cfg.trace);
  if (j.contains("sweep")) parse_sweep(j.at("sweep"), cfg);
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (cfg.batch_size < 0) throw std::invalid_argument("config: batch_size must be >= 0");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_json(const ExperimentConfig& cfg) {
  const char* method = cfg.integrator.method == flow::Method::ExactShear ? "exact_shear" : "euler";
  json j = {{"experiment", experiment_name(cfg.experiment)},
            {"field", field_json(cfg.field)},
            {"noise", noise_json(cfg.noise)},
            {"trials", cfg.trials},
            {"batch_size", cfg.batch_size},
            {"seeds", {{"field", cfg.field_seed}, {"noise", cfg.noise_seed}}},
            {"integrator",
             {{"method", method},
              {"substeps_per_block", cfg.integrator.substeps_per_block},
              {"quadrature_nodes", cfg.integrator.quadrature_nodes}}},
            {"override_preconditions", cfg.override_preconditions},
            {"threads", cfg.threads},
            {"trace", cfg.trace},
            {"sweep", sweep_json(cfg)}};
  return j.dump(2);
}

double SweepPoint::get(const std::string& key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  for (const auto& [k, v] : extra) {
    if (k == key) return v;
  }
  throw std::out_of_range("sweep point has no column '" + key + "'");
}

bool ExperimentReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

const Verdict& ExperimentReport::verdict(const std::string& id) const {
  for (const Verdict& v : verdicts) {
    if (v.id == id) return v;
  }
  throw std::out_of_range("report has no verdict '" + id + "'");
}

double ExperimentReport::summary_value(const std::string& key) const {
  for (const auto& [k, v] : summary) {
    if (k == key) return v;
  }
  throw std::out_of_range("report has no summary entry '" + key + "'");
}

std::string report_json(const ExperimentReport& r, bool include_runtime) {
  json points = json::array();
  for (const SweepPoint& p : r.points) {
    json jp = {{"label", p.label},
               {"params", labelled_json(p.params)},
               {"estimate", p.estimate},
               {"stderr", p.se},
               {"vacuous", p.vacuous},
               {"extra", labelled_json(p.extra)}};
    if (std::isnan(p.bound)) {
      jp["bound"] = nullptr;
      jp["clamped"] = nullptr;
    } else {
      jp["bound"] = p.bound;
      jp["clamped"] = std::min(p.bound, 1.0);
    }
    points.push_back(jp);
  }
  json verdicts = json::array();
  for (const Verdict& v : r.verdicts) {
    verdicts.push_back({{"id", v.id}, {"description", v.description}, {"passed", v.passed}, {"value", v.value}});
  }
  json j = {{"experiment", experiment_name(r.experiment)},
            {"spec_hash", fmt::format("{:016x}", r.spec_hash)},
            {"field", json::parse(fields::canonical_json(r.field))},
            {"seeds", {{"field", r.field_seed}, {"noise", r.noise_seed}}},
            {"trials", r.trials},
            {"points", points},
            {"verdicts", verdicts},
            {"summary", labelled_json(r.summary)},
            {"all_passed", r.all_passed()}};
  if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
  return j.dump(2);
}

namespace {

std::string cell(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{:.17g}", v);
}

std::vector<std::string> union_keys(const std::vector<SweepPoint>& points, bool params) {
  std::vector<std::string> keys;
  for (const SweepPoint& p : points) {
    for (const auto& [k, v] : params ? p.params : p.extra) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
  }
  return keys;
}

double lookup(const Labelled& l, const std::string& key) {
  for (const auto& [k, v] : l) {
    if (k == key) return v;
  }
  return std::nan("");
}

}  // namespace

std::string table_csv(const ExperimentReport& r) {
  const auto pk = union_keys(r.points, true);
  const auto ek = union_keys(r.points, false);
  std::string out = "label";
  for (const auto& k : pk) out += "," + k;
  out += ",estimate,stderr,bound,clamped,vacuous";
  for (const auto& k : ek) out += "," + k;
  out += "\n";
  for (const SweepPoint& p : r.points) {
    out += p.label;
    for (const auto& k : pk) out += "," + cell(lookup(p.params, k));
    out += fmt::format(",{},{},{},{},{}", cell(p.estimate), cell(p.se), cell(p.bound),
                       cell(std::isnan(p.bound) ? p.bound : std::min(p.bound, 1.0)), p.vacuous ? 1 : 0);
    for (const auto& k : ek) out += "," + cell(lookup(p.extra, k));
    out += "\n";
  }
  return out;
}

}  // namespace shearsep::experiments
