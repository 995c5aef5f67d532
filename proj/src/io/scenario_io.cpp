#include "ubcn/io/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ubcn/errors.hpp"
#include "ubcn/io/atomic_file.hpp"

namespace ubcn::io {

namespace {

using nlohmann::json;

struct Quantity {
  double value;
  std::string unit;
};

Quantity split_quantity(const std::string& text) {
  std::istringstream in(text);
  Quantity q{0.0, {}};
  if (!(in >> q.value) || !(in >> q.unit)) throw ConfigError("expected '<number> <unit>', got '" + text + "'");
  std::string extra;
  if (in >> extra) throw ConfigError("trailing text in quantity '" + text + "'");
  if (!std::isfinite(q.value)) throw ConfigError("non-finite quantity '" + text + "'");
  return q;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw ConfigError("override " + key + ": not a number: " + text);
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("override " + key + ": not a non-negative integer: " + text);
  return v;
}

template <class T>
T get(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("scenario is missing '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario field '") + key + "': " + e.what());
  }
}

std::vector<Point> points_from(const json& doc, const char* key) {
  std::vector<Point> out;
  for (const auto& p : get<std::vector<std::vector<double>>>(doc, key)) {
    if (p.size() != 2) throw ConfigError(std::string("'") + key + "' entries must be [x, y]");
    out.emplace_back(p[0], p[1]);
  }
  return out;
}

json points_to(const std::vector<Point>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x(), p.y()});
  return arr;
}

/// Scalar or array, both accepted for per-BD values.
std::vector<double> per_bd(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("scenario is missing '") + key + "'");
  const json& v = doc.at(key);
  if (v.is_number()) return {v.get<double>()};
  return get<std::vector<double>>(doc, key);
}

std::vector<double> list_values(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("override " + key + " has no value");
  return out;
}

}  // namespace

double parse_power_watts(const std::string& text) {
  const Quantity q = split_quantity(text);
  if (q.unit == "W") return q.value;
  if (q.unit == "mW") return q.value * 1e-3;
  if (q.unit == "dBm") return dbm_to_watts(q.value);
  throw ConfigError("unknown power unit '" + q.unit + "' (use W, mW or dBm)");
}

double parse_power_dbm(const std::string& text) {
  const Quantity q = split_quantity(text);
  if (q.unit == "dBm") return q.value;
  const double w = parse_power_watts(text);
  if (!(w > 0.0)) throw ConfigError("power must be positive to express in dBm: '" + text + "'");
  return watts_to_dbm(w);
}

std::string format_exact(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

nlohmann::ordered_json scenario_to_json(const ScenarioParams& p) {
  nlohmann::ordered_json doc;
  doc["ce_positions"] = points_to(p.ce_positions);
  doc["bd_positions"] = points_to(p.bd_positions);
  doc["altitude"] = p.altitude;
  doc["mission_time"] = p.mission_time;
  doc["num_slots"] = p.num_slots;
  doc["beta0"] = p.beta0;
  doc["noise_power"] = format_exact(p.noise_power_dbm) + " dBm";
  doc["eta"] = p.eta;
  doc["qbar"] = p.qbar;
  doc["ebar"] = p.ebar;
  doc["p_max"] = format_exact(p.p_max) + " W";
  doc["v_max"] = p.v_max;
  doc["carrier_freq"] = p.carrier_freq;
  const UavPhysics& u = p.uav;
  doc["uav"] = {{"weight", u.weight},
                {"air_density", u.air_density},
                {"rotor_radius", u.rotor_radius},
                {"disc_area", u.disc_area},
                {"blade_angular_velocity", u.blade_angular_velocity},
                {"tip_speed", u.tip_speed},
                {"num_blades", u.num_blades},
                {"chord", u.chord},
                {"rotor_solidity", u.rotor_solidity},
                {"flat_plate_area", u.flat_plate_area},
                {"fuselage_drag_ratio", u.fuselage_drag_ratio},
                {"induced_correction", u.induced_correction},
                {"mean_induced_velocity", u.mean_induced_velocity},
                {"profile_drag", u.profile_drag}};
  return doc;
}

ScenarioParams scenario_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario document must be an object");
  ScenarioParams p;
  p.ce_positions = points_from(doc, "ce_positions");
  p.bd_positions = points_from(doc, "bd_positions");
  p.altitude = get<double>(doc, "altitude");
  p.mission_time = get<double>(doc, "mission_time");
  const auto slots = get<double>(doc, "num_slots");
  if (!(slots >= 1.0) || slots != std::floor(slots)) throw ConfigError("num_slots must be a positive integer");
  p.num_slots = static_cast<std::size_t>(slots);
  p.beta0 = get<double>(doc, "beta0");
  p.noise_power_dbm = parse_power_dbm(get<std::string>(doc, "noise_power"));
  p.eta = per_bd(doc, "eta");
  p.qbar = per_bd(doc, "qbar");
  p.ebar = per_bd(doc, "ebar");
  p.p_max = parse_power_watts(get<std::string>(doc, "p_max"));
  p.v_max = get<double>(doc, "v_max");
  p.carrier_freq = get<double>(doc, "carrier_freq");
  if (!doc.contains("uav")) throw ConfigError("scenario is missing 'uav'");
  const json& u = doc.at("uav");
  p.uav.weight = get<double>(u, "weight");
  p.uav.air_density = get<double>(u, "air_density");
  p.uav.rotor_radius = get<double>(u, "rotor_radius");
  p.uav.disc_area = get<double>(u, "disc_area");
  p.uav.blade_angular_velocity = get<double>(u, "blade_angular_velocity");
  p.uav.tip_speed = get<double>(u, "tip_speed");
  p.uav.num_blades = get<int>(u, "num_blades");
  p.uav.chord = get<double>(u, "chord");
  p.uav.rotor_solidity = get<double>(u, "rotor_solidity");
  p.uav.flat_plate_area = get<double>(u, "flat_plate_area");
  p.uav.fuselage_drag_ratio = get<double>(u, "fuselage_drag_ratio");
  p.uav.induced_correction = get<double>(u, "induced_correction");
  p.uav.mean_induced_velocity = get<double>(u, "mean_induced_velocity");
  p.uav.profile_drag = get<double>(u, "profile_drag");
  return p;
}

void save_scenario(const std::filesystem::path& path, const ScenarioParams& params) {
  write_atomic(path, scenario_to_json(params).dump(2) + "\n");
}

ScenarioParams load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario file " + path.string() + " is not valid JSON: " + e.what());
  }
  ScenarioParams p = scenario_from_json(doc);
  Scenario check(p);  // validates
  return p;
}

void apply_overrides(const std::vector<std::string>& overrides, GenerationSpec& gen, ScenarioParams& params) {
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + item);
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "M" || key == "K") {
      const std::size_t n = parse_count(key, value);
      if (n == 0) throw ConfigError("override " + key + " must be at least 1");
      (key == "M" ? gen.num_ces : gen.num_bds) = n;
    }
    else if (key == "area_side") gen.area_side = parse_double(key, value);
    else if (key == "T" || key == "mission_time") params.mission_time = parse_double(key, value);
    else if (key == "N" || key == "num_slots") params.num_slots = parse_count(key, value);
    else if (key == "H" || key == "altitude") params.altitude = parse_double(key, value);
    else if (key == "beta0") params.beta0 = parse_double(key, value);
    else if (key == "noise_power") params.noise_power_dbm = parse_power_dbm(value);
    else if (key == "eta") params.eta = list_values(key, value);
    else if (key == "qbar") params.qbar = list_values(key, value);
    else if (key == "ebar") params.ebar = list_values(key, value);
    else if (key == "p_max") params.p_max = parse_power_watts(value);
    else if (key == "v_max") params.v_max = parse_double(key, value);
    else if (key == "carrier_freq") params.carrier_freq = parse_double(key, value);
    else throw ConfigError("unknown override key '" + key + "'");
  }
}

Scenario generate_from_spec(const GenerationSpec& spec, const std::vector<std::string>& overrides) {
  GenerationSpec gen = spec;
  const LayoutDefaults layout = default_layout(gen.profile);
  if (gen.num_ces == 0) gen.num_ces = layout.num_ces;
  if (gen.num_bds == 0) gen.num_bds = layout.num_bds;
  if (gen.area_side == 0.0) gen.area_side = layout.area_side;
  ScenarioParams params = default_params(gen.profile);
  apply_overrides(overrides, gen, params);
  return generate_scenario(gen.seed, gen.num_ces, gen.num_bds, gen.area_side, std::move(params));
}

}  // namespace ubcn::io
