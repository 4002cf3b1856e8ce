#include "dwell/config_io.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace dwell {

namespace {

DoubleWellParams params_from_json(const nlohmann::json& j) {
  DoubleWellParams p;
  try {
    const auto& v = j.at("v");
    if (!v.is_array() || v.size() != 4)
      throw std::invalid_argument("config: \"v\" must be an array of 4 heights");
    p.v1 = v[0].get<double>();
    p.v2 = v[1].get<double>();
    p.v3 = v[2].get<double>();
    p.v4 = v[3].get<double>();
    p.x1 = j.at("x1").get<double>();
    p.barrier_thickness = j.at("D").get<double>();
    p.outer_well_width = j.at("w_outer").get<double>();
    p.outer_barrier_width = j.at("w_barrier").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace

DoubleWellParams params_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return params_from_json(j);
}

DoubleWellParams params_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  return params_from_json_text(
      std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
}

std::string params_to_json_text(const DoubleWellParams& p) {
  nlohmann::ordered_json j;
  j["v"] = {p.v1, p.v2, p.v3, p.v4};
  j["x1"] = p.x1;
  j["D"] = p.barrier_thickness;
  j["w_outer"] = p.outer_well_width;
  j["w_barrier"] = p.outer_barrier_width;
  return j.dump();
}

}  // namespace dwell
