#include "slsoh/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slsoh/error.hpp"

namespace slsoh {

namespace {

using Json = nlohmann::ordered_json;

const Json& field(const Json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw SchemaError(std::string("model: missing field '") + name + "'");
  return *it;
}

double number(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number()) throw SchemaError(std::string("model: '") + name + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(std::string("model: '") + name + "' is not finite");
  return d;
}

std::vector<double> numbers(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_array()) throw SchemaError(std::string("model: '") + name + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw SchemaError(std::string("model: '") + name + "' holds a non-number");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

std::string save_model(const EnrModel& model) {
  model.validate();
  Json j;
  j["schema_version"] = kModelSchemaVersion;
  j["feature_names"] = model.feature_names;
  j["means"] = model.standardizer.means;
  j["stds"] = model.standardizer.stds;
  j["weights"] = model.weights;
  j["intercept"] = model.intercept;
  j["lambda"] = model.lambda;
  j["alpha"] = model.alpha;
  return j.dump(2) + "\n";
}

EnrModel load_model(const std::string& document) {
  Json j;
  try {
    j = Json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("model: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("model: document is not an object");
  const Json& version = field(j, "schema_version");
  if (!version.is_number_integer() || version.get<long long>() != kModelSchemaVersion)
    throw SchemaError("model: unsupported schema_version " + version.dump());

  EnrModel m;
  const Json& names = field(j, "feature_names");
  if (!names.is_array()) throw SchemaError("model: 'feature_names' must be an array");
  for (const auto& n : names) {
    if (!n.is_string()) throw SchemaError("model: 'feature_names' holds a non-string");
    m.feature_names.push_back(n.get<std::string>());
  }
  m.standardizer.means = numbers(j, "means");
  m.standardizer.stds = numbers(j, "stds");
  m.weights = numbers(j, "weights");
  m.intercept = number(j, "intercept");
  m.lambda = number(j, "lambda");
  m.alpha = number(j, "alpha");
  m.validate();
  return m;
}

void save_model_file(const std::string& path, const EnrModel& model) {
  const std::string doc = save_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << doc;
}

EnrModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open model '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

}  // namespace slsoh
