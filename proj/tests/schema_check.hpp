#pragma once

// Validator for the JSON Schema subset used in schemas/: type, enum,
// required, properties, additionalProperties (bool), items, minItems,
// minimum, exclusiveMinimum.

#include <string>
#include <vector>

#include <json.hpp>

namespace schema_check {

using Json = nlohmann::ordered_json;

inline bool has_type(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  return false;
}

inline void validate(const Json& schema, const Json& v, const std::string& path,
                     std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || has_type(v, t.get<std::string>());
    } else {
      ok = has_type(v, schema["type"].get<std::string>());
    }
    if (!ok) {
      errors.push_back(path + ": wrong type");
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"]) ok = ok || e == v;
    if (!ok) errors.push_back(path + ": not in enum");
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
      errors.push_back(path + ": below minimum");
    }
    if (schema.contains("exclusiveMinimum") && !(x > schema["exclusiveMinimum"].get<double>())) {
      errors.push_back(path + ": not above exclusiveMinimum");
    }
  }
  if (v.is_object()) {
    for (const auto& r : schema.value("required", Json::array())) {
      if (!v.contains(r.get<std::string>())) errors.push_back(path + ": missing " + r.get<std::string>());
    }
    const Json props = schema.value("properties", Json::object());
    for (const auto& [key, value] : v.items()) {
      if (props.contains(key)) {
        validate(props[key], value, path + "." + key, errors);
      } else if (schema.contains("additionalProperties") && !schema["additionalProperties"].get<bool>()) {
        errors.push_back(path + ": unexpected " + key);
      }
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
      errors.push_back(path + ": too few items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        validate(schema["items"], v[i], path + "[" + std::to_string(i) + "]", errors);
      }
    }
  }
}

inline std::vector<std::string> validate(const Json& schema, const Json& v) {
  std::vector<std::string> errors;
  validate(schema, v, "$", errors);
  return errors;
}

}  // namespace schema_check
