#include "dkdv/experiments/schema.hpp"

#include <fstream>

#include "dkdv/error.hpp"

namespace dkdv::experiments {

using nlohmann::json;

namespace {

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  throw ConfigError("schema uses unknown type '" + t + "'");
}

void check(const json& schema, const json& v, const std::string& ptr,
           std::vector<std::string>& errors) {
  const std::string where = ptr.empty() ? "/" : ptr;
  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = has_type(v, it->get<std::string>());
    } else {
      for (const json& t : *it) ok = ok || has_type(v, t.get<std::string>());
    }
    if (!ok) {
      errors.push_back(where + ": expected type " + it->dump());
      return;
    }
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const json& e : *it) found = found || e == v;
    if (!found) errors.push_back(where + ": value " + v.dump() + " not in " + it->dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>()) {
      errors.push_back(where + ": below minimum " + it->dump());
    }
    if (auto it = schema.find("maximum"); it != schema.end() && x > it->get<double>()) {
      errors.push_back(where + ": above maximum " + it->dump());
    }
  }
  if (v.is_object()) {
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const json& k : *it) {
        if (!v.contains(k.get<std::string>())) {
          errors.push_back(where + ": missing required property '" + k.get<std::string>() + "'");
        }
      }
    }
    const json* props = nullptr;
    if (auto it = schema.find("properties"); it != schema.end()) props = &*it;
    const auto extra = schema.find("additionalProperties");
    for (auto it = v.begin(); it != v.end(); ++it) {
      const std::string child = ptr + "/" + it.key();
      if (props != nullptr && props->contains(it.key())) {
        check((*props)[it.key()], *it, child, errors);
      } else if (extra != schema.end()) {
        if (extra->is_boolean() && !extra->get<bool>()) {
          errors.push_back(child + ": property not allowed");
        } else if (extra->is_object()) {
          check(*extra, *it, child, errors);
        }
      }
    }
  }
  if (v.is_array()) {
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        check(*it, v[i], ptr + "/" + std::to_string(i), errors);
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate_against_schema(const json& schema, const json& doc) {
  std::vector<std::string> errors;
  check(schema, doc, "", errors);
  return errors;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace dkdv::experiments
