#include "paretoscope/space.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "paretoscope/error.hpp"

namespace paretoscope {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr std::uint64_t kMaxCount = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());

Error param_error(const std::string& name, const std::string& what) {
  return invalid_input("parameter '" + name + "': " + what);
}

std::int64_t checked_power(std::int64_t base, std::int64_t exp, const std::string& name) {
  __int128 v = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    v *= base;
    if (v > std::numeric_limits<std::int64_t>::max()) throw param_error(name, "exponent domain exceeds 64-bit range");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

std::string to_string(const Value& v) {
  return std::visit(overloaded{[](std::int64_t i) { return std::to_string(i); },
                               [](bool b) { return std::string(b ? "true" : "false"); },
                               [](const std::string& s) { return s; }},
                    v);
}

nlohmann::ordered_json to_json(const Value& v) {
  return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, v);
}

Value value_from_json(const nlohmann::ordered_json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  throw invalid_input("parameter value must be an integer, boolean or string, got " + j.dump());
}

// ---------------------------------------------------------------------------
// ParameterDef

ParameterDef::ParameterDef(std::string name, ParameterKind kind, std::optional<Value> default_value)
    : name_(std::move(name)), kind_(std::move(kind)) {
  if (name_.empty()) throw invalid_input("parameter name must be nonempty");
  std::visit(overloaded{
                 [&](const IntRange& r) {
                   if (r.step < 1) throw param_error(name_, "step must be >= 1");
                   if (r.lo > r.hi) throw param_error(name_, "empty domain (lo > hi)");
                   const __int128 span = static_cast<__int128>(r.hi) - r.lo;
                   size_ = static_cast<std::uint64_t>(span / r.step) + 1;
                 },
                 [&](const Exponent& e) {
                   if (e.base < 2) throw param_error(name_, "base must be >= 2");
                   if (e.lo_exp < 0) throw param_error(name_, "lo_exp must be >= 0");
                   if (e.lo_exp > e.hi_exp) throw param_error(name_, "empty domain (lo_exp > hi_exp)");
                   checked_power(e.base, e.hi_exp, name_);
                   size_ = static_cast<std::uint64_t>(e.hi_exp - e.lo_exp) + 1;
                 },
                 [&](const Categorical& c) {
                   if (c.values.empty()) throw param_error(name_, "empty domain (no categorical values)");
                   std::set<std::string> seen;
                   for (const auto& v : c.values)
                     if (!seen.insert(v).second) throw param_error(name_, "duplicate categorical value '" + v + "'");
                   size_ = c.values.size();
                 },
                 [&](const Boolean&) { size_ = 2; },
             },
             kind_);
  if (default_value) {
    if (!contains(*default_value))
      throw param_error(name_, "default " + to_string(*default_value) + " is outside the domain");
    default_ = *default_value;
  } else {
    default_ = value_at(0);
  }
}

Value ParameterDef::value_at(std::uint64_t index) const {
  return std::visit(overloaded{
                        [&](const IntRange& r) -> Value { return r.lo + static_cast<std::int64_t>(index) * r.step; },
                        [&](const Exponent& e) -> Value {
                          return checked_power(e.base, e.lo_exp + static_cast<std::int64_t>(index), name_);
                        },
                        [&](const Categorical& c) -> Value { return c.values.at(index); },
                        [&](const Boolean&) -> Value { return index != 0; },
                    },
                    kind_);
}

std::optional<std::uint64_t> ParameterDef::index_of(const Value& v) const {
  return std::visit(
      overloaded{
          [&](const IntRange& r) -> std::optional<std::uint64_t> {
            const auto* i = std::get_if<std::int64_t>(&v);
            if (!i || *i < r.lo || *i > r.hi) return std::nullopt;
            const __int128 off = static_cast<__int128>(*i) - r.lo;
            if (off % r.step != 0) return std::nullopt;
            return static_cast<std::uint64_t>(off / r.step);
          },
          [&](const Exponent& e) -> std::optional<std::uint64_t> {
            const auto* i = std::get_if<std::int64_t>(&v);
            if (!i || *i < 1) return std::nullopt;
            std::int64_t x = *i;
            std::int64_t exp = 0;
            while (x % e.base == 0) {
              x /= e.base;
              ++exp;
            }
            if (x != 1 || exp < e.lo_exp || exp > e.hi_exp) return std::nullopt;
            return static_cast<std::uint64_t>(exp - e.lo_exp);
          },
          [&](const Categorical& c) -> std::optional<std::uint64_t> {
            const auto* s = std::get_if<std::string>(&v);
            if (!s) return std::nullopt;
            for (std::size_t k = 0; k < c.values.size(); ++k)
              if (c.values[k] == *s) return k;
            return std::nullopt;
          },
          [&](const Boolean&) -> std::optional<std::uint64_t> {
            const auto* b = std::get_if<bool>(&v);
            if (!b) return std::nullopt;
            return *b ? 1 : 0;
          },
      },
      kind_);
}

double ParameterDef::feature_at(std::uint64_t index) const {
  return std::visit(overloaded{
                        [&](const IntRange& r) {
                          return static_cast<double>(r.lo + static_cast<std::int64_t>(index) * r.step);
                        },
                        [&](const Exponent& e) { return static_cast<double>(e.lo_exp + static_cast<std::int64_t>(index)); },
                        [&](const auto&) { return static_cast<double>(index); },
                    },
                    kind_);
}

const char* ParameterDef::kind_name() const noexcept {
  return std::visit(overloaded{[](const IntRange&) { return "int"; }, [](const Exponent&) { return "exponent"; },
                               [](const Categorical&) { return "categorical"; },
                               [](const Boolean&) { return "bool"; }},
                    kind_);
}

// ---------------------------------------------------------------------------
// ConfigPoint

const Value* ConfigPoint::find(std::string_view name) const {
  for (const auto& a : assignment)
    if (a.name == name) return &a.value;
  return nullptr;
}

nlohmann::ordered_json to_json(const ConfigPoint& p) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& a : p.assignment) j[a.name] = to_json(a.value);
  return j;
}

ConfigPoint config_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw invalid_input("config point must be a JSON object");
  ConfigPoint p;
  for (const auto& [name, value] : j.items()) p.assignment.push_back({name, value_from_json(value)});
  return p;
}

// ---------------------------------------------------------------------------
// ParameterSpace

ParameterSpace::ParameterSpace(std::vector<ParameterDef> params) : params_(std::move(params)) {
  if (params_.empty()) throw invalid_input("parameter space must declare at least one parameter");
  std::set<std::string> names;
  for (const auto& p : params_)
    if (!names.insert(p.name()).second) throw invalid_input("duplicate parameter name '" + p.name() + "'");
}

const ParameterDef* ParameterSpace::find(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name() == name) return &p;
  return nullptr;
}

Cardinality ParameterSpace::cardinality() const {
  Cardinality c{1, false};
  for (const auto& p : params_) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(c.count) * p.size();
    if (prod > kMaxCount) return {kMaxCount, true};
    c.count = static_cast<std::uint64_t>(prod);
  }
  return c;
}

void ParameterSpace::validate(const ConfigPoint& point) const {
  if (point.assignment.size() != params_.size())
    throw invalid_input("config point has " + std::to_string(point.assignment.size()) + " values, space declares " +
                        std::to_string(params_.size()));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = point.assignment[i];
    if (a.name != params_[i].name())
      throw invalid_input("config point entry " + std::to_string(i) + " is '" + a.name + "', expected '" +
                          params_[i].name() + "'");
    if (!params_[i].contains(a.value))
      throw param_error(a.name, "value " + to_string(a.value) + " is outside the domain");
  }
}

bool ParameterSpace::contains(const ConfigPoint& point) const {
  try {
    validate(point);
    return true;
  } catch (const Error&) {
    return false;
  }
}

ConfigPoint ParameterSpace::default_point() const {
  ConfigPoint p;
  for (const auto& d : params_) p.assignment.push_back({d.name(), d.default_value()});
  return p;
}

IndexVector ParameterSpace::indices_of(const ConfigPoint& point) const {
  validate(point);
  IndexVector idx(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) idx[i] = *params_[i].index_of(point.assignment[i].value);
  return idx;
}

ConfigPoint ParameterSpace::point_at(const IndexVector& indices) const {
  if (indices.size() != params_.size()) throw invalid_input("index vector dimension mismatch");
  ConfigPoint p;
  p.assignment.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (indices[i] >= params_[i].size()) throw param_error(params_[i].name(), "domain index out of range");
    p.assignment.push_back({params_[i].name(), params_[i].value_at(indices[i])});
  }
  return p;
}

std::vector<double> ParameterSpace::encode_indices(const IndexVector& indices) const {
  std::vector<double> x(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) x[i] = params_[i].feature_at(indices[i]);
  return x;
}

std::vector<double> ParameterSpace::encode(const ConfigPoint& point) const { return encode_indices(indices_of(point)); }

IndexVector ParameterSpace::sample_indices(RandomStream& rng) const {
  IndexVector idx(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) idx[i] = rng.uniform_index(params_[i].size());
  return idx;
}

ConfigPoint ParameterSpace::sample_uniform(RandomStream& rng) const { return point_at(sample_indices(rng)); }

std::vector<IndexVector> ParameterSpace::neighbor_indices(const IndexVector& indices) const {
  std::vector<IndexVector> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (indices[i] > 0) {
      auto n = indices;
      --n[i];
      out.push_back(std::move(n));
    }
    if (indices[i] + 1 < params_[i].size()) {
      auto n = indices;
      ++n[i];
      out.push_back(std::move(n));
    }
  }
  return out;
}

std::vector<ConfigPoint> ParameterSpace::neighbors(const ConfigPoint& point) const {
  std::vector<ConfigPoint> out;
  for (const auto& n : neighbor_indices(indices_of(point))) out.push_back(point_at(n));
  return out;
}

std::vector<IndexVector> ParameterSpace::enumerate() const {
  std::vector<IndexVector> out;
  IndexVector idx(params_.size(), 0);
  while (true) {
    out.push_back(idx);
    std::size_t i = params_.size();
    while (i > 0) {
      --i;
      if (++idx[i] < params_[i].size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

// ---------------------------------------------------------------------------
// Document parsing

namespace {

std::int64_t int_field(const nlohmann::ordered_json& d, const std::string& pname, const char* key,
                       std::optional<std::int64_t> fallback = std::nullopt) {
  if (!d.contains(key)) {
    if (fallback) return *fallback;
    throw param_error(pname, std::string("missing field '") + key + "'");
  }
  const auto& v = d.at(key);
  if (!v.is_number_integer()) throw param_error(pname, std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

ParameterDef parse_param(const std::string& name, const nlohmann::ordered_json& d) {
  if (!d.is_object()) throw param_error(name, "descriptor must be a JSON object");
  if (!d.contains("kind") || !d.at("kind").is_string()) throw param_error(name, "missing string field 'kind'");
  const auto kind = d.at("kind").get<std::string>();

  static const std::set<std::string> kCommon = {"kind", "default", "description"};
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : d.items()) {
      if (kCommon.count(key)) continue;
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw param_error(name, "unknown field '" + key + "' for kind '" + kind + "'");
    }
  };

  std::optional<Value> def;
  if (d.contains("default")) {
    try {
      def = value_from_json(d.at("default"));
    } catch (const Error&) {
      throw param_error(name, "default must be an integer, boolean or string");
    }
  }

  if (kind == "int") {
    check_keys({"lo", "hi", "step"});
    return ParameterDef(name, IntRange{int_field(d, name, "lo"), int_field(d, name, "hi"), int_field(d, name, "step", 1)},
                        def);
  }
  if (kind == "exponent") {
    check_keys({"base", "lo_exp", "hi_exp"});
    return ParameterDef(
        name, Exponent{int_field(d, name, "base", 2), int_field(d, name, "lo_exp"), int_field(d, name, "hi_exp")}, def);
  }
  if (kind == "categorical") {
    check_keys({"values"});
    if (!d.contains("values") || !d.at("values").is_array()) throw param_error(name, "missing array field 'values'");
    Categorical c;
    for (const auto& v : d.at("values")) {
      if (!v.is_string()) throw param_error(name, "categorical values must be strings");
      c.values.push_back(v.get<std::string>());
    }
    return ParameterDef(name, std::move(c), def);
  }
  if (kind == "bool") {
    check_keys({});
    return ParameterDef(name, Boolean{}, def);
  }
  throw param_error(name, "unknown kind '" + kind + "' (expected int, exponent, categorical or bool)");
}

}  // namespace

ParameterSpace parse_space(const nlohmann::ordered_json& document) {
  if (!document.is_object()) throw invalid_input("parameter-space document must be a JSON object");
  // Duplicate keys are already merged by the JSON parser; parse_space_text catches them.
  std::vector<ParameterDef> params;
  for (const auto& [name, descriptor] : document.items()) params.push_back(parse_param(name, descriptor));
  return ParameterSpace(std::move(params));
}

ParameterSpace parse_space_text(const std::string& text) {
  // Reject duplicate keys at the top level before the JSON library merges them.
  std::set<std::string> seen;
  std::string duplicate;
  auto callback = [&](int d, nlohmann::ordered_json::parse_event_t event, nlohmann::ordered_json& parsed) {
    using E = nlohmann::ordered_json::parse_event_t;
    if (event == E::key && d == 1 && parsed.is_string()) {
      const auto key = parsed.get<std::string>();
      if (!seen.insert(key).second && duplicate.empty()) duplicate = key;
    }
    return true;
  };
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text, callback);
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_input(std::string("malformed parameter-space document: ") + e.what());
  }
  if (!duplicate.empty()) throw invalid_input("duplicate parameter name '" + duplicate + "'");
  return parse_space(doc);
}

ParameterSpace load_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot read parameter-space document " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_space_text(ss.str());
}

nlohmann::ordered_json to_json(const ParameterSpace& space) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& p : space.params()) {
    nlohmann::ordered_json d;
    d["kind"] = p.kind_name();
    std::visit(overloaded{
                   [&](const IntRange& r) {
                     d["lo"] = r.lo;
                     d["hi"] = r.hi;
                     d["step"] = r.step;
                   },
                   [&](const Exponent& e) {
                     d["base"] = e.base;
                     d["lo_exp"] = e.lo_exp;
                     d["hi_exp"] = e.hi_exp;
                   },
                   [&](const Categorical& c) { d["values"] = c.values; },
                   [&](const Boolean&) {},
               },
               p.kind());
    d["default"] = to_json(p.default_value());
    doc[p.name()] = std::move(d);
  }
  return doc;
}

}  // namespace paretoscope
