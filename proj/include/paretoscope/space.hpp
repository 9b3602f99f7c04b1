#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "paretoscope/random.hpp"

namespace paretoscope {

/// A single parameter value: integers (int-range and exponent kinds),
/// booleans, or categorical labels.
using Value = std::variant<std::int64_t, bool, std::string>;

std::string to_string(const Value& v);
nlohmann::ordered_json to_json(const Value& v);
Value value_from_json(const nlohmann::ordered_json& j);

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t step = 1;
};

/// Powers base^e for e in [lo_exp, hi_exp].
struct Exponent {
  std::int64_t base = 2;
  std::int64_t lo_exp = 0;
  std::int64_t hi_exp = 0;
};

/// Ordered label list; encoded by declared index.
struct Categorical {
  std::vector<std::string> values;
};

struct Boolean {};

using ParameterKind = std::variant<IntRange, Exponent, Categorical, Boolean>;

/// One tunable parameter. The domain is a finite ordered list, so every
/// value has a domain index in [0, size()).
class ParameterDef {
 public:
  /// Validates the domain and the default; throws Error(invalid_input)
  /// naming the parameter on any violation. A missing default selects the
  /// first domain value.
  ParameterDef(std::string name, ParameterKind kind, std::optional<Value> default_value = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  const ParameterKind& kind() const noexcept { return kind_; }
  const Value& default_value() const noexcept { return default_; }

  std::uint64_t size() const noexcept { return size_; }
  Value value_at(std::uint64_t index) const;
  std::optional<std::uint64_t> index_of(const Value& v) const;
  bool contains(const Value& v) const { return index_of(v).has_value(); }

  /// Surrogate feature for the value at `index`.
  double feature_at(std::uint64_t index) const;

  const char* kind_name() const noexcept;

 private:
  std::string name_;
  ParameterKind kind_;
  Value default_;
  std::uint64_t size_ = 0;
};

struct Assignment {
  std::string name;
  Value value;

  auto operator<=>(const Assignment&) const = default;
};

/// A complete assignment, one entry per parameter in declaration order.
struct ConfigPoint {
  std::vector<Assignment> assignment;

  const Value* find(std::string_view name) const;
  auto operator<=>(const ConfigPoint&) const = default;
};

nlohmann::ordered_json to_json(const ConfigPoint& p);
ConfigPoint config_from_json(const nlohmann::ordered_json& j);

struct Cardinality {
  std::uint64_t count = 0;
  bool overflow = false;  // true when the product exceeds 2^63 - 1; count then saturates
};

/// Domain indices of a point, one per parameter.
using IndexVector = std::vector<std::uint64_t>;

class ParameterSpace {
 public:
  explicit ParameterSpace(std::vector<ParameterDef> params);

  const std::vector<ParameterDef>& params() const noexcept { return params_; }
  std::size_t dimension() const noexcept { return params_.size(); }
  const ParameterDef* find(std::string_view name) const;

  Cardinality cardinality() const;

  /// Throws Error(invalid_input) when the point does not belong to this space.
  void validate(const ConfigPoint& point) const;
  bool contains(const ConfigPoint& point) const;

  ConfigPoint default_point() const;
  ConfigPoint sample_uniform(RandomStream& rng) const;
  std::vector<double> encode(const ConfigPoint& point) const;

  /// Points one domain step away in exactly one parameter.
  std::vector<ConfigPoint> neighbors(const ConfigPoint& point) const;

  IndexVector indices_of(const ConfigPoint& point) const;
  ConfigPoint point_at(const IndexVector& indices) const;
  std::vector<double> encode_indices(const IndexVector& indices) const;
  IndexVector sample_indices(RandomStream& rng) const;
  std::vector<IndexVector> neighbor_indices(const IndexVector& indices) const;

  /// Every point in lexicographic index order. Only sensible for small spaces.
  std::vector<IndexVector> enumerate() const;

 private:
  std::vector<ParameterDef> params_;
};

/// Parses the parameter-space JSON document (object: name -> descriptor).
ParameterSpace parse_space(const nlohmann::ordered_json& document);
ParameterSpace parse_space_text(const std::string& text);
ParameterSpace load_space(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ParameterSpace& space);

}  // namespace paretoscope
