#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace bbo {

using Rng = std::mt19937_64;
using Json = nlohmann::ordered_json;

/// A parameter value: integers for int parameters, reals for float
/// parameters, and any of the three for ordinal levels / categorical choices.
using Value = std::variant<std::int64_t, double, std::string>;

std::string to_string(const Value& v);

enum class ParamKind { Float, Int, Ordinal, Categorical };

/// Categorical encoding used when mapping configurations to the unit cube.
enum class Encoding { OneHot, Index };

const char* to_string(ParamKind kind);

class ParameterSpec {
public:
    static ParameterSpec real(std::string name, double low, double high, bool log_scale = false,
                              std::optional<double> default_value = std::nullopt);
    static ParameterSpec integer(std::string name, std::int64_t low, std::int64_t high,
                                 bool log_scale = false,
                                 std::optional<std::int64_t> default_value = std::nullopt);
    static ParameterSpec ordinal(std::string name, std::vector<Value> levels,
                                 std::optional<Value> default_value = std::nullopt);
    static ParameterSpec categorical(std::string name, std::vector<Value> choices,
                                     std::optional<Value> default_value = std::nullopt);

    const std::string& name() const { return name_; }
    ParamKind kind() const { return kind_; }
    double low() const { return low_; }
    double high() const { return high_; }
    bool log_scale() const { return log_scale_; }
    /// Levels (ordinal) or choices (categorical); empty for numeric kinds.
    const std::vector<Value>& items() const { return items_; }
    const std::optional<Value>& default_value() const { return default_; }

    bool is_numeric() const { return kind_ == ParamKind::Float || kind_ == ParamKind::Int; }
    bool contains(const Value& v) const;
    /// Position of v in the level/choice list, or -1.
    int index_of(const Value& v) const;
    /// Number of unit-cube coordinates this parameter occupies under an encoding.
    std::size_t width(Encoding enc) const;
    /// Number of distinct values for discrete kinds (0 for floats).
    std::uint64_t cardinality() const;

    /// Maps a valid value to [0,1] (numeric kinds, ordinal, categorical-index).
    double to_unit(const Value& v) const;
    /// Inverse of to_unit for a single coordinate, clamping to [0,1] first.
    Value from_unit(double u) const;

    Value sample(Rng& rng) const;

    friend bool operator==(const ParameterSpec&, const ParameterSpec&) = default;

private:
    ParameterSpec() = default;
    void validate() const;

    std::string name_;
    ParamKind kind_ = ParamKind::Float;
    double low_ = 0.0;
    double high_ = 1.0;
    bool log_scale_ = false;
    std::vector<Value> items_;
    std::optional<Value> default_;
};

class SearchSpace;

/// One point of a search space. Values are stored in the space's parameter order.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<std::pair<std::string, Value>> values)
        : values_(std::move(values)) {}

    const std::vector<std::pair<std::string, Value>>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    /// Throws InvalidConfigurationError for unknown names.
    const Value& at(const std::string& name) const;
    const Value* find(const std::string& name) const;
    double number(const std::string& name) const;

    friend bool operator==(const Configuration&, const Configuration&) = default;
    friend bool operator<(const Configuration& a, const Configuration& b) {
        return a.values_ < b.values_;
    }

private:
    std::vector<std::pair<std::string, Value>> values_;
};

class SearchSpace {
public:
    explicit SearchSpace(std::vector<ParameterSpec> parameters, std::uint64_t seed = 0);

    const std::vector<ParameterSpec>& parameters() const { return parameters_; }
    const ParameterSpec& parameter(std::size_t i) const { return parameters_.at(i); }
    std::size_t dimension() const { return parameters_.size(); }
    std::uint64_t seed() const { return seed_; }
    int index_of(const std::string& name) const;

    /// Length of encoded vectors under the given encoding.
    std::size_t encoded_size(Encoding enc) const;
    /// True when every parameter is int/ordinal/categorical.
    bool is_discrete() const;
    /// Product of discrete cardinalities, saturated at UINT64_MAX; 0 if any float.
    std::uint64_t cardinality() const;

    /// Reorders and type-checks a configuration against this space.
    /// Throws InvalidConfigurationError on unknown/missing names or bad values.
    Configuration validate(const Configuration& config) const;
    Configuration make(std::vector<std::pair<std::string, Value>> values) const;
    /// Default configuration: each parameter's default, else the center / first item.
    Configuration default_configuration() const;

    friend bool operator==(const SearchSpace&, const SearchSpace&) = default;

private:
    std::vector<ParameterSpec> parameters_;
    std::uint64_t seed_;
};

std::vector<Configuration> sample_random(const SearchSpace& space, std::size_t n, Rng& rng);
std::vector<Configuration> latin_hypercube(const SearchSpace& space, std::size_t n, Rng& rng);

Eigen::VectorXd to_unit_vector(const SearchSpace& space, const Configuration& config,
                               Encoding enc);
Configuration from_unit_vector(const SearchSpace& space, const Eigen::VectorXd& v, Encoding enc);

/// Every configuration of a discrete space in lexicographic index order.
std::vector<Configuration> enumerate_all(const SearchSpace& space);

// JSON (search-space file format).
Json value_to_json(const Value& v);
Value value_from_json(const Json& j);
Json parameter_to_json(const ParameterSpec& p);
/// Throws ParseError naming the offending field; unknown fields are rejected.
ParameterSpec parameter_from_json(const Json& j, const std::string& where = "parameter");
Json space_to_json(const SearchSpace& space);
/// Accepts {"parameters": [...], "seed"?}; unknown top-level fields are rejected.
SearchSpace space_from_json(const Json& j);
Json config_to_json(const Configuration& config);
/// With a space the values are coerced to the parameter types and validated.
Configuration config_from_json(const Json& j, const SearchSpace* space = nullptr);

} // namespace bbo
