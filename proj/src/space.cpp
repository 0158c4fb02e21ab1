#include "bbo/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "bbo/errors.hpp"

namespace bbo {

namespace {

std::optional<double> as_number(const Value& v)
{
    if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

// Numeric values compare by value across int/double; strings compare exactly.
bool same_value(const Value& a, const Value& b)
{
    auto na = as_number(a);
    auto nb = as_number(b);
    if (na && nb) return *na == *nb;
    if (na || nb) return false;
    return std::get<std::string>(a) == std::get<std::string>(b);
}

std::size_t round_half_up_index(double u, std::size_t count)
{
    double r = std::floor(u * static_cast<double>(count - 1) + 0.5);
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(count - 1)));
}

} // namespace

std::string to_string(const Value& v)
{
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) return x;
            else if constexpr (std::is_same_v<T, double>) return fmt::format("{}", x);
            else return std::to_string(x);
        },
        v);
}

const char* to_string(ParamKind kind)
{
    switch (kind) {
    case ParamKind::Float: return "float";
    case ParamKind::Int: return "int";
    case ParamKind::Ordinal: return "ordinal";
    case ParamKind::Categorical: return "categorical";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ParameterSpec

ParameterSpec ParameterSpec::real(std::string name, double low, double high, bool log_scale,
                                  std::optional<double> default_value)
{
    ParameterSpec p;
    p.name_ = std::move(name);
    p.kind_ = ParamKind::Float;
    p.low_ = low;
    p.high_ = high;
    p.log_scale_ = log_scale;
    if (default_value) p.default_ = *default_value;
    p.validate();
    return p;
}

ParameterSpec ParameterSpec::integer(std::string name, std::int64_t low, std::int64_t high,
                                     bool log_scale, std::optional<std::int64_t> default_value)
{
    ParameterSpec p;
    p.name_ = std::move(name);
    p.kind_ = ParamKind::Int;
    p.low_ = static_cast<double>(low);
    p.high_ = static_cast<double>(high);
    p.log_scale_ = log_scale;
    if (default_value) p.default_ = *default_value;
    p.validate();
    return p;
}

ParameterSpec ParameterSpec::ordinal(std::string name, std::vector<Value> levels,
                                     std::optional<Value> default_value)
{
    ParameterSpec p;
    p.name_ = std::move(name);
    p.kind_ = ParamKind::Ordinal;
    p.items_ = std::move(levels);
    p.default_ = std::move(default_value);
    p.validate();
    return p;
}

ParameterSpec ParameterSpec::categorical(std::string name, std::vector<Value> choices,
                                         std::optional<Value> default_value)
{
    ParameterSpec p;
    p.name_ = std::move(name);
    p.kind_ = ParamKind::Categorical;
    p.items_ = std::move(choices);
    p.default_ = std::move(default_value);
    p.validate();
    return p;
}

void ParameterSpec::validate() const
{
    if (name_.empty()) throw InvalidSpaceError("parameter name must be non-empty");
    auto fail = [&](const std::string& why) {
        throw InvalidSpaceError(fmt::format("parameter '{}': {}", name_, why));
    };
    if (is_numeric()) {
        if (!std::isfinite(low_) || !std::isfinite(high_)) fail("bounds must be finite");
        if (!(low_ < high_)) fail("low must be < high");
        if (log_scale_ && !(low_ > 0.0)) fail("log scale requires low > 0");
    } else {
        const char* what = kind_ == ParamKind::Ordinal ? "levels" : "choices";
        if (items_.size() < 2) fail(fmt::format("needs at least two {}", what));
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (auto d = std::get_if<double>(&items_[i]); d && !std::isfinite(*d))
                fail(fmt::format("{} must be finite", what));
            for (std::size_t j = 0; j < i; ++j)
                if (same_value(items_[i], items_[j])) fail(fmt::format("duplicate {}", what));
        }
    }
    if (default_ && !contains(*default_)) fail("default out of range");
}

bool ParameterSpec::contains(const Value& v) const
{
    switch (kind_) {
    case ParamKind::Float: {
        auto x = as_number(v);
        return x && *x >= low_ && *x <= high_;
    }
    case ParamKind::Int: {
        auto x = as_number(v);
        return x && std::floor(*x) == *x && *x >= low_ && *x <= high_;
    }
    default: return index_of(v) >= 0;
    }
}

int ParameterSpec::index_of(const Value& v) const
{
    for (std::size_t i = 0; i < items_.size(); ++i)
        if (same_value(items_[i], v)) return static_cast<int>(i);
    return -1;
}

std::size_t ParameterSpec::width(Encoding enc) const
{
    if (kind_ == ParamKind::Categorical && enc == Encoding::OneHot) return items_.size();
    return 1;
}

std::uint64_t ParameterSpec::cardinality() const
{
    switch (kind_) {
    case ParamKind::Float: return 0;
    case ParamKind::Int: return static_cast<std::uint64_t>(high_ - low_) + 1;
    default: return items_.size();
    }
}

double ParameterSpec::to_unit(const Value& v) const
{
    if (is_numeric()) {
        auto x = as_number(v);
        if (!x) throw InvalidConfigurationError(fmt::format("'{}' expects a number", name_));
        if (log_scale_)
            return (std::log10(*x) - std::log10(low_)) / (std::log10(high_) - std::log10(low_));
        return (*x - low_) / (high_ - low_);
    }
    int idx = index_of(v);
    if (idx < 0)
        throw InvalidConfigurationError(
            fmt::format("'{}' has no level/choice {}", name_, bbo::to_string(v)));
    return static_cast<double>(idx) / static_cast<double>(items_.size() - 1);
}

Value ParameterSpec::from_unit(double u) const
{
    if (std::isnan(u)) u = 0.0;
    u = std::clamp(u, 0.0, 1.0);
    if (is_numeric()) {
        double x;
        if (log_scale_) {
            double lo = std::log10(low_), hi = std::log10(high_);
            x = std::pow(10.0, lo + u * (hi - lo));
        } else {
            x = low_ + u * (high_ - low_);
        }
        x = std::clamp(x, low_, high_);
        if (kind_ == ParamKind::Float) return x;
        return static_cast<std::int64_t>(std::clamp(std::floor(x + 0.5), low_, high_));
    }
    return items_[round_half_up_index(u, items_.size())];
}

Value ParameterSpec::sample(Rng& rng) const
{
    switch (kind_) {
    case ParamKind::Float: {
        if (log_scale_) {
            std::uniform_real_distribution<double> dist(std::log10(low_), std::log10(high_));
            return std::clamp(std::pow(10.0, dist(rng)), low_, high_);
        }
        std::uniform_real_distribution<double> dist(low_, high_);
        return std::clamp(dist(rng), low_, high_);
    }
    case ParamKind::Int: {
        if (log_scale_) {
            std::uniform_real_distribution<double> dist(std::log10(low_), std::log10(high_));
            double x = std::floor(std::pow(10.0, dist(rng)) + 0.5);
            return static_cast<std::int64_t>(std::clamp(x, low_, high_));
        }
        std::uniform_int_distribution<std::int64_t> dist(static_cast<std::int64_t>(low_),
                                                         static_cast<std::int64_t>(high_));
        return dist(rng);
    }
    default: {
        std::uniform_int_distribution<std::size_t> dist(0, items_.size() - 1);
        return items_[dist(rng)];
    }
    }
}

// ---------------------------------------------------------------------------
// Configuration

const Value* Configuration::find(const std::string& name) const
{
    for (const auto& [k, v] : values_)
        if (k == name) return &v;
    return nullptr;
}

const Value& Configuration::at(const std::string& name) const
{
    if (auto v = find(name)) return *v;
    throw InvalidConfigurationError(fmt::format("unknown parameter '{}'", name));
}

double Configuration::number(const std::string& name) const
{
    auto x = as_number(at(name));
    if (!x) throw InvalidConfigurationError(fmt::format("parameter '{}' is not numeric", name));
    return *x;
}

// ---------------------------------------------------------------------------
// SearchSpace

SearchSpace::SearchSpace(std::vector<ParameterSpec> parameters, std::uint64_t seed)
    : parameters_(std::move(parameters)), seed_(seed)
{
    if (parameters_.empty()) throw InvalidSpaceError("search space needs at least one parameter");
    std::set<std::string> names;
    for (const auto& p : parameters_)
        if (!names.insert(p.name()).second)
            throw InvalidSpaceError(fmt::format("duplicate parameter name '{}'", p.name()));
}

int SearchSpace::index_of(const std::string& name) const
{
    for (std::size_t i = 0; i < parameters_.size(); ++i)
        if (parameters_[i].name() == name) return static_cast<int>(i);
    return -1;
}

std::size_t SearchSpace::encoded_size(Encoding enc) const
{
    std::size_t n = 0;
    for (const auto& p : parameters_) n += p.width(enc);
    return n;
}

bool SearchSpace::is_discrete() const
{
    return std::none_of(parameters_.begin(), parameters_.end(),
                        [](const auto& p) { return p.kind() == ParamKind::Float; });
}

std::uint64_t SearchSpace::cardinality() const
{
    if (!is_discrete()) return 0;
    std::uint64_t total = 1;
    for (const auto& p : parameters_) {
        std::uint64_t c = p.cardinality();
        if (total > std::numeric_limits<std::uint64_t>::max() / c)
            return std::numeric_limits<std::uint64_t>::max();
        total *= c;
    }
    return total;
}

Configuration SearchSpace::validate(const Configuration& config) const
{
    if (config.size() != parameters_.size()) {
        for (const auto& [name, v] : config.values())
            if (index_of(name) < 0)
                throw InvalidConfigurationError(fmt::format("unknown parameter '{}'", name));
        throw InvalidConfigurationError(fmt::format(
            "configuration has {} values, space has {} parameters", config.size(),
            parameters_.size()));
    }
    std::vector<std::pair<std::string, Value>> out;
    out.reserve(parameters_.size());
    for (const auto& p : parameters_) {
        const Value* v = config.find(p.name());
        if (!v) throw InvalidConfigurationError(fmt::format("missing parameter '{}'", p.name()));
        if (!p.contains(*v))
            throw InvalidConfigurationError(
                fmt::format("value {} out of range for '{}'", bbo::to_string(*v), p.name()));
        switch (p.kind()) {
        case ParamKind::Float: out.emplace_back(p.name(), *as_number(*v)); break;
        case ParamKind::Int:
            out.emplace_back(p.name(), static_cast<std::int64_t>(*as_number(*v)));
            break;
        default: out.emplace_back(p.name(), p.items()[p.index_of(*v)]); break;
        }
    }
    return Configuration(std::move(out));
}

Configuration SearchSpace::make(std::vector<std::pair<std::string, Value>> values) const
{
    return validate(Configuration(std::move(values)));
}

Configuration SearchSpace::default_configuration() const
{
    std::vector<std::pair<std::string, Value>> out;
    for (const auto& p : parameters_) {
        if (p.default_value()) out.emplace_back(p.name(), *p.default_value());
        else if (p.is_numeric()) out.emplace_back(p.name(), p.from_unit(0.5));
        else out.emplace_back(p.name(), p.items().front());
    }
    return validate(Configuration(std::move(out)));
}

// ---------------------------------------------------------------------------
// Sampling and encoding

std::vector<Configuration> sample_random(const SearchSpace& space, std::size_t n, Rng& rng)
{
    std::vector<Configuration> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<std::string, Value>> values;
        values.reserve(space.dimension());
        for (const auto& p : space.parameters()) values.emplace_back(p.name(), p.sample(rng));
        out.emplace_back(std::move(values));
    }
    return out;
}

std::vector<Configuration> latin_hypercube(const SearchSpace& space, std::size_t n, Rng& rng)
{
    const std::size_t d = space.dimension();
    std::vector<std::vector<Value>> columns(d);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        const auto& p = space.parameter(j);
        columns[j].reserve(n);
        if (p.is_numeric()) {
            std::vector<std::size_t> strata(n);
            std::iota(strata.begin(), strata.end(), 0);
            std::shuffle(strata.begin(), strata.end(), rng);
            for (std::size_t i = 0; i < n; ++i) {
                double u = (static_cast<double>(strata[i]) + unit(rng)) / static_cast<double>(n);
                columns[j].push_back(p.from_unit(std::min(u, std::nextafter(1.0, 0.0))));
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) columns[j].push_back(p.sample(rng));
        }
    }
    std::vector<Configuration> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<std::string, Value>> values;
        for (std::size_t j = 0; j < d; ++j)
            values.emplace_back(space.parameter(j).name(), columns[j][i]);
        out.emplace_back(std::move(values));
    }
    return out;
}

Eigen::VectorXd to_unit_vector(const SearchSpace& space, const Configuration& config,
                               Encoding enc)
{
    for (const auto& [name, v] : config.values())
        if (space.index_of(name) < 0)
            throw InvalidConfigurationError(fmt::format("unknown parameter '{}'", name));
    Eigen::VectorXd out(static_cast<Eigen::Index>(space.encoded_size(enc)));
    Eigen::Index k = 0;
    for (const auto& p : space.parameters()) {
        const Value& v = config.at(p.name());
        if (p.kind() == ParamKind::Categorical && enc == Encoding::OneHot) {
            int idx = p.index_of(v);
            if (idx < 0)
                throw InvalidConfigurationError(
                    fmt::format("'{}' has no choice {}", p.name(), bbo::to_string(v)));
            for (std::size_t c = 0; c < p.items().size(); ++c)
                out[k++] = static_cast<int>(c) == idx ? 1.0 : 0.0;
        } else {
            out[k++] = p.to_unit(v);
        }
    }
    return out;
}

Configuration from_unit_vector(const SearchSpace& space, const Eigen::VectorXd& v, Encoding enc)
{
    if (static_cast<std::size_t>(v.size()) != space.encoded_size(enc))
        throw EncodingError(fmt::format("vector length {} does not match encoded size {}",
                                        v.size(), space.encoded_size(enc)));
    std::vector<std::pair<std::string, Value>> values;
    values.reserve(space.dimension());
    Eigen::Index k = 0;
    for (const auto& p : space.parameters()) {
        if (p.kind() == ParamKind::Categorical && enc == Encoding::OneHot) {
            std::size_t best = 0;
            double best_val = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < p.items().size(); ++c) {
                double x = std::clamp(v[k + static_cast<Eigen::Index>(c)], 0.0, 1.0);
                if (x > best_val) {
                    best_val = x;
                    best = c;
                }
            }
            k += static_cast<Eigen::Index>(p.items().size());
            values.emplace_back(p.name(), p.items()[best]);
        } else {
            values.emplace_back(p.name(), p.from_unit(v[k++]));
        }
    }
    return Configuration(std::move(values));
}

std::vector<Configuration> enumerate_all(const SearchSpace& space)
{
    constexpr std::uint64_t kLimit = 10'000'000;
    std::uint64_t total = space.cardinality();
    if (total == 0) throw InvalidSpaceError("cannot enumerate a space with float parameters");
    if (total > kLimit) throw InvalidSpaceError("space too large to enumerate");
    const std::size_t d = space.dimension();
    std::vector<std::uint64_t> digit(d, 0);
    std::vector<Configuration> out;
    out.reserve(total);
    for (std::uint64_t n = 0; n < total; ++n) {
        std::vector<std::pair<std::string, Value>> values;
        for (std::size_t j = 0; j < d; ++j) {
            const auto& p = space.parameter(j);
            if (p.kind() == ParamKind::Int)
                values.emplace_back(p.name(), static_cast<std::int64_t>(p.low()) +
                                                  static_cast<std::int64_t>(digit[j]));
            else
                values.emplace_back(p.name(), p.items()[digit[j]]);
        }
        out.emplace_back(std::move(values));
        for (std::size_t j = d; j-- > 0;) {
            if (++digit[j] < space.parameter(j).cardinality()) break;
            digit[j] = 0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

Json value_to_json(const Value& v)
{
    return std::visit([](const auto& x) { return Json(x); }, v);
}

Value value_from_json(const Json& j)
{
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    throw ParseError(fmt::format("expected a number or string, got {}", j.type_name()));
}

Json parameter_to_json(const ParameterSpec& p)
{
    Json j;
    j["name"] = p.name();
    j["type"] = to_string(p.kind());
    if (p.kind() == ParamKind::Float) {
        j["low"] = p.low();
        j["high"] = p.high();
        j["log"] = p.log_scale();
    } else if (p.kind() == ParamKind::Int) {
        j["low"] = static_cast<std::int64_t>(p.low());
        j["high"] = static_cast<std::int64_t>(p.high());
        j["log"] = p.log_scale();
    } else {
        Json items = Json::array();
        for (const auto& v : p.items()) items.push_back(value_to_json(v));
        j[p.kind() == ParamKind::Ordinal ? "levels" : "choices"] = std::move(items);
    }
    if (p.default_value()) j["default"] = value_to_json(*p.default_value());
    return j;
}

ParameterSpec parameter_from_json(const Json& j, const std::string& where)
{
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    static const std::set<std::string> known = {"name", "type", "low", "high",
                                                "log", "levels", "choices", "default"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ParseError(fmt::format("{}: unknown field '{}'", where, key));
    auto require = [&](const char* key) -> const Json& {
        if (!j.contains(key)) throw ParseError(fmt::format("{}: missing field '{}'", where, key));
        return j.at(key);
    };
    auto forbid = [&](std::initializer_list<const char*> keys, const std::string& type) {
        for (const char* k : keys)
            if (j.contains(k))
                throw ParseError(fmt::format("{}: field '{}' not allowed for type '{}'", where, k,
                                             type));
    };
    const Json& name = require("name");
    const Json& type = require("type");
    if (!name.is_string()) throw ParseError(where + ".name: expected a string");
    if (!type.is_string()) throw ParseError(where + ".type: expected a string");
    const auto n = name.get<std::string>();
    const auto t = type.get<std::string>();
    bool log = false;
    if (j.contains("log")) {
        if (!j["log"].is_boolean()) throw ParseError(where + ".log: expected a boolean");
        log = j["log"].get<bool>();
    }
    try {
        if (t == "float") {
            forbid({"levels", "choices"}, t);
            const Json& lo = require("low");
            const Json& hi = require("high");
            if (!lo.is_number() || !hi.is_number())
                throw ParseError(where + ": low/high must be numbers");
            std::optional<double> def;
            if (j.contains("default")) {
                if (!j["default"].is_number())
                    throw ParseError(where + ".default: expected a number");
                def = j["default"].get<double>();
            }
            return ParameterSpec::real(n, lo.get<double>(), hi.get<double>(), log, def);
        }
        if (t == "int") {
            forbid({"levels", "choices"}, t);
            const Json& lo = require("low");
            const Json& hi = require("high");
            if (!lo.is_number_integer() || !hi.is_number_integer())
                throw ParseError(where + ": low/high must be integers");
            std::optional<std::int64_t> def;
            if (j.contains("default")) {
                if (!j["default"].is_number_integer())
                    throw ParseError(where + ".default: expected an integer");
                def = j["default"].get<std::int64_t>();
            }
            return ParameterSpec::integer(n, lo.get<std::int64_t>(), hi.get<std::int64_t>(), log,
                                          def);
        }
        if (t == "ordinal" || t == "categorical") {
            const char* list_key = t == "ordinal" ? "levels" : "choices";
            forbid({"low", "high", "log", t == "ordinal" ? "choices" : "levels"}, t);
            const Json& list = require(list_key);
            if (!list.is_array())
                throw ParseError(fmt::format("{}.{}: expected an array", where, list_key));
            std::vector<Value> items;
            for (std::size_t i = 0; i < list.size(); ++i) {
                try {
                    items.push_back(value_from_json(list[i]));
                } catch (const ParseError& e) {
                    throw ParseError(fmt::format("{}.{}[{}]: {}", where, list_key, i, e.what()));
                }
            }
            std::optional<Value> def;
            if (j.contains("default")) def = value_from_json(j["default"]);
            return t == "ordinal" ? ParameterSpec::ordinal(n, std::move(items), std::move(def))
                                  : ParameterSpec::categorical(n, std::move(items), std::move(def));
        }
    } catch (const InvalidSpaceError& e) {
        throw ParseError(fmt::format("{}: {}", where, e.what()));
    }
    throw ParseError(fmt::format("{}.type: unknown parameter type '{}'", where, t));
}

Json space_to_json(const SearchSpace& space)
{
    Json params = Json::array();
    for (const auto& p : space.parameters()) params.push_back(parameter_to_json(p));
    Json j;
    j["parameters"] = std::move(params);
    j["seed"] = space.seed();
    return j;
}

SearchSpace space_from_json(const Json& j)
{
    if (!j.is_object()) throw ParseError("search space: expected an object");
    for (const auto& [key, _] : j.items())
        if (key != "parameters" && key != "seed")
            throw ParseError(fmt::format("search space: unknown field '{}'", key));
    if (!j.contains("parameters") || !j["parameters"].is_array())
        throw ParseError("search space: 'parameters' must be an array");
    std::vector<ParameterSpec> params;
    const auto& arr = j["parameters"];
    for (std::size_t i = 0; i < arr.size(); ++i)
        params.push_back(parameter_from_json(arr[i], fmt::format("parameters[{}]", i)));
    std::uint64_t seed = 0;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ParseError("seed: expected an unsigned integer");
        seed = j["seed"].get<std::uint64_t>();
    }
    try {
        return SearchSpace(std::move(params), seed);
    } catch (const InvalidSpaceError& e) {
        throw ParseError(fmt::format("search space: {}", e.what()));
    }
}

Json config_to_json(const Configuration& config)
{
    Json j = Json::object();
    for (const auto& [name, v] : config.values()) j[name] = value_to_json(v);
    return j;
}

Configuration config_from_json(const Json& j, const SearchSpace* space)
{
    if (!j.is_object()) throw ParseError("config: expected an object");
    std::vector<std::pair<std::string, Value>> values;
    for (const auto& [key, v] : j.items()) {
        try {
            values.emplace_back(key, value_from_json(v));
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("config.{}: {}", key, e.what()));
        }
    }
    Configuration c(std::move(values));
    if (!space) return c;
    try {
        return space->validate(c);
    } catch (const InvalidConfigurationError& e) {
        throw ParseError(fmt::format("config: {}", e.what()));
    }
}

} // namespace bbo
