#include "chainres/chain.hpp"

#include "chainres/errors.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace chainres {

namespace {

void require_positive(std::span<const double> xs, const char* what) {
    for (double x : xs) {
        if (!std::isfinite(x) || x <= 0.0) {
            throw InvalidInput(std::string(what) + " must be finite and strictly positive");
        }
    }
}

} // namespace

ChainGeometry::ChainGeometry(std::vector<double> lengths, std::vector<double> spacings,
                             double left_endpoint)
    : lengths_(std::move(lengths)), spacings_(std::move(spacings)), left_endpoint_(left_endpoint) {
    if (lengths_.empty()) throw InvalidInput("at least one resonator is required");
    if (spacings_.size() + 1 != lengths_.size()) {
        throw InvalidInput("expected " + std::to_string(lengths_.size() - 1) + " spacings, got " +
                           std::to_string(spacings_.size()));
    }
    if (!std::isfinite(left_endpoint_)) throw InvalidInput("x_left must be finite");
    require_positive(lengths_, "resonator lengths");
    require_positive(spacings_, "spacings");

    left_.resize(lengths_.size());
    double x = left_endpoint_;
    for (std::size_t j = 0; j < lengths_.size(); ++j) {
        left_[j] = x;
        x += lengths_[j];
        if (j < spacings_.size()) x += spacings_[j];
    }
}

double ChainGeometry::total_length() const {
    return std::accumulate(lengths_.begin(), lengths_.end(), 0.0);
}

Medium::Medium(double r, double v, cplx delta, std::vector<double> gamma)
    : r_(r), v_(v), delta_(delta), gamma_(std::move(gamma)) {
    if (!std::isfinite(r_) || r_ <= 0.0) throw InvalidInput("r must be positive");
    if (!std::isfinite(v_) || v_ <= 0.0) throw InvalidInput("v must be positive");
    if (!std::isfinite(delta_.real()) || !std::isfinite(delta_.imag())) {
        throw InvalidInput("delta must be finite");
    }
    if (delta_ == 0.0) throw InvalidInput("delta must be nonzero");
    if (delta_ == cplx(-r_, 0.0)) throw InvalidInput("delta = -r makes nu infinite");
    for (double g : gamma_) {
        if (!std::isfinite(g)) throw InvalidInput("gamma entries must be finite");
    }
}

bool Medium::has_gauge() const {
    return std::any_of(gamma_.begin(), gamma_.end(), [](double g) { return g != 0.0; });
}

Medium Medium::with_delta(cplx delta) const { return Medium(r_, v_, delta, gamma_); }

Medium Medium::with_gamma(std::vector<double> gamma) const {
    return Medium(r_, v_, delta_, std::move(gamma));
}

std::vector<double> ParamVector::thetas() const {
    std::vector<double> out(t.size() + 1);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = theta(j);
    return out;
}

double ParamVector::norm1() const { return std::accumulate(t.begin(), t.end(), 0.0); }

double ParamVector::product() const {
    return std::accumulate(t.begin(), t.end(), 1.0, std::multiplies<>());
}

double ParamVector::odd_sum() const {
    double s = 0.0;
    for (std::size_t j = 0; j < t.size(); j += 2) s += t[j];
    return s;
}

bool ParamVector::hermitian() const {
    return std::all_of(beta.begin(), beta.end(), [](double b) { return b == 0.0; });
}

ParamVector build_params(const ChainGeometry& geometry, const Medium& medium) {
    const std::size_t n = geometry.size();
    const auto gamma = medium.gamma();
    if (!gamma.empty() && gamma.size() != n) {
        throw InvalidInput("gamma has " + std::to_string(gamma.size()) + " entries but the chain has " +
                           std::to_string(n) + " resonators");
    }
    ParamVector p;
    p.t.assign(2 * n - 1, 0.0);
    p.beta.assign(2 * n - 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        p.t[2 * j] = medium.r() * geometry.lengths()[j];
        if (!gamma.empty()) p.beta[2 * j] = gamma[j] / medium.r();
        if (j + 1 < n) p.t[2 * j + 1] = geometry.spacings()[j];
    }
    return p;
}

ParamVector make_params(std::vector<double> t, std::vector<double> beta) {
    if (t.empty() || t.size() % 2 == 0) throw InvalidInput("t must have odd length 2N-1");
    require_positive(t, "t entries");
    if (beta.empty()) beta.assign(t.size(), 0.0);
    if (beta.size() != t.size()) throw InvalidInput("beta must match t in length");
    for (std::size_t j = 1; j < beta.size(); j += 2) {
        if (beta[j] != 0.0) throw InvalidInput("beta vanishes on spacings");
    }
    return ParamVector{std::move(t), std::move(beta)};
}

namespace {

using nlohmann::json;

std::vector<double> number_array(const json& j, const char* key) {
    if (!j.is_array()) throw InvalidInput(std::string("\"") + key + "\" must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw InvalidInput(std::string("\"") + key + "\" must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

double number(const json& j, const char* key) {
    if (!j.is_number()) throw InvalidInput(std::string("\"") + key + "\" must be a number");
    return j.get<double>();
}

cplx complex_value(const json& j, const char* key) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_object()) {
        for (const auto& [k, _] : j.items()) {
            if (k != "re" && k != "im") {
                throw InvalidInput(std::string("unknown key \"") + k + "\" in \"" + key + "\"");
            }
        }
        if (!j.contains("re")) throw InvalidInput(std::string("\"") + key + "\" needs \"re\"");
        const double re = number(j.at("re"), "re");
        const double im = j.contains("im") ? number(j.at("im"), "im") : 0.0;
        return {re, im};
    }
    throw InvalidInput(std::string("\"") + key + "\" must be a number or {\"re\",\"im\"}");
}

} // namespace

ChainConfig parse_chain_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidInput("config must be a JSON object");

    static const std::set<std::string> known = {"lengths", "spacings", "r", "v", "delta", "gamma", "x_left"};
    for (const auto& [k, _] : doc.items()) {
        if (!known.count(k)) throw InvalidInput("unknown config key \"" + k + "\"");
    }
    for (const char* k : {"lengths", "spacings", "r", "v", "delta"}) {
        if (!doc.contains(k)) throw InvalidInput(std::string("missing config key \"") + k + "\"");
    }

    auto lengths = number_array(doc.at("lengths"), "lengths");
    auto spacings = number_array(doc.at("spacings"), "spacings");
    const double x_left = doc.contains("x_left") ? number(doc.at("x_left"), "x_left") : 0.0;
    std::vector<double> gamma;
    if (doc.contains("gamma")) gamma = number_array(doc.at("gamma"), "gamma");

    ChainGeometry geometry(std::move(lengths), std::move(spacings), x_left);
    if (!gamma.empty() && gamma.size() != geometry.size()) {
        throw InvalidInput("\"gamma\" must have one entry per resonator");
    }
    Medium medium(number(doc.at("r"), "r"), number(doc.at("v"), "v"),
                  complex_value(doc.at("delta"), "delta"), std::move(gamma));
    return ChainConfig{std::move(geometry), std::move(medium)};
}

ChainConfig load_chain_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_chain_config(ss.str());
}

std::string chain_config_to_json(const ChainConfig& config) {
    json doc;
    const auto& g = config.geometry;
    const auto& m = config.medium;
    doc["lengths"] = std::vector<double>(g.lengths().begin(), g.lengths().end());
    doc["spacings"] = std::vector<double>(g.spacings().begin(), g.spacings().end());
    doc["x_left"] = g.left_endpoint();
    doc["r"] = m.r();
    doc["v"] = m.v();
    doc["delta"] = {{"re", m.delta().real()}, {"im", m.delta().imag()}};
    if (!m.gamma().empty()) doc["gamma"] = std::vector<double>(m.gamma().begin(), m.gamma().end());
    return doc.dump();
}

} // namespace chainres
