#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chainres {

using cplx = std::complex<double>;

// Positions of N resonators D_j = (x_j^-, x_j^+) on the line.
class ChainGeometry {
public:
    ChainGeometry(std::vector<double> lengths, std::vector<double> spacings,
                  double left_endpoint = 0.0);

    std::size_t size() const { return lengths_.size(); }
    std::span<const double> lengths() const { return lengths_; }
    std::span<const double> spacings() const { return spacings_; }
    double left_endpoint() const { return left_endpoint_; }

    // Endpoints of resonator j, 0-based.
    double left(std::size_t j) const { return left_[j]; }
    double right(std::size_t j) const { return left_[j] + lengths_[j]; }

    double total_length() const; // sum of resonator lengths

private:
    std::vector<double> lengths_;
    std::vector<double> spacings_;
    double left_endpoint_;
    std::vector<double> left_;
};

// Material contrasts. Only the ratios delta (densities) and r (wave speeds)
// enter the resonance condition, so the physical fields are not stored.
class Medium {
public:
    Medium(double r, double v, cplx delta, std::vector<double> gamma = {});

    double r() const { return r_; }
    double v() const { return v_; }
    cplx delta() const { return delta_; }
    std::span<const double> gamma() const { return gamma_; }
    bool has_gauge() const;

    cplx sigma() const { return delta_ / r_; }
    cplx nu() const { return 2.0 * sigma() / (1.0 + sigma()); }
    double vb() const { return v_ / r_; }

    // Real positive delta: gate for claims such as Im k < 0.
    bool real_positive_contrast() const { return delta_.imag() == 0.0 && delta_.real() > 0.0; }

    Medium with_delta(cplx delta) const;
    Medium with_gamma(std::vector<double> gamma) const;

private:
    double r_;
    double v_;
    cplx delta_;
    std::vector<double> gamma_;
};

// Interleaved lengths t = (r l_1, s_1, r l_2, ..., r l_N) and drifts
// beta = (gamma_1/r, 0, gamma_2/r, ..., gamma_N/r). Index j in the accessors
// below is 1-based to match t_1..t_{2N-1}; t_0 = t_{2N} = 1.
struct ParamVector {
    std::vector<double> t;
    std::vector<double> beta;

    std::size_t resonators() const { return (t.size() + 1) / 2; }
    double t_at(std::size_t j) const { return (j == 0 || j == t.size() + 1) ? 1.0 : t[j - 1]; }
    double beta_at(std::size_t j) const { return beta[j - 1]; }
    double theta(std::size_t j) const { return 1.0 / (t_at(j) * t_at(j + 1)); }
    std::vector<double> thetas() const; // theta_0 .. theta_{2N-1}
    double norm1() const;
    double product() const;
    double odd_sum() const; // sum of t_{2j-1}
    bool hermitian() const;
};

ParamVector build_params(const ChainGeometry& geometry, const Medium& medium);

// Direct construction, mostly for tests and benchmarks. beta empty means zero.
ParamVector make_params(std::vector<double> t, std::vector<double> beta = {});

struct ChainConfig {
    ChainGeometry geometry;
    Medium medium;
};

ChainConfig parse_chain_config(std::string_view json_text);
ChainConfig load_chain_config(const std::filesystem::path& path);
std::string chain_config_to_json(const ChainConfig& config); // compact, keys sorted

} // namespace chainres
