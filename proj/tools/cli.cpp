#include "cli.hpp"

#include "chainres/asymptotics.hpp"
#include "chainres/capacitance.hpp"
#include "chainres/chain.hpp"
#include "chainres/errors.hpp"
#include "chainres/evaluator.hpp"
#include "chainres/modes.hpp"
#include "chainres/newton_polygon.hpp"
#include "chainres/rootfind.hpp"
#include "chainres/series.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace chainres::cli {

using json = nlohmann::json;

std::string format_number(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

namespace {

struct Options {
    std::string config;
    std::optional<double> xmin;
    double xmax = 10.0;
    std::optional<double> ymin;
    std::optional<double> ymax;
    double tol = 1e-10;
    double cluster_floor = 1e-6;
    std::string regime = "small";
    std::optional<double> near;
    bool gauge = false;
    std::string k;
    int samples = 64;
    std::string format = "csv";
    std::string out;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

json flags_json(const Options& o) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"xmin", opt(o.xmin)},   {"xmax", o.xmax},
            {"ymin", opt(o.ymin)},   {"ymax", opt(o.ymax)},
            {"tol", o.tol},          {"cluster_floor", o.cluster_floor},
            {"regime", o.regime},    {"near", opt(o.near)},
            {"gauge", o.gauge},      {"k", o.k},
            {"samples", o.samples},  {"format", o.format},
            {"threads", o.threads}};
}

std::string fmt(double x) { return format_number(x); }

// Shared state of one invocation.
struct Context {
    Options opt;
    std::string subcommand;
    std::optional<ChainConfig> loaded;
    const ChainConfig& config() const { return *loaded; }
    std::chrono::steady_clock::time_point start;

    bool gauge() const { return opt.gauge || config().medium.has_gauge(); }
    bool json_out() const { return opt.format == "json"; }

    json manifest() const {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return {{"tool", "chainres"},
                {"version", version},
                {"subcommand", subcommand},
                {"config", json::parse(chain_config_to_json(*loaded))},
                {"flags", flags_json(opt)},
                {"duration_s", secs}};
    }
};

// ---- spectrum search ----

struct SpectrumRun {
    SpectrumResult result;
    ParamVector params;
};

AnalyticFnWithDerivative characteristic(const ParamVector& p, const Medium& m, bool gauge) {
    if (gauge) {
        const cplx nu = m.nu();
        return [p, nu](cplx k) { return eval_g_gauge_with_derivative(k, p, nu); };
    }
    const cplx sigma = m.sigma();
    return [p, sigma](cplx k) { return eval_f_with_derivative(k, p, sigma); };
}

SpectrumRun run_spectrum(const Context& ctx, const Medium& medium) {
    const Options& o = ctx.opt;
    const double xmin = o.xmin.value_or(-o.xmax);
    if (!(xmin < o.xmax)) throw InvalidInput("--xmin must be below --xmax");
    if (!(o.tol > 0.0) || !(o.cluster_floor > 0.0)) throw InvalidInput("--tol and --cluster-floor must be positive");

    SpectrumRun run;
    run.params = build_params(ctx.config().geometry, medium);
    const ParamVector& p = run.params;

    std::optional<StripBounds> strip;
    bool have_strip = false;
    if (!ctx.gauge() && p.resonators() <= max_trig_resonators) {
        strip = strip_bounds(expand_f_trig(p, medium.sigma()), medium.real_positive_contrast());
        have_strip = true;
    }
    double y1, y2;
    if (o.ymin && o.ymax) {
        y1 = *o.ymin;
        y2 = *o.ymax;
    } else if (have_strip && !strip) {
        // single exponential: no zeros at all
        run.result.search_rect = Rect{xmin, o.xmax, o.ymin.value_or(-1.0), o.ymax.value_or(1.0)};
        return run;
    } else if (have_strip) {
        y1 = o.ymin.value_or(strip->lower);
        y2 = o.ymax.value_or(strip->upper);
    } else {
        throw InvalidInput(ctx.gauge() ? "drift spectra need explicit --ymin and --ymax"
                                       : "chains this long need explicit --ymin and --ymax");
    }
    if (!(y1 < y2)) throw InvalidInput("--ymin must be below --ymax");

    FindOptions fo;
    fo.tol = o.tol;
    fo.cluster_floor = o.cluster_floor;
    fo.threads = std::max(1u, o.threads);
    fo.bandwidth = p.norm1();
    run.result = find_zeros(characteristic(p, medium, ctx.gauge()), Rect{xmin, o.xmax, y1, y2}, fo);
    run.result.strip = strip;
    return run;
}

json rect_json(const Rect& r) { return {{"xmin", r.x1}, {"xmax", r.x2}, {"ymin", r.y1}, {"ymax", r.y2}}; }

std::string cmd_spectrum(const Context& ctx) {
    const SpectrumRun run = run_spectrum(ctx, ctx.config().medium);
    const double v = ctx.config().medium.v();
    std::ostringstream os;
    if (ctx.json_out()) {
        json zeros = json::array();
        for (const auto& z : run.result.zeros) {
            zeros.push_back({{"re", z.k.real()},
                             {"im", z.k.imag()},
                             {"omega_re", z.k.real() * v},
                             {"omega_im", z.k.imag() * v},
                             {"multiplicity", z.multiplicity},
                             {"residual", z.residual},
                             {"cluster_radius", z.cluster_radius}});
        }
        json doc = {{"manifest", ctx.manifest()},
                    {"search_rect", rect_json(run.result.search_rect)},
                    {"total_winding", run.result.total_winding},
                    {"zeros", zeros}};
        doc["strip"] = run.result.strip ? json{{"lower", run.result.strip->lower}, {"upper", run.result.strip->upper}}
                                        : json(nullptr);
        os << doc.dump(2) << "\n";
    } else {
        os << "re_k,im_k,multiplicity,residual,cluster_radius\n";
        for (const auto& z : run.result.zeros) {
            os << fmt(z.k.real()) << ',' << fmt(z.k.imag()) << ',' << z.multiplicity << ',' << fmt(z.residual) << ','
               << fmt(z.cluster_radius) << "\n";
        }
    }
    return os.str();
}

std::string cmd_density(const Context& ctx) {
    const SpectrumRun run = run_spectrum(ctx, ctx.config().medium);
    const DensityReport d = zero_density(run.result, run.params, ctx.config().medium.sigma());
    std::ostringstream os;
    if (ctx.json_out()) {
        json doc = {{"manifest", ctx.manifest()},
                    {"empirical", d.empirical},
                    {"total_winding", run.result.total_winding},
                    {"width", run.result.search_rect.width()}};
        doc["theoretical"] = d.theoretical_applicable ? json(d.theoretical) : json(nullptr);
        os << doc.dump(2) << "\n";
    } else {
        os << "empirical=" << fmt(d.empirical) << "\n"
           << "theoretical=" << (d.theoretical_applicable ? fmt(d.theoretical) : std::string("n/a")) << "\n";
    }
    return os.str();
}

std::string cmd_capacitance(const Context& ctx) {
    const ParamVector p = build_params(ctx.config().geometry, ctx.config().medium);
    const CapacitanceMatrix c = ctx.gauge() ? build_gauge_capacitance(p) : build_capacitance(p);
    const CapacitanceSpectrum spec = eigensolve(c);
    const std::size_t n = c.size();
    std::ostringstream os;
    if (ctx.json_out()) {
        json rows = json::array();
        for (std::size_t i = 0; i < n; ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < n; ++j) row.push_back(c.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            rows.push_back(row);
        }
        auto vec = [](const Eigen::VectorXd& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
        json right = json::array(), left = json::array();
        for (std::size_t i = 0; i < n; ++i) {
            right.push_back(vec(spec.right[i]));
            left.push_back(vec(spec.left[i]));
        }
        json doc = {{"manifest", ctx.manifest()},
                    {"kind", c.kind == CapacitanceKind::gauge ? "gauge" : "hermitian"},
                    {"matrix", rows},
                    {"theta", c.theta},
                    {"volumes", c.volumes},
                    {"eigenvalues", spec.eigenvalues},
                    {"right_vectors", right},
                    {"left_vectors", left}};
        os << doc.dump(2) << "\n";
    } else {
        os << "index,eigenvalue";
        for (std::size_t j = 1; j <= n; ++j) os << ",a_" << j;
        for (std::size_t j = 1; j <= n; ++j) os << ",b_" << j;
        os << "\n";
        for (std::size_t i = 0; i < n; ++i) {
            os << i + 1 << ',' << fmt(spec.eigenvalues[i]);
            for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) os << ',' << fmt(spec.right[i](j));
            for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) os << ',' << fmt(spec.left[i](j));
            os << "\n";
        }
    }
    return os.str();
}

Regime parse_regime(const std::string& s) {
    if (s == "small") return Regime::small_contrast;
    if (s == "large") return Regime::large_contrast;
    throw InvalidInput("--regime must be small or large");
}

std::string cmd_asymptotics(const Context& ctx) {
    const Regime regime = parse_regime(ctx.opt.regime);
    const auto& g = ctx.config().geometry;
    const auto& m = ctx.config().medium;
    std::vector<AsymptoticResonance> list;
    if (ctx.opt.near) {
        list.push_back(first_order(*ctx.opt.near, g, m, regime));
    } else if (ctx.gauge()) {
        if (regime != Regime::small_contrast) throw InvalidInput("drift expansions are available for --regime small only");
        list = gauge_subwavelength_spectrum(g, m);
    } else {
        list = subwavelength_spectrum(g, m, regime);
    }
    const cplx delta = m.delta();
    std::ostringstream os;
    if (ctx.json_out()) {
        json arr = json::array();
        for (const auto& a : list) {
            const cplx w = a.evaluate(delta);
            auto c = [](cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; };
            json e = {{"case_tag", a.case_tag},
                      {"kind", to_string(a.kind)},
                      {"k0", a.k0},
                      {"omega0", c(a.omega0)},
                      {"c1", c(a.c1)},
                      {"omega_at_delta", c(w)}};
            e["c2"] = a.c2 ? c(*a.c2) : json(nullptr);
            arr.push_back(e);
        }
        os << json{{"manifest", ctx.manifest()}, {"regime", ctx.opt.regime}, {"resonances", arr}}.dump(2) << "\n";
    } else {
        os << "case,parameter,re_omega0,im_omega0,re_c1,im_c1,re_c2,im_c2,re_omega,im_omega\n";
        for (const auto& a : list) {
            const cplx w = a.evaluate(delta);
            os << a.case_tag << ',' << to_string(a.kind) << ',' << fmt(a.omega0.real()) << ',' << fmt(a.omega0.imag())
               << ',' << fmt(a.c1.real()) << ',' << fmt(a.c1.imag()) << ',';
            if (a.c2) os << fmt(a.c2->real()) << ',' << fmt(a.c2->imag());
            else os << ',';
            os << ',' << fmt(w.real()) << ',' << fmt(w.imag()) << "\n";
        }
    }
    return os.str();
}

cplx parse_k(const std::string& s) {
    if (s.empty()) throw InvalidInput("--k RE,IM is required");
    const auto comma = s.find(',');
    auto num = [&](std::string_view part) {
        double x = 0.0;
        while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
        if (!part.empty() && part.front() == '+') part.remove_prefix(1);
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
        if (ec != std::errc() || ptr != part.data() + part.size() || !std::isfinite(x)) {
            throw InvalidInput("cannot parse --k value \"" + s + "\"");
        }
        return x;
    };
    const std::string_view sv(s);
    if (comma == std::string::npos) return {num(sv), 0.0};
    return {num(sv.substr(0, comma)), num(sv.substr(comma + 1))};
}

std::string cmd_modes(const Context& ctx) {
    const cplx k = parse_k(ctx.opt.k);
    const ModeProfile prof = reconstruct(k, ctx.config().geometry, ctx.config().medium, ctx.opt.samples);
    std::ostringstream os;
    if (ctx.json_out()) {
        json samples = json::array();
        for (const auto& s : prof.samples) {
            samples.push_back({{"x", s.x},
                               {"u", {s.u.real(), s.u.imag()}},
                               {"du", {s.du.real(), s.du.imag()}},
                               {"segment", s.segment}});
        }
        os << json{{"manifest", ctx.manifest()},
                   {"k", {k.real(), k.imag()}},
                   {"outgoing_residual", prof.outgoing_residual},
                   {"samples", samples}}
                  .dump(2)
           << "\n";
    } else {
        os << "x,re_u,im_u,re_du,im_du,segment\n";
        for (const auto& s : prof.samples) {
            os << fmt(s.x) << ',' << fmt(s.u.real()) << ',' << fmt(s.u.imag()) << ',' << fmt(s.du.real()) << ','
               << fmt(s.du.imag()) << ',' << s.segment << "\n";
        }
    }
    return os.str();
}

// ---- verify ----

struct Check {
    std::string name;
    double value;
    double tolerance;
    bool pass;
};

std::vector<Check> verification_checks(const Context& ctx) {
    const auto& g = ctx.config().geometry;
    const auto& m = ctx.config().medium;
    const ParamVector p = build_params(g, m);
    const std::size_t n = g.size();
    std::vector<Check> checks;
    auto add = [&](std::string name, double value, double tol) {
        checks.push_back({std::move(name), value, tol, value <= tol});
    };

    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> re(ctx.opt.xmin.value_or(-ctx.opt.xmax), ctx.opt.xmax);
    std::uniform_real_distribution<double> im(-2.0, 0.5);

    // drift evaluator with beta = 0 is the reciprocal one
    {
        ParamVector p0 = p;
        std::fill(p0.beta.begin(), p0.beta.end(), 0.0);
        double worst = 0.0;
        for (int i = 0; i < 32; ++i) {
            const cplx k{re(rng), im(rng)};
            worst = std::max(worst, std::abs(eval_g_gauge(k, p0, m.nu()) - eval_g(k, p0, m.nu())));
        }
        add("drift_evaluator_at_zero_drift", worst, 0.0);
    }

    if (!ctx.gauge()) {
        if (n <= max_trig_resonators) {
            const TrigPoly poly = expand_f_trig(p, m.sigma());
            double worst = 0.0;
            for (int i = 0; i < 64; ++i) {
                const cplx k{re(rng), im(rng)};
                const cplx f = eval_f(k, p, m.sigma());
                worst = std::max(worst, std::abs(f - poly(k)) / std::max(1.0, std::abs(f)));
            }
            add("matrix_vs_trig_sum", worst, 1e-12);
        }
        double worst = 0.0;
        for (int i = 0; i < 64; ++i) {
            const cplx k{re(rng), im(rng)};
            const cplx f = eval_f(k, p, m.sigma());
            worst = std::max(worst, std::abs(f - eval_g(k, p, m.nu())) / std::max(1.0, std::abs(f)));
        }
        add("f_vs_g", worst, 1e-12);
    }

    // capacitance invariants
    const CapacitanceMatrix c = ctx.gauge() ? build_gauge_capacitance(p) : build_capacitance(p);
    const CapacitanceSpectrum spec = eigensolve(c);
    {
        const double row = (c.entries * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))).cwiseAbs().maxCoeff();
        add("capacitance_row_sums", row, 8.0 * std::numeric_limits<double>::epsilon() * c.entries.cwiseAbs().maxCoeff());
        double gap = INFINITY;
        for (std::size_t i = 1; i < n; ++i) gap = std::min(gap, spec.eigenvalues[i] - spec.eigenvalues[i - 1]);
        if (n > 1) checks.push_back({"eigenvalues_simple_ascending", gap, 0.0, gap > 0.0});
        double worst = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            for (Endpoint e : {Endpoint::first, Endpoint::last}) {
                const Eigen::VectorXd& a = spec.right[i];
                const Eigen::VectorXd& b = spec.left[i];
                const Eigen::Index idx = e == Endpoint::first ? 0 : a.size() - 1;
                const double ratio = a(idx) * b(idx) / b.dot(a);
                const double cof = cofactor_ratio(c, e, spec.eigenvalues[i]);
                worst = std::max(worst, std::abs(ratio - cof) / std::max(1.0, std::abs(ratio)));
            }
        }
        if (n > 1) add("residue_identity", worst, 1e-8);
        double det_err = 0.0;
        for (double lam : {-0.7, 0.3, 1.9}) {
            const Eigen::MatrixXd shifted = c.entries - lam * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            const double det = shifted.determinant();
            const double poly = char_poly_eval(c.theta, lam, CharPoly::P).real();
            det_err = std::max(det_err, std::abs(poly - det) / std::max(1.0, std::abs(det)));
        }
        add("char_poly_vs_determinant", det_err, 1e-10);
    }

    // Newton polygon of the reciprocal g-series
    if (!ctx.gauge() && n <= 8) {
        const BivariateSeries ser = g_bivariate_series(p, static_cast<int>(2 * n + 1), static_cast<int>(n + 1));
        const auto branches = branch_table(ser);
        int total = 0;
        for (const auto& b : branches) total += b.multiplicity;
        add("branch_count_deficit", std::abs(total - static_cast<int>(2 * n - 1)), 0.0);
        const CapacitanceSpectrum hs = eigensolve(build_capacitance(p));
        double worst = 0.0;
        for (const auto& b : branches) {
            if (!(b.exponent == Rational{1, 2})) continue;
            double best = INFINITY;
            for (std::size_t i = 1; i < n; ++i) {
                const double s = std::sqrt(hs.eigenvalues[i] / 2.0);
                best = std::min({best, std::abs(b.leading - s), std::abs(b.leading + s)});
            }
            worst = std::max(worst, best);
        }
        add("balance_roots_vs_capacitance", worst, 1e-8);
    }

    // spectral properties in the search window
    if (!ctx.gauge()) {
        const SpectrumRun run = run_spectrum(ctx, m);
        int mult = 0;
        for (const auto& z : run.result.zeros) mult += z.multiplicity;
        add("winding_conservation", std::abs(mult - run.result.total_winding), 0.0);

        if (m.real_positive_contrast()) {
            double top = -INFINITY;
            for (const auto& z : run.result.zeros) top = std::max(top, z.k.imag());
            if (!run.result.zeros.empty()) checks.push_back({"max_imag_part", top, 0.0, top < 0.0});
        }
        if (m.delta().imag() == 0.0) {
            // k -> -conj(k); zeros near the vertical edges may have partners outside
            const Rect& r = run.result.search_rect;
            double worst = 0.0;
            for (const auto& z : run.result.zeros) {
                const cplx mirror = -std::conj(z.k);
                if (!r.contains(mirror) || std::abs(mirror.real() - r.x1) < 1e-6 || std::abs(mirror.real() - r.x2) < 1e-6) continue;
                double best = INFINITY;
                for (const auto& w : run.result.zeros) best = std::min(best, std::abs(w.k - mirror));
                worst = std::max(worst, best);
            }
            add("reflection_symmetry", worst, 1e-9);
        }
        {
            Context dual = ctx;
            dual.opt.ymin = run.result.search_rect.y1;
            dual.opt.ymax = run.result.search_rect.y2;
            dual.opt.xmin = run.result.search_rect.x1;
            dual.opt.xmax = run.result.search_rect.x2;
            const double r = m.r();
            const SpectrumRun other = run_spectrum(dual, m.with_delta(r * r / m.delta()));
            double worst = 0.0;
            if (other.result.zeros.size() != run.result.zeros.size()) worst = INFINITY;
            for (std::size_t i = 0; i < run.result.zeros.size() && std::isfinite(worst); ++i) {
                worst = std::max(worst, std::abs(run.result.zeros[i].k - other.result.zeros[i].k));
            }
            add("contrast_duality", worst, 1e-8);
        }
    }
    return checks;
}

struct OrderRow {
    std::string resonance;
    double claimed;
    double fitted;
    bool pass;
};

// Fitted convergence orders of the asymptotic formulas against tracked zeros.
std::vector<OrderRow> convergence_rows(const Context& ctx) {
    const auto& g = ctx.config().geometry;
    const auto& m = ctx.config().medium;
    const Regime regime = parse_regime(ctx.opt.regime);
    if (ctx.gauge() && regime != Regime::small_contrast) return {};

    std::vector<AsymptoticResonance> list;
    if (ctx.opt.near) list.push_back(first_order(*ctx.opt.near, g, m, regime));
    else if (ctx.gauge()) list = gauge_subwavelength_spectrum(g, m);
    else list = subwavelength_spectrum(g, m, regime);

    const double base = ctx.opt.near ? 1e-4 : 1e-3;
    std::vector<double> deltas;
    for (int i = 0; i < 6; ++i) {
        const double d = base * std::pow(0.5, i);
        deltas.push_back(regime == Regime::small_contrast ? d : m.r() * m.r() / d);
    }
    const ZeroTracker tracker = characteristic_tracker(g, m);
    std::vector<OrderRow> rows;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& a = list[i];
        if (a.case_tag == "trivial") continue;
        const bool half = a.kind == ParameterKind::sqrt_delta || a.kind == ParameterKind::inverse_sqrt_delta;
        const double claimed = half ? 1.5 : 2.0;
        std::vector<AsymptoticResonance> siblings;
        for (std::size_t j = 0; j < list.size(); ++j) {
            if (j != i) siblings.push_back(list[j]);
        }
        const ConvergenceFit fit = convergence_order(tracker, a, deltas, siblings);
        rows.push_back({a.case_tag, claimed, fit.order, fit.order >= claimed - 0.1});
    }
    return rows;
}

std::string cmd_verify(const Context& ctx, bool& all_pass) {
    const auto checks = verification_checks(ctx);
    const auto orders = convergence_rows(ctx);
    all_pass = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; }) &&
               std::all_of(orders.begin(), orders.end(), [](const OrderRow& r) { return r.pass; });
    std::ostringstream os;
    if (ctx.json_out()) {
        json arr = json::array(), conv = json::array();
        for (const auto& c : checks) {
            arr.push_back({{"check", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
        }
        for (const auto& r : orders) {
            conv.push_back({{"resonance", r.resonance}, {"claimed_order", r.claimed}, {"fitted_order", r.fitted}, {"pass", r.pass}});
        }
        os << json{{"manifest", ctx.manifest()}, {"checks", arr}, {"convergence", conv}, {"all_pass", all_pass}}.dump(2)
           << "\n";
    } else {
        os << "check,value,tolerance,status\n";
        for (const auto& c : checks) {
            os << c.name << ',' << fmt(c.value) << ',' << fmt(c.tolerance) << ',' << (c.pass ? "PASS" : "FAIL") << "\n";
        }
        os << "\nresonance,claimed_order,fitted_order,status\n";
        for (const auto& r : orders) {
            os << r.resonance << ',' << fmt(r.claimed) << ',' << fmt(r.fitted) << ',' << (r.pass ? "PASS" : "FAIL") << "\n";
        }
    }
    return os.str();
}

// ---- plot ----

std::string cmd_plot(const Context& ctx) {
    const SpectrumRun run = run_spectrum(ctx, ctx.config().medium);
    const Rect& r = run.result.search_rect;
    const double w = 800, h = 400, pad = 50;
    auto px = [&](double x) { return pad + (x - r.x1) / r.width() * (w - 2 * pad); };
    auto py = [&](double y) { return h - pad - (y - r.y1) / r.height() * (h - 2 * pad); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
       << w << ' ' << h << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad << "\" height=\"" << h - 2 * pad
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (r.y1 < 0.0 && r.y2 > 0.0) {
        os << "<line x1=\"" << pad << "\" y1=\"" << py(0.0) << "\" x2=\"" << w - pad << "\" y2=\"" << py(0.0)
           << "\" stroke=\"gray\" stroke-width=\"0.5\"/>\n";
    }
    if (run.result.strip) {
        for (double y : {run.result.strip->lower, run.result.strip->upper}) {
            if (y < r.y1 || y > r.y2) continue;
            os << "<line x1=\"" << pad << "\" y1=\"" << py(y) << "\" x2=\"" << w - pad << "\" y2=\"" << py(y)
               << "\" stroke=\"red\" stroke-dasharray=\"6,4\"/>\n";
        }
    }
    for (const auto& z : run.result.zeros) {
        os << "<circle cx=\"" << px(z.k.real()) << "\" cy=\"" << py(z.k.imag()) << "\" r=\""
           << (z.multiplicity > 1 ? 4 : 2.5) << "\" fill=\"navy\"/>\n";
    }
    os << "<text x=\"" << pad << "\" y=\"" << h - 15 << "\" font-size=\"12\">Re k in [" << fmt(r.x1) << ", "
       << fmt(r.x2) << "], Im k in [" << fmt(r.y1) << ", " << fmt(r.y2) << "], winding "
       << run.result.total_winding << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

void add_window(CLI::App* s, Options& o) {
    s->add_option("--xmin", o.xmin, "Left edge of the search window (default -xmax)");
    s->add_option("--xmax", o.xmax, "Right edge of the search window")->capture_default_str();
    s->add_option("--ymin", o.ymin, "Bottom edge (default: strip bound)");
    s->add_option("--ymax", o.ymax, "Top edge (default: strip bound)");
    s->add_option("--tol", o.tol, "Newton residual tolerance")->capture_default_str();
    s->add_option("--cluster-floor", o.cluster_floor, "Box diameter below which zeros are reported as a cluster")
        ->capture_default_str();
    s->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void add_output(CLI::App* s, Options& o, bool formats = true) {
    s->add_option("--config", o.config, "Chain configuration (JSON)")->required();
    if (formats) s->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    s->add_option("--out", o.out, "Output file (default stdout)");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Context ctx;
    ctx.start = std::chrono::steady_clock::now();
    Options& o = ctx.opt;

    CLI::App app{"Resonances of one-dimensional high-contrast resonator chains", "chainres"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    auto* spectrum = app.add_subcommand("spectrum", "Locate all zeros of the characteristic function in a window");
    add_output(spectrum, o);
    add_window(spectrum, o);
    spectrum->add_flag("--gauge", o.gauge, "Use the drift (non-reciprocal) characteristic function");

    auto* density = app.add_subcommand("density", "Empirical and theoretical zero density");
    add_output(density, o);
    add_window(density, o);

    auto* capacitance = app.add_subcommand("capacitance", "Capacitance matrix and its eigenpairs");
    add_output(capacitance, o);
    capacitance->add_flag("--gauge", o.gauge, "Build the drift capacitance matrix");

    auto* asymptotics = app.add_subcommand("asymptotics", "Leading-order resonance expansions");
    add_output(asymptotics, o);
    asymptotics->add_option("--regime", o.regime, "small (delta -> 0) or large (delta -> infinity)")
        ->check(CLI::IsMember({"small", "large"}))
        ->capture_default_str();
    asymptotics->add_option("--near", o.near, "First-order expansion near k0 instead of the subwavelength family");
    asymptotics->add_flag("--gauge", o.gauge, "Drift subwavelength expansions");

    auto* verify = app.add_subcommand("verify", "Invariant checks and convergence orders of the expansions");
    add_output(verify, o);
    add_window(verify, o);
    verify->add_option("--regime", o.regime, "Expansion regime for the convergence table")
        ->check(CLI::IsMember({"small", "large"}))
        ->capture_default_str();
    verify->add_option("--near", o.near, "Check the first-order expansion near k0");

    auto* modes = app.add_subcommand("modes", "Reconstruct the resonant mode at k");
    add_output(modes, o);
    modes->add_option("--k", o.k, "Resonance wavenumber as RE,IM")->required();
    modes->add_option("--samples", o.samples, "Samples per segment")->capture_default_str();

    auto* plot = app.add_subcommand("plot", "SVG scatter of the zeros with the strip bounds");
    add_output(plot, o, false);
    add_window(plot, o);
    plot->add_flag("--gauge", o.gauge, "Use the drift characteristic function");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "ERROR 2: " << e.what() << "\n";
        return 2;
    }

    try {
        ctx.subcommand = app.get_subcommands().front()->get_name();
        ctx.loaded = load_chain_config(o.config);

        std::string doc;
        bool ok = true;
        if (ctx.subcommand == "spectrum") doc = cmd_spectrum(ctx);
        else if (ctx.subcommand == "density") doc = cmd_density(ctx);
        else if (ctx.subcommand == "capacitance") doc = cmd_capacitance(ctx);
        else if (ctx.subcommand == "asymptotics") doc = cmd_asymptotics(ctx);
        else if (ctx.subcommand == "verify") doc = cmd_verify(ctx, ok);
        else if (ctx.subcommand == "modes") doc = cmd_modes(ctx);
        else if (ctx.subcommand == "plot") doc = cmd_plot(ctx);

        if (!ctx.json_out() || ctx.subcommand == "plot") err << "MANIFEST " << ctx.manifest().dump() << "\n";
        if (o.out.empty()) {
            out << doc;
        } else {
            std::ofstream f(o.out, std::ios::binary);
            if (!f) throw InvalidInput("cannot open output file " + o.out);
            f << doc;
        }
        if (!ok) {
            err << "ERROR 3: one or more verification checks failed\n";
            return 3;
        }
        return 0;
    } catch (const InvalidInput& e) {
        err << "ERROR 2: " << e.what() << "\n";
        return 2;
    } catch (const NumericalFailure& e) {
        err << "ERROR 3: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "ERROR 3: " << e.what() << "\n";
        return 3;
    }
}

} // namespace chainres::cli
