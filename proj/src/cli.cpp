#include "qflab/cli.hpp"

#include <chrono>
#include <memory>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qflab/core.hpp"
#include "qflab/martingale.hpp"
#include "qflab/operators.hpp"
#include "qflab/potentials.hpp"
#include "qflab/pricing.hpp"

namespace qflab::cli {

namespace {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// deterministic JSON emission: stable key order (insertion order) and every
// floating-point number printed with 17 significant digits
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void dump_json(const ordered_json& j, std::string& out, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
    const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
    switch (j.type()) {
        case nlohmann::detail::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                out += pad_in + ordered_json(it.key()).dump() + ": ";
                dump_json(it.value(), out, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += pad + "}";
            return;
        }
        case nlohmann::detail::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad_in;
                dump_json(j[i], out, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += pad + "]";
            return;
        }
        case nlohmann::detail::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

std::string dump_report(const ordered_json& j) {
    std::string out;
    dump_json(j, out, 0);
    out += "\n";
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// CSV emission (RFC 4180: header row, LF endings, '.' decimal separator)
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void emit_csv(const CsvTable& table, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(Errc::IoError, "emit_csv: cannot open " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        os << (i ? "," : "") << csv_quote(table.header[i]);
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_quote(row[i]);
        os << "\n";
    }
    os.flush();
    if (!os)
        throw Error(Errc::IoError, "emit_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// config merging: a JSON config file supplies any value not given as a flag
// ---------------------------------------------------------------------------

const nlohmann::json* find_path(const nlohmann::json& cfg, const std::string& dotted) {
    const nlohmann::json* cur = &cfg;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return cur;
}

struct OptionSet {
    CLI::App* cmd = nullptr;
    struct Entry {
        CLI::Option* opt;
        std::string path;
        std::function<void(const nlohmann::json&)> apply;
    };
    std::vector<Entry> entries;

    void number(const std::string& flag, double& target, const std::string& path, const std::string& desc) {
        auto* opt = cmd->add_option(flag, target, desc);
        entries.push_back({opt, path, [&target](const nlohmann::json& v) { target = v.get<double>(); }});
    }
    void integer(const std::string& flag, int& target, const std::string& path, const std::string& desc) {
        auto* opt = cmd->add_option(flag, target, desc);
        entries.push_back({opt, path, [&target](const nlohmann::json& v) { target = v.get<int>(); }});
    }
    void text(const std::string& flag, std::string& target, const std::string& path, const std::string& desc) {
        auto* opt = cmd->add_option(flag, target, desc);
        entries.push_back({opt, path, [&target](const nlohmann::json& v) { target = v.get<std::string>(); }});
    }
    void toggle(const std::string& flag, bool& target, const std::string& path, const std::string& desc) {
        auto* opt = cmd->add_flag(flag, target, desc);
        entries.push_back({opt, path, [&target](const nlohmann::json& v) { target = v.get<bool>(); }});
    }

    void merge(const nlohmann::json& cfg) const {
        for (const auto& e : entries) {
            if (e.opt->count() > 0) continue;  // flags override the file
            if (const nlohmann::json* v = find_path(cfg, e.path)) {
                try {
                    e.apply(*v);
                } catch (const nlohmann::json::exception& ex) {
                    throw Error(Errc::InvalidInputs, "config key '" + e.path + "': " + ex.what());
                }
            }
        }
    }
};

nlohmann::json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw Error(Errc::IoError, "cannot open config file " + path);
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& ex) {
        throw Error(Errc::InvalidInputs, std::string("config parse: ") + ex.what());
    }
}

// ---------------------------------------------------------------------------
// report assembly
// ---------------------------------------------------------------------------

struct ReportBuilder {
    ordered_json inputs = ordered_json::object();
    ordered_json tolerances = ordered_json::object();
    ordered_json outputs = ordered_json::object();
    ordered_json assertions = ordered_json::array();
    std::vector<CsvTable> tables;

    void check_le(const std::string& name, double value, double tolerance) {
        assertions.push_back(ordered_json{{"name", name},
                                          {"value", value},
                                          {"tolerance", tolerance},
                                          {"pass", value <= tolerance}});
    }
    void check_that(const std::string& name, bool pass) {
        assertions.push_back(ordered_json{{"name", name}, {"pass", pass}});
    }
    bool all_passed() const {
        for (const auto& a : assertions)
            if (!a.at("pass").get<bool>()) return false;
        return true;
    }
};

struct Io {
    std::string config_path;
    std::string out_path;
    std::string csv_path;
};

void write_text(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(Errc::IoError, "cannot open output file " + path);
    os << text;
    os.flush();
    if (!os)
        throw Error(Errc::IoError, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// shared argument bundles
// ---------------------------------------------------------------------------

struct Args {
    // market parameters
    double r = 0.05;
    double sigma2 = 0.04;
    double lambda = 0.01;
    double mu = 0.02;
    double zeta = 0.1;
    double alpha = 1.0;
    double rho = 0.0;
    double mu2 = 0.04;
    double lam4 = -0.01;
    double y = 0.0;
    std::vector<double> bracket = {-2.0, 2.0};
    // grids
    double x_min = -2.0, x_max = 2.0;
    int nx = 401;
    double y_min = -1.0, y_max = 1.0;
    int ny = 101;
    // sweeps
    int count = 11;
    // evolution
    double maturity = 1.0;
    int steps = 200;
    std::string scheme = "crank-nicolson";
    double strike = 100.0;
    double x0 = 4.6051701859880918;  // ln(100)
    std::string model = "bs";
    bool extended = false;
    // tolerances
    double tol_stationarity = 1e-12;
    double tol_ratio = 1e-10;
    double tol_residual = 1e-3;
    double tol_root = 1e-12;
    double tol_rel_error = 1e-2;
    double tol_deviation = 5e-3;
    double tol_consistency = 1e-12;
};

double sigma_from_sigma2(double sigma2) {
    if (!(sigma2 > 0.0))
        throw Error(Errc::InvalidInputs, "sigma2 must be > 0");
    return std::sqrt(sigma2);
}

Scheme parse_scheme(const std::string& s) {
    if (s == "implicit-euler") return Scheme::ImplicitEuler;
    if (s == "crank-nicolson") return Scheme::CrankNicolson;
    throw Error(Errc::InvalidInputs, "scheme must be implicit-euler or crank-nicolson, got " + s);
}

MgParams mg_params_of(const Args& a) { return MgParams(a.r, a.lambda, a.mu, a.zeta, a.alpha, a.rho); }

void echo_mg(ReportBuilder& rb, const MgParams& p) {
    rb.inputs["r"] = p.r;
    rb.inputs["lambda"] = p.lambda;
    rb.inputs["mu"] = p.mu;
    rb.inputs["zeta"] = p.zeta;
    rb.inputs["alpha"] = p.alpha;
    rb.inputs["rho"] = p.rho;
}

void echo_grid(ReportBuilder& rb, const char* key, const Grid1D& g) {
    rb.inputs[key] = ordered_json{{"x_min", g.x_min}, {"x_max", g.x_max}, {"n", g.n}, {"dx", g.dx}};
}

ordered_json report_json(const SymmetryReport& rep) {
    return ordered_json{{"generator", rep.generator_name},
                        {"commutes_with_h", rep.commutes_with_h},
                        {"commutator_norm", rep.commutator_norm},
                        {"commutator_scale", rep.commutator_scale},
                        {"action_norm_ratio", rep.action_norm_ratio},
                        {"broken", rep.broken}};
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

void run_bs_vacuum(const Args& a, ReportBuilder& rb) {
    const BsParams p(a.r, sigma_from_sigma2(a.sigma2));
    rb.inputs["r"] = p.r;
    rb.inputs["sigma"] = p.sigma;
    rb.inputs["sigma2"] = a.sigma2;
    rb.tolerances["stationarity"] = a.tol_stationarity;

    const VacuumSolution sol = bs_vacuum(p);
    const double phi = sol.values.at("phi");
    rb.outputs["phi_vac"] = phi;
    rb.outputs["classification"] = to_string(sol.classification);
    rb.outputs["stable"] = p.stable();
    rb.outputs["potential_at_vacuum"] = bs_potential(p, phi);
    const double grad = bs_potential_gradient(p, phi);
    rb.outputs["gradient_at_vacuum"] = grad;
    rb.check_le("stationarity", std::abs(grad), a.tol_stationarity);
}

void run_mg_vacuum(const Args& a, ReportBuilder& rb) {
    const MgParams p = mg_params_of(a);
    echo_mg(rb, p);
    rb.inputs["y"] = a.y;
    rb.tolerances["stationarity"] = a.tol_stationarity;
    rb.tolerances["ratio_identity"] = a.tol_ratio;

    const VacuumSolution sol = mg_vacuum(p, a.y);
    const double av = mg_coefficient_a(p, a.y);
    const double bv = mg_coefficient_b(p, a.y);
    const double u = sol.values.at("phi_x");
    const double v = sol.values.at("phi_y");
    rb.outputs["a"] = av;
    rb.outputs["b"] = bv;
    rb.outputs["classification"] = to_string(sol.classification);
    rb.outputs["phi_x"] = u;
    rb.outputs["phi_y"] = v;
    rb.outputs["s"] = sol.values.at("S");
    if (sol.ratio) rb.outputs["ratio"] = *sol.ratio;

    const auto grad = mg_potential_gradient(p, a.y, u, v);
    rb.outputs["gradient_x"] = grad.first;
    rb.outputs["gradient_y"] = grad.second;
    rb.check_le("stationarity-x", std::abs(grad.first), a.tol_stationarity);
    rb.check_le("stationarity-y", std::abs(grad.second), a.tol_stationarity);
    rb.check_le("ratio-identity", std::abs(bv * v - av * u), a.tol_ratio);
}

void run_mg_extended_martingale(const Args& a, ReportBuilder& rb) {
    const MgParams p = mg_params_of(a);
    const Grid2D g = make_grid_2d(make_grid_1d(a.x_min, a.x_max, a.nx), make_grid_1d(a.y_min, a.y_max, a.ny));
    echo_mg(rb, p);
    echo_grid(rb, "gx", g.gx);
    echo_grid(rb, "gy", g.gy);
    rb.tolerances["residual"] = a.tol_residual;

    const Field res = extended_martingale_residual(p, g);
    const BandedOperator h = build_mg_hamiltonian(p, g);
    const int margin = h.interior_margin();
    const double worst = interior_norm(res, margin);
    rb.outputs["interior_max_residual"] = worst;
    rb.outputs["interior_margin"] = margin;
    rb.check_le("interior-residual", worst, a.tol_residual);

    CsvTable table;
    table.header = {"x", "y", "residual"};
    for (int ix = 0; ix < g.nx(); ++ix)
        for (int iy = 0; iy < g.ny(); ++iy)
            table.rows.push_back({format_double(g.gx.x(ix)), format_double(g.gy.x(iy)),
                                  format_double(res[g.index(ix, iy)])});
    rb.tables.push_back(std::move(table));
}

void run_constraint_root(const Args& a, ReportBuilder& rb) {
    const MgParams p = mg_params_of(a);
    if (a.bracket.size() != 2)
        throw Error(Errc::InvalidInputs, "--bracket expects two values");
    echo_mg(rb, p);
    rb.inputs["y_lo"] = a.bracket[0];
    rb.inputs["y_hi"] = a.bracket[1];
    rb.tolerances["root_residual_scale"] = a.tol_root;

    const double y_star = solve_constraint_y(p, a.bracket[0], a.bracket[1]);
    const double res = martingale_constraint_residual(p, y_star).residual;
    const double scale = martingale_constraint_scale(p, y_star);
    rb.outputs["y_star"] = y_star;
    rb.outputs["residual_at_root"] = res;
    rb.outputs["residual_scale"] = scale;
    rb.check_le("root-residual", std::abs(res), a.tol_root * scale);
}

void run_symmetry_report(const Args& a, ReportBuilder& rb) {
    rb.inputs["model"] = a.model;
    rb.tolerances["commute_scale"] = kCommuteTolerance;
    rb.tolerances["broken_action_threshold"] = kBrokenActionThreshold;

    std::vector<SymmetryReport> reports;
    if (a.model == "bs") {
        const BsParams p(a.r, sigma_from_sigma2(a.sigma2));
        const Grid1D g = make_grid_1d(a.x_min, a.x_max, a.nx);
        rb.inputs["r"] = p.r;
        rb.inputs["sigma"] = p.sigma;
        echo_grid(rb, "grid", g);
        const BandedOperator h = build_bs_hamiltonian(p, g);
        const Field vac = sample(g, [](double x) { return std::exp(x); });
        rb.inputs["vacuum"] = "exp(x)";
        reports.push_back(broken_generator_report(h, d_dx(g), vac, "p"));
    } else if (a.model == "mg") {
        const MgParams p = mg_params_of(a);
        const Grid2D g =
            make_grid_2d(make_grid_1d(a.x_min, a.x_max, a.nx), make_grid_1d(a.y_min, a.y_max, a.ny));
        echo_mg(rb, p);
        echo_grid(rb, "gx", g.gx);
        echo_grid(rb, "gy", g.gy);
        rb.inputs["extended"] = a.extended;
        rb.inputs["vacuum"] = a.extended ? "exp(x+y)" : "exp(x)";
        const BandedOperator h = build_mg_hamiltonian(p, g);
        const Field vac = a.extended ? sample(g, [](double x, double y) { return std::exp(x + y); })
                                     : sample(g, [](double x, double) { return std::exp(x); });
        reports.push_back(broken_generator_report(h, d_dx(g), vac, "p_x"));
        reports.push_back(broken_generator_report(h, d_dy(g), vac, "p_y"));
    } else {
        throw Error(Errc::InvalidInputs, "model must be bs or mg, got " + a.model);
    }

    ordered_json arr = ordered_json::array();
    CsvTable table;
    table.header = {"generator", "commutes_with_h", "commutator_norm", "action_norm_ratio", "broken"};
    for (const auto& rep : reports) {
        arr.push_back(report_json(rep));
        rb.check_that("consistency-" + rep.generator_name, !rep.broken || rep.commutes_with_h);
        table.rows.push_back({rep.generator_name, rep.commutes_with_h ? "true" : "false",
                              format_double(rep.commutator_norm), format_double(rep.action_norm_ratio),
                              rep.broken ? "true" : "false"});
    }
    rb.outputs["reports"] = std::move(arr);
    rb.tables.push_back(std::move(table));
}

void run_quartic_vacuum(const Args& a, ReportBuilder& rb) {
    const QuarticParams q{a.mu2, a.lam4};
    rb.inputs["mu2"] = q.mu2;
    rb.inputs["lam4"] = q.lam4;
    rb.tolerances["potential_at_root"] = a.tol_consistency;

    const VacuumSolution sol = quartic_vacuum(q);
    const double s = sol.values.at("S");
    rb.outputs["s_plus"] = sol.values.at("s_plus");
    rb.outputs["s_minus"] = sol.values.at("s_minus");
    rb.outputs["s_admissible"] = s;
    rb.outputs["classification"] = to_string(sol.classification);
    rb.outputs["nontrivial_vacuum_flag"] = q.nontrivial_vacuum();
    const double v = q.mu2 * s * s + q.lam4 * s * s * s * s;
    rb.outputs["potential_at_root"] = v;
    const double scale = std::abs(q.mu2) * s * s + std::abs(q.lam4) * s * s * s * s;
    rb.check_le("potential-at-root", std::abs(v), a.tol_consistency * scale);
}

void run_vacuum_manifold(const Args& a, ReportBuilder& rb) {
    const QuarticParams q{a.mu2, a.lam4};
    rb.inputs["mu2"] = q.mu2;
    rb.inputs["lam4"] = q.lam4;
    rb.inputs["y_min"] = a.y_min;
    rb.inputs["y_max"] = a.y_max;
    rb.inputs["count"] = a.count;
    rb.tolerances["norm_consistency"] = a.tol_consistency;
    if (a.count < 0 || a.count > 1000000)
        throw Error(Errc::InvalidInputs, "count must lie in [0, 1000000]");
    if (a.count > 1 && !(a.y_min < a.y_max))
        throw Error(Errc::InvalidInputs, "require y_min < y_max for a sweep");

    std::vector<double> ys;
    ys.reserve(static_cast<std::size_t>(a.count));
    for (int i = 0; i < a.count; ++i)
        ys.push_back(a.count == 1 ? a.y_min : a.y_min + (a.y_max - a.y_min) * i / (a.count - 1));
    const auto pts = vacuum_manifold(q, ys);

    double worst_norm = 0.0;
    bool monotone = true;
    ordered_json arr = ordered_json::array();
    CsvTable table;
    table.header = {"y", "x", "s_norm"};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        arr.push_back(ordered_json{{"y", pt.y}, {"x", pt.x}});
        table.rows.push_back({format_double(pt.y), format_double(pt.x), format_double(pt.s_norm)});
        worst_norm = std::max(worst_norm, std::abs(std::exp(pt.x + pt.y) - pt.s_norm) / pt.s_norm);
        if (i > 0 && !(pt.x < pts[i - 1].x)) monotone = false;
    }
    rb.outputs["s_norm"] = pts.empty() ? std::sqrt(-q.mu2 / q.lam4) : pts.front().s_norm;
    rb.outputs["points"] = std::move(arr);
    rb.check_le("norm-consistency", worst_norm, a.tol_consistency);
    rb.check_that("monotone-decreasing", monotone);
    rb.tables.push_back(std::move(table));
}

void run_price(const Args& a, ReportBuilder& rb) {
    const BsParams p(a.r, sigma_from_sigma2(a.sigma2));
    const Grid1D g = make_grid_1d(a.x_min, a.x_max, a.nx);
    const EvolutionConfig cfg{a.maturity, a.steps, parse_scheme(a.scheme), Grid(g)};
    rb.inputs["r"] = p.r;
    rb.inputs["sigma"] = p.sigma;
    rb.inputs["strike"] = a.strike;
    rb.inputs["x0"] = a.x0;
    echo_grid(rb, "grid", g);
    rb.inputs["maturity"] = cfg.maturity;
    rb.inputs["steps"] = cfg.steps;
    rb.inputs["scheme"] = a.scheme;
    rb.tolerances["rel_error"] = a.tol_rel_error;

    const PricingResult res = price_european_call(p, g, a.strike, cfg, a.x0);
    rb.outputs["spot_price"] = res.spot_price;
    rb.outputs["oracle_price"] = res.oracle_price;
    rb.outputs["rel_error"] = res.rel_error;
    rb.check_le("rel-error", res.rel_error, a.tol_rel_error);

    CsvTable table;
    table.header = {"x", "value"};
    for (int i = 0; i < g.n; ++i)
        table.rows.push_back({format_double(g.x(i)), format_double(res.values[static_cast<std::size_t>(i)])});
    rb.tables.push_back(std::move(table));
}

void run_martingale_check(const Args& a, ReportBuilder& rb) {
    rb.inputs["model"] = a.model;
    rb.inputs["maturity"] = a.maturity;
    rb.inputs["steps"] = a.steps;
    rb.inputs["scheme"] = a.scheme;
    rb.tolerances["deviation"] = a.tol_deviation;

    double deviation = 0.0;
    if (a.model == "bs") {
        const BsParams p(a.r, sigma_from_sigma2(a.sigma2));
        const Grid1D g = make_grid_1d(a.x_min, a.x_max, a.nx);
        rb.inputs["r"] = p.r;
        rb.inputs["sigma"] = p.sigma;
        echo_grid(rb, "grid", g);
        const EvolutionConfig cfg{a.maturity, a.steps, parse_scheme(a.scheme), Grid(g)};
        const BandedOperator h = build_bs_hamiltonian(p, g);
        deviation = martingale_evolution_check(h, sample(g, [](double x) { return std::exp(x); }), cfg);
    } else if (a.model == "mg") {
        const MgParams p = mg_params_of(a);
        const Grid2D g =
            make_grid_2d(make_grid_1d(a.x_min, a.x_max, a.nx), make_grid_1d(a.y_min, a.y_max, a.ny));
        echo_mg(rb, p);
        echo_grid(rb, "gx", g.gx);
        echo_grid(rb, "gy", g.gy);
        const EvolutionConfig cfg{a.maturity, a.steps, parse_scheme(a.scheme), Grid(g)};
        const BandedOperator h = build_mg_hamiltonian(p, g);
        deviation =
            martingale_evolution_check(h, sample(g, [](double x, double y) { return std::exp(x + y); }), cfg);
    } else {
        throw Error(Errc::InvalidInputs, "model must be bs or mg, got " + a.model);
    }
    rb.outputs["deviation"] = deviation;
    rb.check_le("deviation", deviation, a.tol_deviation);
}

// ---------------------------------------------------------------------------
// option registration
// ---------------------------------------------------------------------------

void add_io_options(CLI::App* cmd, Io& io, bool with_csv) {
    cmd->add_option("--config", io.config_path, "JSON config file; flags override its values");
    cmd->add_option("--out", io.out_path, "write the JSON report here instead of stdout");
    if (with_csv) cmd->add_option("--csv", io.csv_path, "write the tabular output as CSV");
}

void add_bs_params(OptionSet& os, Args& a) {
    os.number("--r", a.r, "r", "risk-free rate");
    os.number("--sigma2", a.sigma2, "sigma2", "volatility squared (sigma^2 = e^y convention)");
}

void add_mg_drift_params(OptionSet& os, Args& a) {
    os.number("--lambda", a.lambda, "lambda", "volatility drift offset");
    os.number("--mu", a.mu, "mu", "volatility drift slope");
    os.number("--zeta", a.zeta, "zeta", "volatility of volatility");
    os.number("--alpha", a.alpha, "alpha", "volatility exponent");
    os.number("--rho", a.rho, "rho", "price-volatility correlation");
}

void add_mg_params(OptionSet& os, Args& a) {
    os.number("--r", a.r, "r", "risk-free rate");
    add_mg_drift_params(os, a);
}

// for subcommands accepting either model: --r and --sigma2 plus the MG drift set
void add_model_params(OptionSet& os, Args& a) {
    add_bs_params(os, a);
    add_mg_drift_params(os, a);
}

void add_grid_1d(OptionSet& os, Args& a, const std::string& cfg_prefix) {
    os.number("--x-min", a.x_min, cfg_prefix + ".x_min", "grid lower bound");
    os.number("--x-max", a.x_max, cfg_prefix + ".x_max", "grid upper bound");
    os.integer("--nx", a.nx, cfg_prefix + ".n", "grid point count");
}

void add_grid_2d(OptionSet& os, Args& a) {
    os.number("--x-min", a.x_min, "gx.x_min", "x grid lower bound");
    os.number("--x-max", a.x_max, "gx.x_max", "x grid upper bound");
    os.integer("--nx", a.nx, "gx.n", "x grid point count");
    os.number("--y-min", a.y_min, "gy.x_min", "y grid lower bound");
    os.number("--y-max", a.y_max, "gy.x_max", "y grid upper bound");
    os.integer("--ny", a.ny, "gy.n", "y grid point count");
}

void add_evolution(OptionSet& os, Args& a) {
    os.number("--maturity", a.maturity, "maturity", "time horizon T");
    os.integer("--steps", a.steps, "steps", "number of implicit time steps");
    os.text("--scheme", a.scheme, "scheme", "implicit-euler or crank-nicolson");
}

struct Command {
    CLI::App* app = nullptr;
    Args args;
    Io io;
    OptionSet opts;
    std::function<void(const Args&, ReportBuilder&)> body;
    std::string name;
};

}  // namespace

int run(const std::vector<std::string>& args) {
    const auto t0 = std::chrono::steady_clock::now();

    CLI::App app{"martingale vacua, broken symmetry generators and pricing kernels "
                 "for the Black-Scholes and Merton-Garman Hamiltonians"};
    app.name("qflab");
    app.require_subcommand(1);

    std::vector<std::unique_ptr<Command>> commands;
    auto make_command = [&](const std::string& name, const std::string& desc, bool with_csv) -> Command& {
        auto cmd = std::make_unique<Command>();
        cmd->name = name;
        cmd->app = app.add_subcommand(name, desc);
        cmd->opts.cmd = cmd->app;
        add_io_options(cmd->app, cmd->io, with_csv);
        commands.push_back(std::move(cmd));
        return *commands.back();
    };

    {
        Command& c = make_command("bs-vacuum", "minimum of the quadratic Black-Scholes potential", false);
        add_bs_params(c.opts, c.args);
        c.opts.number("--tol-stationarity", c.args.tol_stationarity, "tolerances.stationarity",
                      "bound on |dV/dphi| at the vacuum");
        c.body = run_bs_vacuum;
    }
    {
        Command& c = make_command("mg-vacuum", "stationary point of the Merton-Garman potential", false);
        add_mg_params(c.opts, c.args);
        c.opts.number("--y", c.args.y, "y", "log-variance at which the potential is truncated");
        c.args.tol_stationarity = 1e-10;
        c.opts.number("--tol-stationarity", c.args.tol_stationarity, "tolerances.stationarity",
                      "bound on the gradient at the stationary point");
        c.opts.number("--tol-ratio", c.args.tol_ratio, "tolerances.ratio_identity",
                      "bound on |B phi_y - A phi_x|");
        c.body = run_mg_vacuum;
    }
    {
        Command& c = make_command("mg-extended-martingale",
                                  "interior defect of H_MG applied to e^{x+y}", true);
        add_mg_params(c.opts, c.args);
        c.args.x_min = -1.0;
        c.args.x_max = 1.0;
        c.args.nx = 201;
        c.args.ny = 201;
        add_grid_2d(c.opts, c.args);
        c.opts.number("--tol-residual", c.args.tol_residual, "tolerances.residual",
                      "bound on the interior residual");
        c.body = run_mg_extended_martingale;
    }
    {
        Command& c = make_command("constraint-root",
                                  "log-variance solving the extended martingale constraint", false);
        add_mg_params(c.opts, c.args);
        c.opts.cmd->add_option("--bracket", c.args.bracket, "bracket [y_lo y_hi] with a sign change")
            ->expected(2);
        c.opts.entries.push_back({c.opts.cmd->get_option("--bracket"), "y_lo",
                                  [&c](const nlohmann::json& v) { c.args.bracket[0] = v.get<double>(); }});
        c.opts.entries.push_back({c.opts.cmd->get_option("--bracket"), "y_hi",
                                  [&c](const nlohmann::json& v) { c.args.bracket[1] = v.get<double>(); }});
        c.opts.number("--tol-root", c.args.tol_root, "tolerances.root_residual_scale",
                      "residual bound relative to the constraint scale");
        c.body = run_constraint_root;
    }
    {
        Command& c = make_command("symmetry-report",
                                  "commutator and vacuum-action ledger for the momentum generators", true);
        c.opts.text("--model", c.args.model, "model", "bs or mg");
        add_model_params(c.opts, c.args);
        c.args.x_min = -1.0;
        c.args.x_max = 1.0;
        c.args.nx = 41;
        c.args.ny = 41;
        add_grid_2d(c.opts, c.args);
        c.opts.toggle("--extended", c.args.extended, "extended",
                      "use the extended martingale e^{x+y} as the vacuum (mg only)");
        c.body = run_symmetry_report;
    }
    {
        Command& c = make_command("quartic-vacuum", "fixed-norm vacuum of the quartic extension", false);
        c.opts.number("--mu2", c.args.mu2, "mu2", "quadratic coefficient");
        c.opts.number("--lam4", c.args.lam4, "lam4", "quartic coefficient");
        c.opts.number("--tol-potential", c.args.tol_consistency, "tolerances.potential_at_root",
                      "relative bound on V_new at the root");
        c.body = run_quartic_vacuum;
    }
    {
        Command& c = make_command("vacuum-manifold", "price-volatility equilibrium curve e^{x+y} = s_norm", true);
        c.opts.number("--mu2", c.args.mu2, "mu2", "quadratic coefficient");
        c.opts.number("--lam4", c.args.lam4, "lam4", "quartic coefficient");
        c.opts.number("--y-min", c.args.y_min, "y_min", "sweep start");
        c.opts.number("--y-max", c.args.y_max, "y_max", "sweep end");
        c.opts.integer("--count", c.args.count, "count", "number of sweep points");
        c.opts.number("--tol-norm", c.args.tol_consistency, "tolerances.norm_consistency",
                      "relative bound on e^{x+y} - s_norm");
        c.body = run_vacuum_manifold;
    }
    {
        Command& c = make_command("price", "European call under the discrete pricing kernel", true);
        add_bs_params(c.opts, c.args);
        c.opts.number("--strike", c.args.strike, "strike", "strike price");
        c.opts.number("--x0", c.args.x0, "x0", "log-price at which to read the value");
        c.args.x_min = 4.6051701859880918 - 2.0;
        c.args.x_max = 4.6051701859880918 + 2.0;
        c.args.nx = 801;
        add_grid_1d(c.opts, c.args, "grid");
        c.args.steps = 400;
        add_evolution(c.opts, c.args);
        c.opts.number("--tol-rel-error", c.args.tol_rel_error, "tolerances.rel_error",
                      "bound on |spot - oracle| / oracle");
        c.body = run_price;
    }
    {
        Command& c = make_command("martingale-check",
                                  "deviation of the evolved vacuum from itself", false);
        c.opts.text("--model", c.args.model, "model", "bs or mg");
        add_model_params(c.opts, c.args);
        c.args.y_min = -0.1;
        c.args.y_max = 0.1;
        c.args.nx = 401;
        c.args.ny = 41;
        add_grid_2d(c.opts, c.args);
        add_evolution(c.opts, c.args);
        c.opts.number("--tol-deviation", c.args.tol_deviation, "tolerances.deviation",
                      "bound on the interior relative deviation");
        c.body = run_martingale_check;
    }

    std::vector<const char*> argv;
    argv.push_back("qflab");
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "qflab: " << e.what() << "\n";
        return 2;
    }

    Command* chosen = nullptr;
    for (auto& c : commands) {
        if (c->app->parsed()) {
            chosen = c.get();
            break;
        }
    }
    if (!chosen) {
        std::cerr << "qflab: no subcommand\n";
        return 2;
    }

    ordered_json report;
    report["command"] = chosen->name;
    report["version"] = kVersion;

    auto finish = [&](int code) -> int {
        report["meta"] = ordered_json{
            {"timestamp", utc_timestamp()},
            {"duration_seconds",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
        try {
            write_text(dump_report(report), chosen->io.out_path);
        } catch (const Error& e) {
            std::cerr << "qflab: " << e.what() << "\n";
            return 2;
        }
        return code;
    };

    ReportBuilder rb;
    try {
        if (!chosen->io.config_path.empty()) {
            const nlohmann::json cfg = load_config(chosen->io.config_path);
            chosen->opts.merge(cfg);
        }
        chosen->body(chosen->args, rb);
        if (!chosen->io.csv_path.empty()) {
            if (rb.tables.empty())
                throw Error(Errc::InvalidInputs, "this subcommand produces no CSV table");
            emit_csv(rb.tables.front(), chosen->io.csv_path);
        }
    } catch (const Error& e) {
        report["error"] = ordered_json{{"code", e.code_name()}, {"message", e.what()}};
        const int code = e.numerical() ? 3 : 2;
        return finish(code);
    } catch (const std::exception& e) {
        report["error"] = ordered_json{{"code", "internal"}, {"message", e.what()}};
        return finish(2);
    }

    report["inputs"] = std::move(rb.inputs);
    report["tolerances"] = std::move(rb.tolerances);
    report["outputs"] = std::move(rb.outputs);
    report["assertions"] = rb.assertions;
    const bool passed = rb.all_passed();
    report["passed"] = passed;
    return finish(passed ? 0 : 1);
}

}  // namespace qflab::cli
