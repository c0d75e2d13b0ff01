// Command-line front end: coefficients, local basis, exact diagonalisation,
// DMRG ground states, measurements, fits, band data, sweeps and bisection.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include "zigzag/analysis.hpp"
#include "zigzag/bands.hpp"
#include "zigzag/checkpoint.hpp"
#include "zigzag/ed_oracle.hpp"
#include "zigzag/localbasis.hpp"
#include "zigzag/model.hpp"
#include "zigzag/observables.hpp"
#include "zigzag/sweep.hpp"

using namespace zigzag;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const FitResult& f) {
    json values = json::object(), errors = json::object();
    for (const auto& [k, v] : f.values) values[k] = num(v);
    for (const auto& [k, v] : f.uncertainties) errors[k] = num(v);
    return {{"model", f.model_tag}, {"values", values}, {"uncertainties", errors}, {"residual_norm", f.residual_norm}};
}

json to_json(const Extrapolation& e) {
    return {{"xi_inf", e.xi_inf}, {"uncertainty", e.uncertainty}, {"intercepts", e.intercepts}};
}

json to_json(const BoundaryPoint& b) {
    json probes = json::array();
    for (const BoundaryProbe& p : b.probes) {
        json xi = json::array();
        for (const auto& [L, x] : p.xi) xi.push_back({L, x});
        probes.push_back({{"omega2", p.omega2},
                          {"phase", to_string(p.phase)},
                          {"extrapolation", to_json(p.extrapolation)},
                          {"xi_L", xi}});
    }
    return {{"g", b.g}, {"omega2_c", b.omega2_c}, {"uncertainty", b.uncertainty}, {"probes", probes}};
}

void emit(const std::string& path, const json& j) {
    if (path.empty() || path == "-")
        std::cout << j.dump(2) << '\n';
    else
        save_json(path, j);
}

// Writes a CSV next to `out` (or to stdout when out is empty) with the given suffix.
std::ofstream csv_beside(const std::string& out, const std::string& suffix) {
    if (out.empty() || out == "-") return {};
    fs::path p(out);
    p.replace_extension();
    std::ofstream f(p.string() + suffix);
    f.precision(17);
    return f;
}

struct ModelArgs {
    double alpha = 1.0, g = 0.1, omega2 = 1.0;
    int d = 14;

    void add(CLI::App* app) {
        app->add_option("--alpha", alpha, "Interaction exponent")->capture_default_str();
        app->add_option("--g", g, "Effective Planck constant")->required();
        app->add_option("--omega2", omega2, "Squared transverse trap frequency")->required();
        app->add_option("--d", d, "Local levels kept")->capture_default_str();
    }
    ModelParameters params() const {
        ModelParameters p;
        p.alpha = alpha;
        p.g = g;
        p.omega2 = omega2;
        return p;
    }
};

std::vector<RunRecord> load_records(const std::vector<std::string>& files) {
    std::vector<RunRecord> out;
    for (const auto& f : files) out.push_back(load_run_record(f));
    return out;
}

void analyze_extrapolate(const std::vector<std::string>& files, const std::string& out, double floor) {
    std::map<std::tuple<double, double, double>, std::vector<std::pair<int, double>>> groups;
    for (const RunRecord& r : load_records(files))
        groups[{r.point.alpha, r.point.g, r.point.omega2}].emplace_back(r.point.L, r.observables.xi_L);
    json result = json::array();
    auto csv = csv_beside(out, "_xi.csv");
    if (csv) csv << "alpha,g,omega2,inv_L,xi_L\n";
    for (auto& [key, pts] : groups) {
        const auto& [alpha, g, w] = key;
        std::sort(pts.begin(), pts.end());
        json row = {{"alpha", alpha}, {"g", g}, {"omega2", w}};
        json xs = json::array();
        for (const auto& [L, x] : pts) {
            xs.push_back({L, x});
            if (csv) csv << alpha << ',' << g << ',' << w << ',' << 1.0 / L << ',' << x << '\n';
        }
        row["xi_L"] = xs;
        if (pts.size() >= 2) {
            const Extrapolation e = extrapolate_thermodynamic(pts);
            row["extrapolation"] = to_json(e);
            row["phase"] = to_string(classify_phase(e.xi_inf, e.uncertainty, floor));
        }
        result.push_back(row);
    }
    emit(out, result);
}

void analyze_corr(const std::vector<std::string>& files, const std::string& out, int min_distance) {
    json result = json::array();
    auto csv = csv_beside(out, "_corr.csv");
    if (csv) csv << "file,dj,G,G_fit\n";
    for (const auto& f : files) {
        const RunRecord r = load_run_record(f);
        const FitResult fit = fit_correlation_decay(r.observables.correlation_profile, min_distance);
        json j = to_json(fit);
        j["file"] = f;
        result.push_back(j);
        if (csv) {
            const double a = fit.value("amplitude"), eta = fit.value("eta"), inv = fit.value("inv_lambda");
            for (const auto& [dj, G] : r.observables.correlation_profile)
                csv << f << ',' << dj << ',' << G << ','
                    << (dj > 0 ? a * std::pow(dj, -eta) * std::exp(-dj * inv) : std::nan("")) << '\n';
        }
    }
    emit(out, result);
}

void analyze_cee(const std::vector<std::string>& files, const std::string& out, int l_min) {
    json result = json::array();
    auto csv = csv_beside(out, "_cee.csv");
    if (csv) csv << "file,l,chord_log,S,S_fit\n";
    for (const auto& f : files) {
        const RunRecord r = load_run_record(f);
        const int L = r.point.L;
        std::vector<std::pair<int, double>> profile;
        for (std::size_t i = 0; i < r.observables.entropy_profile.size(); ++i)
            profile.emplace_back(static_cast<int>(i) + 1, r.observables.entropy_profile[i]);
        const FitResult fit = fit_central_charge(profile, L, l_min);
        json j = to_json(fit);
        j["file"] = f;
        result.push_back(j);
        if (csv) {
            for (const auto& [l, S] : profile) {
                const double x = std::log(L * std::sin(M_PI * l / L));
                csv << f << ',' << l << ',' << x << ',' << S << ','
                    << fit.value("c") / 6.0 * x + fit.value("c_prime") << '\n';
            }
        }
    }
    emit(out, result);
}

void analyze_collapse(const std::vector<std::string>& files, const std::string& out) {
    CurveFamily curves;
    std::set<double> gs;
    for (const RunRecord& r : load_records(files)) {
        curves[r.point.L].emplace_back(r.point.omega2, r.observables.xi_L);
        gs.insert(r.point.g);
    }
    if (gs.size() != 1) throw std::invalid_argument("collapse needs records at a single g");
    for (auto& [L, c] : curves) std::sort(c.begin(), c.end());
    const CollapseResult res = finite_size_collapse(curves);
    const double nu = 1.0 / res.inv_nu;
    json j = {{"g", *gs.begin()},
              {"omega2_c", res.omega_c},
              {"beta_over_nu", res.beta_over_nu},
              {"inv_nu", res.inv_nu},
              {"nu", nu},
              {"beta", res.beta_over_nu * nu},
              {"collapse_cost", res.collapse_cost},
              {"crossing_dispersion", res.crossing_dispersion},
              {"cost_history", res.cost_history}};
    emit(out, j);
    if (auto csv = csv_beside(out, "_collapse.csv")) {
        csv << "L,omega2,xi_L,x_rescaled,y_rescaled\n";
        for (const auto& [L, c] : curves) {
            const auto rs = rescale_curve(c, L, res.omega_c, res.beta_over_nu, res.inv_nu);
            for (std::size_t i = 0; i < c.size(); ++i)
                csv << L << ',' << c[i].first << ',' << c[i].second << ',' << rs[i].first << ',' << rs[i].second
                    << '\n';
        }
    }
}

void analyze_boundary(const std::vector<std::string>& files, const std::string& out, double alpha) {
    const double M1 = onsite_coefficient_M(1, alpha);
    std::vector<std::pair<double, double>> pts;
    json points = json::array();
    for (const auto& f : files) {
        std::ifstream in(f);
        const json j = json::parse(in);
        const auto add = [&](const json& b) {
            pts.emplace_back(b.at("g").get<double>(), M1 - b.at("omega2_c").get<double>());
            points.push_back({{"g", b.at("g")}, {"omega2_c", b.at("omega2_c")}, {"uncertainty", b.at("uncertainty")}});
        };
        if (j.is_array())
            for (const auto& b : j) add(b);
        else
            add(j);
    }
    const FitResult fit = fit_power_law(pts);
    emit(out, {{"M1", M1}, {"points", points}, {"fit", to_json(fit)}, {"model", "omega2_c = M1 - u g^v"}});
    if (auto csv = csv_beside(out, "_boundary.csv")) {
        csv << "g,omega2_c,omega2_fit\n";
        for (const auto& [g, shift] : pts)
            csv << g << ',' << M1 - shift << ',' << M1 - fit.value("u") * std::pow(g, fit.value("v")) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum linear-zigzag chain: local basis, DMRG and finite-size analysis"};
    app.require_subcommand(1);

    // coeffs
    auto* coeffs = app.add_subcommand("coeffs", "Taylor and on-site/coupling coefficients");
    double c_alpha = 1.0;
    int c_qmax = 3;
    coeffs->add_option("--alpha", c_alpha)->capture_default_str();
    coeffs->add_option("--qmax", c_qmax)->capture_default_str();
    coeffs->callback([&] {
        const CoefficientTable t = make_coefficient_table(c_alpha, c_qmax);
        std::printf("q,b_q,M_q,N_q\n");
        for (int q = 1; q <= c_qmax; ++q)
            std::printf("%d,%.17g,%.17g,%.17g\n", q, t.b.at(static_cast<std::size_t>(q)), t.M_at(q), t.N_at(q));
    });

    // local-basis
    auto* lb = app.add_subcommand("local-basis", "Solve the single-site problem and dump the truncated basis");
    ModelArgs lb_model;
    lb_model.add(lb);
    std::string lb_out;
    int lb_samples = 401;
    std::optional<int> lb_points;
    std::optional<double> lb_ymax;
    lb->add_option("--grid-points", lb_points, "Starting grid size of the refinement ladder");
    lb->add_option("--y-max", lb_ymax, "Fixed domain half-width (requires --grid-points)");
    lb->add_option("--out", lb_out, "Output file (stdout when omitted)");
    lb->add_option("--samples", lb_samples, "Wavefunction samples")->capture_default_str();
    lb->callback([&] {
        LocalBasisOptions opts;
        std::optional<GridSpec> grid;
        if (lb_points) opts.initial_points = *lb_points;
        if (lb_ymax) {
            if (!lb_points) throw std::invalid_argument("--y-max requires --grid-points");
            grid = GridSpec{*lb_ymax, *lb_points};
        }
        const LocalBasis b = solve_local_basis(lb_model.params(), lb_model.d, grid, opts);
        if (lb_out.empty()) {
            write_local_basis(std::cout, b, lb_samples);
        } else {
            std::ofstream f(lb_out);
            write_local_basis(f, b, lb_samples);
        }
    });

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Exact diagonalisation of a short chain");
    ModelArgs or_model;
    or_model.add(oracle);
    int or_L = 4;
    std::string or_out;
    oracle->add_option("-L,--length", or_L)->required();
    oracle->add_option("--out", or_out);
    oracle->callback([&] {
        const LocalBasis b = solve_local_basis(or_model.params(), or_model.d);
        const DenseSpectrum s = exact_ground_state(b, coupling_coefficient_N(1, or_model.alpha), or_L);
        json corr = json::array();
        for (int j = 0; j < or_L; ++j) {
            json row = json::array();
            for (int k = 0; k < or_L; ++k)
                row.push_back(j == k ? exact_expectation(s, {j}, {b.W}) : exact_expectation(s, {j, k}, {b.Y, b.Y}));
            corr.push_back(row);
        }
        emit(or_out, {{"L", or_L},
                      {"d", or_model.d},
                      {"dimension", s.dimension},
                      {"ground_energy", s.ground_energy},
                      {"first_gap", s.first_gap},
                      {"residual", s.residual},
                      {"yy", corr}});
    });

    // ground
    auto* ground = app.add_subcommand("ground", "DMRG ground state and observables of one chain");
    ModelArgs gr_model;
    gr_model.add(ground);
    RunSettings gr;
    int gr_L = 32;
    std::string gr_init = "staggered", gr_out, gr_ckpt;
    ground->add_option("-L,--length", gr_L)->required();
    ground->add_option("-D,--D-max", gr.D_max)->capture_default_str();
    ground->add_option("--D-init", gr.D_init)->capture_default_str();
    ground->add_option("--sweeps", gr.sweep_limit, "Sweep limit")->capture_default_str();
    ground->add_option("--tol", gr.energy_tol, "Relative energy change per sweep")->capture_default_str();
    ground->add_option("--discard", gr.discard_tol, "Discarded weight per cut")->capture_default_str();
    ground->add_option("--init", gr_init, "staggered | linear | random")->capture_default_str();
    ground->add_option("--seed", gr.seed)->capture_default_str();
    ground->add_option("--corr-max", gr.corr_max);
    ground->add_option("--pops-site", gr.pops_site);
    ground->add_option("--out", gr_out, "Run record JSON (stdout when omitted)");
    ground->add_option("--checkpoint", gr_ckpt, "MPS checkpoint, written every sweep and resumed from");
    ground->callback([&] {
        gr.d = gr_model.d;
        gr.init = parse_init_strategy(gr_init);
        LocalBasisCache cache;
        const RunRecord r =
            run_point({gr_model.alpha, gr_model.g, gr_model.omega2, gr_L}, gr, cache, gr_ckpt);
        emit(gr_out, to_json(r));
    });

    // measure
    auto* measure = app.add_subcommand("measure", "Observables of a checkpointed state");
    std::string me_state, me_out;
    ObservableOptions me_opts;
    measure->add_option("--state", me_state, "MPS checkpoint")->required()->check(CLI::ExistingFile);
    measure->add_option("--out", me_out);
    measure->add_option("--corr-max", me_opts.corr_max);
    measure->add_option("--pops-site", me_opts.pops_site);
    measure->callback([&] {
        const Checkpoint cp = read_checkpoint(me_state);
        const json meta = json::parse(cp.metadata);
        for (const char* key : {"alpha", "g", "omega2"})
            if (!meta.contains(key)) throw std::runtime_error(std::string("checkpoint metadata lacks ") + key);
        ModelParameters p;
        p.alpha = meta.at("alpha").get<double>();
        p.g = meta.at("g").get<double>();
        p.omega2 = meta.at("omega2").get<double>();
        const LocalBasis b = solve_local_basis(p, cp.state.d());
        const ObservableSet o = measure_observables(cp.state, b.Y, me_opts);
        json corr = json::array();
        for (const auto& [dj, G] : o.correlation_profile) corr.push_back({dj, G});
        emit(me_out, {{"xi_L", o.xi_L},
                      {"magnetization", o.magnetization},
                      {"y_profile", o.y_profile},
                      {"entropy_profile", o.entropy_profile},
                      {"correlation_profile", corr},
                      {"pops_site", o.pops_site},
                      {"populations", o.populations},
                      {"population_decay", num(o.population_decay)}});
        if (auto csv = csv_beside(me_out, "_entropy.csv")) {
            csv << "l,S\n";
            for (std::size_t i = 0; i < o.entropy_profile.size(); ++i) csv << i + 1 << ',' << o.entropy_profile[i] << '\n';
        }
        if (auto csv = csv_beside(me_out, "_corr.csv")) {
            csv << "dj,G\n";
            for (const auto& [dj, G] : o.correlation_profile) csv << dj << ',' << G << '\n';
        }
    });

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Fits over run records");
    analyze->require_subcommand(1);
    std::vector<std::string> an_in;
    std::string an_out;
    double an_floor = 1e-3, an_alpha = 1.0;
    int an_min_distance = 2, an_l_min = 4;
    auto add_io = [&](CLI::App* sub) {
        sub->add_option("--in", an_in, "Input files")->required()->expected(1, -1)->check(CLI::ExistingFile);
        sub->add_option("--out", an_out, "Output JSON; plot CSVs are written beside it");
    };
    auto* an_ex = analyze->add_subcommand("extrapolate", "Thermodynamic extrapolation and phase per (g, omega2)");
    add_io(an_ex);
    an_ex->add_option("--floor", an_floor)->capture_default_str();
    an_ex->callback([&] { analyze_extrapolate(an_in, an_out, an_floor); });
    auto* an_corr = analyze->add_subcommand("corr", "Power law times exponential fit of the bulk correlator");
    add_io(an_corr);
    an_corr->add_option("--min-distance", an_min_distance)->capture_default_str();
    an_corr->callback([&] { analyze_corr(an_in, an_out, an_min_distance); });
    auto* an_collapse = analyze->add_subcommand("collapse", "Finite-size scaling collapse of xi_L");
    add_io(an_collapse);
    an_collapse->callback([&] { analyze_collapse(an_in, an_out); });
    auto* an_cee = analyze->add_subcommand("cee", "Central charge from the entanglement entropy profile");
    add_io(an_cee);
    an_cee->add_option("--l-min", an_l_min)->capture_default_str();
    an_cee->callback([&] { analyze_cee(an_in, an_out, an_l_min); });
    auto* an_bd = analyze->add_subcommand("boundary", "Power-law fit M1 - omega2_c = u g^v over boundary points");
    add_io(an_bd);
    an_bd->add_option("--alpha", an_alpha)->capture_default_str();
    an_bd->callback([&] { analyze_boundary(an_in, an_out, an_alpha); });

    // bands
    auto* bands = app.add_subcommand("bands", "Long- and short-range scattering kernels along a path");
    int bd_q = 1, bd_samples = 201;
    double bd_alpha = 1.0;
    std::string bd_path = "line1d", bd_out;
    bands->add_option("--q", bd_q)->capture_default_str();
    bands->add_option("--alpha", bd_alpha)->capture_default_str();
    bands->add_option("--path", bd_path, "line1d | gamma-x-m")->capture_default_str();
    bands->add_option("--samples", bd_samples)->capture_default_str();
    bands->add_option("--out", bd_out, "CSV file (stdout when omitted)");
    bands->callback([&] {
        const auto samples = sample_band_path(bd_q, bd_alpha, parse_band_path(bd_path), bd_samples);
        if (bd_out.empty()) {
            write_band_csv(std::cout, bd_q, bd_alpha, samples);
        } else {
            std::ofstream f(bd_out);
            write_band_csv(f, bd_q, bd_alpha, samples);
        }
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
    std::string sw_config;
    std::optional<int> sw_jobs;
    bool sw_resume = false;
    sweep->add_option("--config", sw_config, "JSON sweep configuration")->required()->check(CLI::ExistingFile);
    sweep->add_option("--jobs", sw_jobs, "Worker count (overrides the config)");
    sweep->add_flag("--resume", sw_resume, "Skip points with an existing record");
    sweep->callback([&] {
        SweepConfig c = load_sweep_config(sw_config);
        if (sw_jobs) c.jobs = *sw_jobs;
        if (sw_resume) c.resume = true;
        c.validate();
        const SweepOutcome o = run_sweep(c);
        std::cout << "executed " << o.executed << ", skipped " << o.skipped << ", failed " << o.failed << '\n';
        if (o.failed > 0) throw CLI::RuntimeError(2);
    });

    // phase-boundary
    auto* pb = app.add_subcommand("phase-boundary", "Bisect the critical omega2 at each g of a configuration");
    std::string pb_config, pb_out;
    BisectionControls pb_ctl;
    pb->add_option("--config", pb_config, "JSON sweep configuration (L_values, run settings, output_dir)")
        ->required()
        ->check(CLI::ExistingFile);
    pb->add_option("--lo", pb_ctl.lo, "Lower omega2 bracket")->capture_default_str();
    pb->add_option("--hi", pb_ctl.hi, "Upper omega2 bracket")->capture_default_str();
    pb->add_option("--width", pb_ctl.target_width, "Target bracket width")->capture_default_str();
    pb->add_option("--max-probes", pb_ctl.max_probes)->capture_default_str();
    pb->add_option("--floor", pb_ctl.floor)->capture_default_str();
    pb->add_option("--out", pb_out);
    pb->callback([&] {
        const SweepConfig c = load_sweep_config(pb_config);
        LocalBasisCache cache;
        json result = json::array();
        for (double g : c.g_values) {
            BisectionControls ctl = pb_ctl;
            ctl.g = g;
            result.push_back(to_json(phase_boundary(c, ctl, cache)));
        }
        emit(pb_out, result);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
