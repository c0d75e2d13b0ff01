#include "zigzag/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "zigzag/checkpoint.hpp"
#include "zigzag/lattice.hpp"
#include "zigzag/model.hpp"

#ifndef ZIGZAG_REVISION
#define ZIGZAG_REVISION "unknown"
#endif

namespace zigzag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double number_or_inf(const json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fixed(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string resolve_output_dir(const std::string& dir) {
    if (!dir.empty()) return dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "zigzag-out";
}

std::mutex journal_mutex;

void journal(const std::string& output_dir, const std::string& id, const std::string& status, double seconds) {
    std::lock_guard<std::mutex> lock(journal_mutex);
    const std::string path = (fs::path(output_dir) / "manifest.log").string();
    std::FILE* f = std::fopen(path.c_str(), "a");
    if (!f) throw std::runtime_error("cannot append to " + path);
    std::string clean = status;
    for (char& c : clean)
        if (c == '\t' || c == '\n') c = ' ';
    std::fprintf(f, "%s\t%s\t%.3f\n", id.c_str(), clean.c_str(), seconds);
    std::fflush(f);
    std::fclose(f);
}

std::vector<PointSpec> grid_points(const SweepConfig& c) {
    std::vector<PointSpec> out;
    for (double g : c.g_values)
        for (double w : c.omega2_values)
            for (int L : c.L_values) out.push_back({c.alpha, g, w, L});
    return out;
}

bool record_usable(const std::string& path) {
    if (!fs::exists(path)) return false;
    try {
        load_run_record(path);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

std::string code_revision() { return ZIGZAG_REVISION; }

void SweepConfig::validate() const {
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    if (g_values.empty() || omega2_values.empty() || L_values.empty())
        throw std::invalid_argument("g_values, omega2_values and L_values must be non-empty");
    for (double g : g_values)
        if (!(g > 0.0)) throw std::invalid_argument("g values must be > 0");
    for (int L : L_values)
        if (L < 2) throw std::invalid_argument("L values must be >= 2");
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    if (run.d < 2) throw std::invalid_argument("d must be >= 2");
    if (run.D_max < 2) throw std::invalid_argument("D_max must be >= 2");
    if (run.D_init < 1) throw std::invalid_argument("D_init must be >= 1");
    if (!(run.energy_tol > 0.0)) throw std::invalid_argument("energy_tol must be > 0");
}

SweepConfig sweep_config_from_json(const json& j) {
    static const std::set<std::string> known = {
        "alpha", "g_values", "omega2_values", "L_values", "d", "D_max", "D_init", "D_schedule", "sweep_limit",
        "min_sweeps", "energy_tol", "discard_tol", "lanczos_tol", "init", "seed", "corr_max", "pops_site", "jobs",
        "output_dir", "resume"};
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw std::invalid_argument("unknown config key: " + key);
    SweepConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("alpha", c.alpha);
    get("g_values", c.g_values);
    get("omega2_values", c.omega2_values);
    get("L_values", c.L_values);
    get("d", c.run.d);
    get("D_max", c.run.D_max);
    get("D_init", c.run.D_init);
    get("D_schedule", c.run.D_schedule);
    get("sweep_limit", c.run.sweep_limit);
    get("min_sweeps", c.run.min_sweeps);
    get("energy_tol", c.run.energy_tol);
    get("discard_tol", c.run.discard_tol);
    get("lanczos_tol", c.run.lanczos_tol);
    if (j.contains("init")) c.run.init = parse_init_strategy(j.at("init").get<std::string>());
    get("seed", c.run.seed);
    get("corr_max", c.run.corr_max);
    get("pops_site", c.run.pops_site);
    get("jobs", c.jobs);
    get("output_dir", c.output_dir);
    get("resume", c.resume);
    c.output_dir = resolve_output_dir(c.output_dir);
    c.validate();
    return c;
}

SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    return sweep_config_from_json(json::parse(in, nullptr, true, true));
}

json to_json(const SweepConfig& c) {
    return {{"alpha", c.alpha},
            {"g_values", c.g_values},
            {"omega2_values", c.omega2_values},
            {"L_values", c.L_values},
            {"d", c.run.d},
            {"D_max", c.run.D_max},
            {"D_init", c.run.D_init},
            {"D_schedule", c.run.D_schedule},
            {"sweep_limit", c.run.sweep_limit},
            {"min_sweeps", c.run.min_sweeps},
            {"energy_tol", c.run.energy_tol},
            {"discard_tol", c.run.discard_tol},
            {"lanczos_tol", c.run.lanczos_tol},
            {"init", to_string(c.run.init)},
            {"seed", c.run.seed},
            {"corr_max", c.run.corr_max},
            {"pops_site", c.run.pops_site},
            {"jobs", c.jobs},
            {"output_dir", c.output_dir},
            {"resume", c.resume}};
}

std::string point_id(const PointSpec& p) {
    return "alpha=" + fixed(p.alpha) + ",g=" + fixed(p.g) + ",omega2=" + fixed(p.omega2) + ",L=" + std::to_string(p.L);
}

std::string record_relative_path(const PointSpec& p) {
    std::string dir = "g_" + fixed(p.g);
    if (p.alpha != 1.0) dir = "alpha_" + fixed(p.alpha) + "/" + dir;
    return dir + "/omega2_" + fixed(p.omega2) + "_L" + std::to_string(p.L) + ".json";
}

json to_json(const RunRecord& r) {
    const ConvergenceReport& c = r.report;
    const ObservableSet& o = r.observables;
    json corr = json::array();
    for (const auto& [dj, G] : o.correlation_profile) corr.push_back({dj, G});
    return {{"format_version", r.format_version},
            {"model", {{"alpha", r.point.alpha}, {"g", r.point.g}, {"omega2", r.point.omega2}, {"order_t", 3}}},
            {"L", r.point.L},
            {"d", r.d},
            {"D_max", r.D_max},
            {"energy", r.energy},
            {"convergence",
             {{"sweeps_done", c.sweeps_done},
              {"final_energy", c.final_energy},
              {"energy_delta_last_sweep", finite_or_null(c.energy_delta_last_sweep)},
              {"max_discarded_weight", c.max_discarded_weight},
              {"wall_time", c.wall_time},
              {"converged", c.converged},
              {"sweep_energies", c.sweep_energies}}},
            {"observables",
             {{"xi_L", o.xi_L},
              {"magnetization", o.magnetization},
              {"y_profile", o.y_profile},
              {"entropy_profile", o.entropy_profile},
              {"correlation_profile", corr},
              {"pops_site", o.pops_site},
              {"populations", o.populations},
              {"population_decay", finite_or_null(o.population_decay)}}},
            {"local_energies", r.local_energies},
            {"max_bond_dimension", r.max_bond_dimension},
            {"init", r.init},
            {"seed", r.seed},
            {"started", r.started},
            {"finished", r.finished},
            {"code_revision", r.code_revision}};
}

RunRecord run_record_from_json(const json& j) {
    RunRecord r;
    r.format_version = j.at("format_version").get<int>();
    if (r.format_version != kRunRecordFormatVersion) throw std::runtime_error("unsupported run record version");
    const json& m = j.at("model");
    r.point = {m.at("alpha").get<double>(), m.at("g").get<double>(), m.at("omega2").get<double>(), j.at("L").get<int>()};
    r.d = j.at("d").get<int>();
    r.D_max = j.at("D_max").get<int>();
    r.energy = j.at("energy").get<double>();
    const json& c = j.at("convergence");
    r.report.sweeps_done = c.at("sweeps_done").get<int>();
    r.report.final_energy = c.at("final_energy").get<double>();
    r.report.energy_delta_last_sweep = number_or_inf(c.at("energy_delta_last_sweep"));
    r.report.max_discarded_weight = c.at("max_discarded_weight").get<double>();
    r.report.wall_time = c.at("wall_time").get<double>();
    r.report.converged = c.at("converged").get<bool>();
    r.report.sweep_energies = c.at("sweep_energies").get<std::vector<double>>();
    const json& o = j.at("observables");
    r.observables.xi_L = o.at("xi_L").get<double>();
    r.observables.magnetization = o.at("magnetization").get<double>();
    r.observables.y_profile = o.at("y_profile").get<std::vector<double>>();
    r.observables.entropy_profile = o.at("entropy_profile").get<std::vector<double>>();
    for (const auto& p : o.at("correlation_profile"))
        r.observables.correlation_profile.emplace_back(p.at(0).get<int>(), p.at(1).get<double>());
    r.observables.pops_site = o.at("pops_site").get<int>();
    r.observables.populations = o.at("populations").get<std::vector<double>>();
    r.observables.population_decay = o.at("population_decay").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                                         : o.at("population_decay").get<double>();
    r.local_energies = j.at("local_energies").get<std::vector<double>>();
    r.max_bond_dimension = j.at("max_bond_dimension").get<int>();
    r.init = j.at("init").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.started = j.at("started").get<std::string>();
    r.finished = j.at("finished").get<std::string>();
    r.code_revision = j.at("code_revision").get<std::string>();
    return r;
}

RunRecord load_run_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run record: " + path);
    return run_record_from_json(json::parse(in));
}

void save_json(const std::string& path, const json& j) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << j.dump(1) << '\n';
        if (!out) throw std::runtime_error("failed writing " + tmp);
    }
    fs::rename(tmp, path);
}

std::shared_ptr<const LocalBasis> LocalBasisCache::get(double alpha, double g, double omega2, int d) {
    const auto key = std::make_tuple(alpha, g, omega2, d);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    ModelParameters p;
    p.alpha = alpha;
    p.g = g;
    p.omega2 = omega2;
    auto basis = std::make_shared<const LocalBasis>(solve_local_basis(p, d));
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(key, std::move(basis)).first->second;
}

RunRecord run_point(const PointSpec& point, const RunSettings& s, LocalBasisCache& cache,
                    const std::string& checkpoint_path, const std::string& warm_start) {
    RunRecord rec;
    rec.started = utc_now();
    rec.point = point;
    rec.d = s.d;
    rec.D_max = s.D_max;
    rec.init = to_string(s.init);
    rec.seed = s.seed;
    rec.code_revision = code_revision();

    const auto basis = cache.get(point.alpha, point.g, point.omega2, s.d);
    const LatticeHamiltonian H = build_lattice_hamiltonian(*basis, coupling_coefficient_N(1, point.alpha), point.L);

    auto usable = [&](const std::string& path) {
        if (path.empty() || !fs::exists(path)) return false;
        try {
            const Checkpoint cp = read_checkpoint(path);
            return cp.state.length() == point.L && cp.state.d() == s.d;
        } catch (const std::exception&) {
            return false;
        }
    };
    MatrixProductState init;
    if (usable(checkpoint_path)) {
        init = read_checkpoint(checkpoint_path).state;
        rec.init = "checkpoint";
    } else if (usable(warm_start)) {
        init = read_checkpoint(warm_start).state;
        rec.init = "warm:" + fs::path(warm_start).filename().string();
    } else {
        init = initialize_state(*basis, point.L, s.D_init, s.init, s.seed);
    }

    DmrgControls c;
    c.D_max = s.D_max;
    c.D_schedule = s.D_schedule;
    c.sweep_limit = s.sweep_limit;
    c.min_sweeps = s.min_sweeps;
    c.energy_tol = s.energy_tol;
    c.discard_tol = s.discard_tol;
    c.lanczos_tol = s.lanczos_tol;
    if (!checkpoint_path.empty()) {
        const fs::path cp(checkpoint_path);
        if (cp.has_parent_path()) fs::create_directories(cp.parent_path());
        c.checkpoint_path = checkpoint_path;
        c.checkpoint_metadata = json{{"point", point_id(point)},
                                     {"alpha", point.alpha},
                                     {"g", point.g},
                                     {"omega2", point.omega2},
                                     {"d", s.d}}
                                    .dump();
    }
    DmrgResult res = dmrg_ground_state(H, std::move(init), c);

    rec.energy = res.report.final_energy;
    rec.report = res.report;
    rec.observables = measure_observables(res.state, basis->Y, {s.corr_max, s.pops_site});
    rec.local_energies.assign(basis->energies.data(), basis->energies.data() + basis->energies.size());
    rec.max_bond_dimension = res.state.max_bond_dimension();
    rec.finished = utc_now();
    return rec;
}

namespace {

// Runs (or reuses) one point and stores its record; returns the record.
RunRecord execute_point(const std::string& out_dir, const PointSpec& p, const RunSettings& s, LocalBasisCache& cache,
                        const std::string& warm_start) {
    const std::string record_path = (fs::path(out_dir) / record_relative_path(p)).string();
    const std::string checkpoint_path = fs::path(record_path).replace_extension(".mps").string();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunRecord rec = run_point(p, s, cache, checkpoint_path, warm_start);
        save_json(record_path, to_json(rec));
        journal(out_dir, point_id(p), "done",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return rec;
    } catch (const std::exception& e) {
        journal(out_dir, point_id(p), std::string("failed: ") + e.what(),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        throw;
    }
}

}  // namespace

SweepOutcome run_sweep(const SweepConfig& config) {
    LocalBasisCache cache;
    return run_sweep(config, cache);
}

SweepOutcome run_sweep(const SweepConfig& config, LocalBasisCache& cache) {
    config.validate();
    const std::string out_dir = resolve_output_dir(config.output_dir);
    fs::create_directories(out_dir);
    save_json((fs::path(out_dir) / "config.json").string(), to_json(config));

    SweepOutcome outcome;
    std::vector<PointSpec> todo;
    for (const PointSpec& p : grid_points(config)) {
        const std::string record_path = (fs::path(out_dir) / record_relative_path(p)).string();
        if (config.resume && record_usable(record_path)) {
            ++outcome.skipped;
            continue;
        }
        if (!config.resume) {
            // A fresh sweep must not continue from stale checkpoints.
            std::error_code ec;
            fs::remove(fs::path(record_path).replace_extension(".mps"), ec);
        }
        todo.push_back(p);
    }

    std::atomic<std::size_t> next{0};
    std::atomic<int> executed{0}, failed{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < todo.size(); i = next++) {
            try {
                execute_point(out_dir, todo[i], config.run, cache, "");
                ++executed;
            } catch (const std::exception&) {
                ++failed;
            }
        }
    };
    const int n = std::min<int>(config.jobs, static_cast<int>(std::max<std::size_t>(todo.size(), 1)));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    outcome.executed = executed;
    outcome.failed = failed;
    write_summary_csv(out_dir);
    return outcome;
}

std::map<std::string, std::string> read_manifest(const std::string& output_dir) {
    std::map<std::string, std::string> out;
    std::ifstream in(fs::path(output_dir) / "manifest.log");
    std::string line;
    while (std::getline(in, line)) {
        const auto a = line.find('\t');
        if (a == std::string::npos) continue;
        const auto b = line.find('\t', a + 1);
        out[line.substr(0, a)] = line.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1);
    }
    return out;
}

void write_summary_csv(const std::string& output_dir) {
    std::vector<RunRecord> rows;
    for (const auto& entry : fs::recursive_directory_iterator(output_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        if (entry.path().filename().string().rfind("omega2_", 0) != 0) continue;
        try {
            rows.push_back(load_run_record(entry.path().string()));
        } catch (const std::exception&) {
        }
    }
    std::sort(rows.begin(), rows.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::make_tuple(a.point.alpha, a.point.g, a.point.omega2, a.point.L) <
               std::make_tuple(b.point.alpha, b.point.g, b.point.omega2, b.point.L);
    });
    std::ostringstream out;
    out << "g,omega2,L,xi_L,energy\n";
    char buf[160];
    for (const RunRecord& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g,%.17g\n", r.point.g, r.point.omega2, r.point.L,
                      r.observables.xi_L, r.energy);
        out << buf;
    }
    const std::string path = (fs::path(output_dir) / "summary.csv").string();
    {
        std::ofstream f(path + ".tmp", std::ios::trunc);
        f << out.str();
    }
    fs::rename(path + ".tmp", path);
}

std::pair<double, double> bisect_boundary(const std::function<bool(double)>& is_zigzag, double lo, double hi,
                                          double width, int max_probes) {
    if (!(hi > lo)) throw std::invalid_argument("bracket must satisfy lo < hi");
    if (!(width > 0.0)) throw std::invalid_argument("target width must be > 0");
    const bool z_lo = is_zigzag(lo);
    if (is_zigzag(hi) == z_lo) throw std::invalid_argument("bracket invalid: same phase at both ends");
    for (int probe = 0; hi - lo > width; ++probe) {
        if (probe == max_probes) throw std::runtime_error("bisection exceeded the probe limit");
        const double mid = 0.5 * (lo + hi);
        (is_zigzag(mid) == z_lo ? lo : hi) = mid;
    }
    return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

BoundaryProbe classify_point(const SweepConfig& config, double g, double omega2, LocalBasisCache& cache, double floor,
                             const std::function<std::string(int)>& warm_start) {
    const std::string out_dir = resolve_output_dir(config.output_dir);
    fs::create_directories(out_dir);
    BoundaryProbe probe;
    probe.omega2 = omega2;
    for (int L : config.L_values) {
        const PointSpec p{config.alpha, g, omega2, L};
        const std::string record_path = (fs::path(out_dir) / record_relative_path(p)).string();
        double xi = 0.0;
        if (record_usable(record_path)) {
            xi = load_run_record(record_path).observables.xi_L;
        } else {
            xi = execute_point(out_dir, p, config.run, cache, warm_start ? warm_start(L) : "").observables.xi_L;
        }
        probe.xi.emplace_back(L, xi);
    }
    probe.extrapolation = extrapolate_thermodynamic(probe.xi);
    probe.phase = classify_phase(probe.extrapolation.xi_inf, probe.extrapolation.uncertainty, floor);
    return probe;
}

BoundaryPoint phase_boundary(const SweepConfig& config, const BisectionControls& b, LocalBasisCache& cache) {
    config.validate();
    const std::string out_dir = resolve_output_dir(config.output_dir);
    BoundaryPoint out;
    out.g = b.g;
    auto warm = [&](double omega2) {
        return [&, omega2](int L) -> std::string {
            double best = std::numeric_limits<double>::infinity();
            std::string path;
            for (const BoundaryProbe& p : out.probes) {
                const PointSpec spec{config.alpha, b.g, p.omega2, L};
                const std::string cp =
                    (fs::path(out_dir) / record_relative_path(spec)).replace_extension(".mps").string();
                if (std::abs(p.omega2 - omega2) < best && fs::exists(cp)) {
                    best = std::abs(p.omega2 - omega2);
                    path = cp;
                }
            }
            return path;
        };
    };
    auto is_zigzag = [&](double omega2) {
        out.probes.push_back(classify_point(config, b.g, omega2, cache, b.floor, warm(omega2)));
        return out.probes.back().phase == Phase::Zigzag;
    };
    const auto [mid, half] = bisect_boundary(is_zigzag, b.lo, b.hi, b.target_width, b.max_probes);
    out.omega2_c = mid;
    out.uncertainty = half;
    return out;
}

}  // namespace zigzag
