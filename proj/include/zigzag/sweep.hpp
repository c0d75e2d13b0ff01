#pragma once

// Parameter sweeps, run records and phase-boundary bisection.
//
// Output layout under output_dir:
//   g_<g>/omega2_<w2>_L<L>.json   run record
//   g_<g>/omega2_<w2>_L<L>.mps    DMRG checkpoint (written every sweep)
//   manifest.log                  append-only journal: id <TAB> status <TAB> seconds
//   summary.csv                   g, omega2, L, xi_L, energy

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zigzag/analysis.hpp"
#include "zigzag/dmrg.hpp"
#include "zigzag/localbasis.hpp"
#include "zigzag/mps.hpp"
#include "zigzag/observables.hpp"

namespace zigzag {

inline constexpr int kRunRecordFormatVersion = 1;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "ZIGZAG_OUTPUT_DIR";

struct RunSettings {
    int d = 14;
    int D_max = 50;
    int D_init = 8;
    std::vector<int> D_schedule;
    int sweep_limit = 40;
    int min_sweeps = 2;
    double energy_tol = 1e-10;
    double discard_tol = 1e-14;
    double lanczos_tol = 1e-12;
    InitStrategy init = InitStrategy::Staggered;
    std::uint64_t seed = 0;
    int corr_max = -1;
    int pops_site = -1;
};

struct SweepConfig {
    double alpha = 1.0;
    std::vector<double> g_values;
    std::vector<double> omega2_values;
    std::vector<int> L_values;
    RunSettings run;
    int jobs = 1;
    std::string output_dir;
    bool resume = false;

    /// Throws std::invalid_argument on empty grids, jobs < 1 and bad values.
    void validate() const;
};

/// Keys mirror the struct: alpha, g_values, omega2_values, L_values, d,
/// D_max, D_init, D_schedule, sweep_limit, min_sweeps, energy_tol,
/// discard_tol, lanczos_tol, init, seed, corr_max, pops_site, jobs,
/// output_dir, resume. Missing keys keep their defaults; unknown keys are
/// rejected. An empty output_dir falls back to $ZIGZAG_OUTPUT_DIR, then
/// "zigzag-out".
SweepConfig sweep_config_from_json(const nlohmann::json& j);
SweepConfig load_sweep_config(const std::string& path);
nlohmann::json to_json(const SweepConfig& c);

struct PointSpec {
    double alpha = 1.0;
    double g = 0.1;
    double omega2 = 1.0;
    int L = 16;
};

std::string point_id(const PointSpec& p);
/// Record path relative to the output directory.
std::string record_relative_path(const PointSpec& p);

struct RunRecord {
    int format_version = kRunRecordFormatVersion;
    PointSpec point;
    int d = 0;
    int D_max = 0;
    double energy = 0.0;
    ConvergenceReport report;
    ObservableSet observables;
    std::vector<double> local_energies;
    int max_bond_dimension = 0;
    std::string init;
    std::uint64_t seed = 0;
    std::string started;
    std::string finished;
    std::string code_revision;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);
RunRecord load_run_record(const std::string& path);
/// Atomic write (temporary file, then rename).
void save_json(const std::string& path, const nlohmann::json& j);

/// Thread-safe cache of local bases keyed by (alpha, g, omega2, d).
class LocalBasisCache {
public:
    std::shared_ptr<const LocalBasis> get(double alpha, double g, double omega2, int d);

private:
    std::mutex mutex_;
    std::map<std::tuple<double, double, double, int>, std::shared_ptr<const LocalBasis>> cache_;
};

/// Ground state and observables for one point. When `checkpoint_path` is
/// non-empty the state is checkpointed there after every sweep, and an
/// existing checkpoint (from an interrupted run) is used as the starting
/// state. Otherwise `warm_start`, when non-empty, names a checkpoint of a
/// nearby point to start from.
RunRecord run_point(const PointSpec& point, const RunSettings& settings, LocalBasisCache& cache,
                    const std::string& checkpoint_path = "", const std::string& warm_start = "");

struct SweepOutcome {
    int executed = 0;
    int skipped = 0;
    int failed = 0;
};

/// Runs every (g, omega2, L) grid point with a pool of config.jobs workers.
/// With config.resume, points whose record already exists are skipped.
/// Per-point failures are journalled and do not stop the sweep.
SweepOutcome run_sweep(const SweepConfig& config, LocalBasisCache& cache);
SweepOutcome run_sweep(const SweepConfig& config);

/// Parsed manifest: point id -> last status.
std::map<std::string, std::string> read_manifest(const std::string& output_dir);

/// Rewrites summary.csv from every record in the output directory.
void write_summary_csv(const std::string& output_dir);

/// Generic bisection on a two-phase classifier: `is_zigzag(lo)` must differ
/// from `is_zigzag(hi)`. Returns (midpoint, half-width) once hi - lo <= width.
std::pair<double, double> bisect_boundary(const std::function<bool(double)>& is_zigzag, double lo, double hi,
                                          double width, int max_probes = 60);

struct BisectionControls {
    double g = 0.08;
    double lo = 1.3;   ///< omega2 bracket
    double hi = 1.6;
    double target_width = 2e-3;
    int max_probes = 40;
    double floor = 1e-3;  ///< classification floor on xi_inf
};

struct BoundaryProbe {
    double omega2 = 0.0;
    Extrapolation extrapolation;
    Phase phase = Phase::Linear;
    std::vector<std::pair<int, double>> xi;  ///< (L, xi_L)
};

struct BoundaryPoint {
    double g = 0.0;
    double omega2_c = 0.0;
    double uncertainty = 0.0;
    std::vector<BoundaryProbe> probes;
};

/// Classifies one omega2 from the L family of `config` (records reused when
/// present, otherwise computed and stored).
BoundaryProbe classify_point(const SweepConfig& config, double g, double omega2, LocalBasisCache& cache,
                             double floor = 1e-3,
                             const std::function<std::string(int L)>& warm_start = nullptr);

/// Bisection in omega2 at fixed g. Every probe's DMRG run is warm-started
/// from the checkpoint of the nearest completed probe with the same L.
BoundaryPoint phase_boundary(const SweepConfig& config, const BisectionControls& controls, LocalBasisCache& cache);

/// Revision string compiled into the binary.
std::string code_revision();

}  // namespace zigzag
