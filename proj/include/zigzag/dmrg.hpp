#pragma once

#include <functional>
#include <string>
#include <vector>

#include "zigzag/lattice.hpp"
#include "zigzag/mps.hpp"

namespace zigzag {

struct ConvergenceReport {
    int sweeps_done = 0;
    double final_energy = 0.0;
    double energy_delta_last_sweep = 0.0;  ///< relative change over the last sweep
    double max_discarded_weight = 0.0;     ///< over the last sweep
    double wall_time = 0.0;                ///< seconds
    bool converged = false;
    std::vector<double> sweep_energies;
};

struct DmrgControls {
    int D_max = 50;
    int sweep_limit = 40;
    int min_sweeps = 2;
    double energy_tol = 1e-10;   ///< energy change per full sweep relative to max(|E|, energy_scale(H))
    double discard_tol = 1e-14;  ///< discarded weight allowed per cut
    double lanczos_tol = 1e-12;  ///< final local eigen-residual, relative to max(1, |E|)
    int krylov_dim = 24;
    /// Total reflection parity of the search (0 even, 1 odd). The initial
    /// state is projected onto it. Negative keeps the initial mixture, in
    /// which case the result is the lowest state over the sectors present.
    int target_parity = 0;
    /// Optional bond-dimension ramp: sweep s uses D_schedule[s] while
    /// available, then D_max.
    std::vector<int> D_schedule;
    /// Written atomically after every sweep when non-empty.
    std::string checkpoint_path;
    /// JSON object text merged into the checkpoint header.
    std::string checkpoint_metadata = "{}";
    /// Called after every sweep with the current state (centre on site 0).
    std::function<void(const MatrixProductState&, const ConvergenceReport&)> on_sweep;
};

struct DmrgResult {
    MatrixProductState state;
    ConvergenceReport report;
};

/// L times the spread of the three lowest on-site levels of a bulk site. Floors
/// the denominator of the relative convergence test, since the total energy
/// can pass through zero.
double energy_scale(const LatticeHamiltonian& H);

/// Two-site DMRG ground-state search with open boundaries. The returned
/// state is normalised, with its centre on site 0. Non-convergence within
/// sweep_limit is reported through report.converged, not thrown.
DmrgResult dmrg_ground_state(const LatticeHamiltonian& H, MatrixProductState init, const DmrgControls& controls = {});

/// <psi|H|psi> / <psi|psi> by MPO contraction (no canonical form assumed).
double energy_expectation(const LatticeHamiltonian& H, const MatrixProductState& psi);

}  // namespace zigzag
