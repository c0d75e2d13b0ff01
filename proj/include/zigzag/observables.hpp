#pragma once

// Measurements on a matrix product state. Site indices are 0-based.
//
// Parity-even quantities (pair correlators, populations, entropies) are
// summed over the auxiliary total-parity index; the single-site <Y_j> uses
// the coherent state, so broken-symmetry states show their magnetisation.

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "zigzag/mps.hpp"

namespace zigzag {

class Measurement {
public:
    /// Caches left and right environments of `state` for repeated queries.
    /// The state is copied; Y is the dense d x d position operator.
    Measurement(const MatrixProductState& state, const Eigen::MatrixXd& Y);

    int length() const { return psi_.length(); }
    double norm2() const { return norm2_; }

    /// <A_j> for a dense single-site operator of definite parity.
    double local_expectation(int j, const Eigen::MatrixXd& op) const;
    /// <A_j B_k> for j != k, both of definite parity.
    double pair_expectation(int j, const Eigen::MatrixXd& A, int k, const Eigen::MatrixXd& B) const;

    double y(int j) const;
    /// <Y_j Y_k>; for j == k the on-site second moment <(Y Y)_j>.
    double correlator(int j, int k) const;
    /// <Y_j Y_k> for k = j .. j + count - 1 in one left-to-right pass.
    std::vector<double> correlator_row(int j, int count) const;

    std::vector<double> y_profile() const;

    /// Staggered sum M = sum_j (-1)^j Y_j: returns (<M>, <M^2>) by a single
    /// matrix-product-operator contraction.
    std::pair<double, double> staggered_moments() const;

    /// Diagonal of the reduced density matrix of site j in level order.
    std::vector<double> populations(int j) const;

private:
    MatrixProductState psi_;
    SectorOperator Y_;
    SectorOperator YY_;
    std::vector<std::array<Eigen::MatrixXd, 2>> left_id_;   // bond b, charge 0
    std::vector<std::array<Eigen::MatrixXd, 2>> right_id_;  // bond b, charge 0
    std::vector<std::array<Eigen::MatrixXd, 2>> right_sw_;  // bond b, charge 1
    double norm2_ = 0.0;
};

/// Order parameter sqrt( (1/L^2) sum_{j,k} (-1)^(j-k) <Y_j Y_k> ), including
/// the j == k terms. A radicand below -1e-12 throws; small negative values
/// are clamped to zero.
double structure_factor_order_parameter(const Measurement& m);

/// Same quantity from the explicit O(L^2) double sum of pair correlators.
double structure_factor_by_pairs(const Measurement& m);

/// (dj, G(dj)) for dj = 0..max_distance, where G(dj) = (-1)^dj times the
/// mean connected correlator <Y_j Y_k> - <Y_j><Y_k> over pairs k = j + dj
/// with both ends in the central third [L/3, 2L/3) of the chain.
std::vector<std::pair<int, double>> bulk_correlation_profile(const Measurement& m, int max_distance);

/// Largest admissible max_distance for bulk_correlation_profile.
int bulk_max_distance(int L);

/// -sum s^2 ln s^2 for every cut 1..L-1 from exact Schmidt spectra.
std::vector<double> entanglement_entropy_profile(const MatrixProductState& state);

/// Tightest rate Lambda with p(q) <= exp(-Lambda q) for every level
/// q >= 3 (1-based) whose population exceeds `floor`; NaN when none does.
double population_decay_rate(const std::vector<double>& populations, double floor = 1e-14);

struct ObservableOptions {
    int corr_max = -1;      ///< bulk profile range; negative uses bulk_max_distance
    int pops_site = -1;     ///< negative uses L / 2
};

struct ObservableSet {
    double xi_L = 0.0;
    double magnetization = 0.0;  ///< <M> / L
    std::vector<double> y_profile;
    std::vector<std::pair<int, double>> correlation_profile;
    std::vector<double> entropy_profile;
    int pops_site = 0;
    std::vector<double> populations;
    double population_decay = 0.0;
};

ObservableSet measure_observables(const MatrixProductState& state, const Eigen::MatrixXd& Y,
                                  const ObservableOptions& options = {});

}  // namespace zigzag
