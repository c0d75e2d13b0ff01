#include "zigzag/ed_oracle.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "zigzag/lanczos.hpp"
#include "zigzag/localbasis.hpp"

namespace zigzag {

namespace {

long checked_dimension(int d, int L) {
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    const double dim = std::pow(static_cast<double>(d), L);
    if (dim > static_cast<double>(kOracleMaxDimension))
        throw std::length_error("d^L exceeds the exact-diagonalisation resource guard (2^22)");
    return static_cast<long>(dim);
}

// out (+)= op acting on `site` of psi.
void apply_on_site(const Eigen::VectorXd& psi, int d, int L, int site, const Eigen::MatrixXd& op,
                   Eigen::VectorXd& out, bool accumulate, double scale) {
    const long inner = static_cast<long>(std::pow(static_cast<double>(d), site));
    const long outer = static_cast<long>(std::pow(static_cast<double>(d), L - site - 1));
    for (long o = 0; o < outer; ++o) {
        const long base = o * inner * d;
        Eigen::Map<const Eigen::MatrixXd> x(psi.data() + base, inner, d);
        Eigen::Map<Eigen::MatrixXd> y(out.data() + base, inner, d);
        if (accumulate)
            y.noalias() += scale * x * op.transpose();
        else
            y.noalias() = scale * x * op.transpose();
    }
}

}  // namespace

Eigen::VectorXd apply_site_operator(const Eigen::VectorXd& psi, int d, int L, int site, const Eigen::MatrixXd& op) {
    if (site < 0 || site >= L) throw std::out_of_range("site index out of range");
    Eigen::VectorXd out(psi.size());
    apply_on_site(psi, d, L, site, op, out, false, 1.0);
    return out;
}

void apply_lattice_hamiltonian(const LocalBasis& basis, double N1, int L, const Eigen::VectorXd& in,
                               Eigen::VectorXd& out) {
    const int d = basis.d;
    checked_dimension(d, L);
    out.setZero(in.size());
    const Eigen::MatrixXd A = basis.A();
    for (int j = 0; j < L; ++j) {
        // (y_j + y_{j+1})^2 / 2 per bond puts W/2 on each end of every bond.
        const double bonds = (j > 0 ? 1.0 : 0.0) + (j + 1 < L ? 1.0 : 0.0);
        const Eigen::MatrixXd h = A + 0.5 * bonds * N1 * basis.W;
        apply_on_site(in, d, L, j, h, out, true, 1.0);
    }
    Eigen::VectorXd tmp(in.size());
    for (int j = 0; j + 1 < L; ++j) {
        apply_on_site(in, d, L, j, basis.Y, tmp, false, 1.0);
        apply_on_site(tmp, d, L, j + 1, basis.Y, out, true, N1);
    }
}

DenseSpectrum exact_ground_state(const LocalBasis& basis, double N1, int L, const OracleOptions& options) {
    const long dim = checked_dimension(basis.d, L);
    DenseSpectrum out;
    out.L = L;
    out.d = basis.d;
    out.dimension = dim;

    const MatVec apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& res) {
        apply_lattice_hamiltonian(basis, N1, L, in, res);
    };
    LanczosOptions lo;
    lo.tol = options.tol;
    lo.krylov_dim = 60;
    lo.max_restarts = 400;

    // Start from the uncoupled ground state plus a small generic admixture.
    Eigen::VectorXd start = Eigen::VectorXd::Constant(dim, 1e-3);
    start(0) = 1.0;
    const LanczosResult ground = lanczos_lowest(apply, start, lo);
    if (!ground.converged) throw std::runtime_error("exact diagonalisation did not converge");
    out.ground_energy = ground.eigenvalue;
    out.ground_vector = ground.vector;
    out.residual = ground.residual;

    if (options.compute_gap && dim > 1) {
        Eigen::VectorXd excited_start = Eigen::VectorXd::LinSpaced(dim, -1.0, 1.0);
        const LanczosResult excited = lanczos_lowest(apply, excited_start, lo, {ground.vector});
        if (!excited.converged) throw std::runtime_error("exact diagonalisation of the first gap did not converge");
        out.first_gap = std::max(0.0, excited.eigenvalue - ground.eigenvalue);
    }
    return out;
}

double exact_expectation(const DenseSpectrum& spectrum, const std::vector<int>& sites,
                         const std::vector<Eigen::MatrixXd>& operators) {
    if (sites.size() != operators.size()) throw std::invalid_argument("one operator per site required");
    std::set<int> seen;
    for (int s : sites) {
        if (s < 0 || s >= spectrum.L) throw std::out_of_range("site index out of range");
        if (!seen.insert(s).second) throw std::invalid_argument("sites must be distinct");
    }
    Eigen::VectorXd phi = spectrum.ground_vector;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        if (operators[k].rows() != spectrum.d || operators[k].cols() != spectrum.d)
            throw std::invalid_argument("operator size must be d x d");
        phi = apply_site_operator(phi, spectrum.d, spectrum.L, sites[k], operators[k]);
    }
    return spectrum.ground_vector.dot(phi);
}

}  // namespace zigzag
