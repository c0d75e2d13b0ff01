#include "zigzag/localbasis.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace zigzag {

LocalPotential LocalPotential::from(const ModelParameters& params, const CoefficientTable& coeffs) {
    return {params.g, params.omega2 - coeffs.M_at(1), coeffs.M_at(2)};
}

double LocalPotential::minimum() const {
    if (quadratic >= 0.0 || quartic <= 0.0) return 0.0;
    return -quadratic * quadratic / (8.0 * quartic);
}

double LocalPotential::curvature_frequency() const {
    const double harmonic = quadratic < 0.0 ? std::sqrt(-2.0 * quadratic) : std::sqrt(quadratic);
    const double quartic_scale = std::cbrt(g * std::max(quartic, 0.0));
    return std::max(harmonic, quartic_scale);
}

namespace {

double kinetic(const LocalPotential& v, double h) { return v.g * v.g / (h * h); }

void check_finite(double value, double y) {
    if (!std::isfinite(value))
        throw std::invalid_argument("non-finite potential value at y = " + std::to_string(y));
}

// Lowest `count` eigenpairs of one parity sector on the half grid y_i = i h.
// Even sector: unknowns i = 0..M with psi_{-1} = psi_1, symmetrised by
// psi_0 = sqrt(2) phi_0. Odd sector: unknowns i = 1..M with psi_0 = 0.
struct SectorSolution {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;  // rows indexed by i = 0..M in both sectors
};

SectorSolution solve_sector(const LocalPotential& v, const GridSpec& grid, int parity, int count) {
    const int M = grid.half_points();
    const double h = grid.step();
    const double t = kinetic(v, h);
    const int offset = parity == 0 ? 0 : 1;
    const int n = M + 1 - offset;
    count = std::min(count, n);

    std::vector<double> diag(static_cast<std::size_t>(n));
    std::vector<double> off(static_cast<std::size_t>(std::max(n, 1)), 0.0);
    for (int k = 0; k < n; ++k) {
        const double y = (k + offset) * h;
        const double pot = v(y);
        check_finite(pot, y);
        diag[static_cast<std::size_t>(k)] = t + pot;
        if (k + 1 < n) off[static_cast<std::size_t>(k)] = -0.5 * t;
    }
    if (parity == 0 && n > 1) off[0] = -t / std::sqrt(2.0);

    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, count);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(), 0.0, 0.0, 1, count, 0.0,
                       &found, w.data(), z.data(), n, support.data());
    if (info != 0 || found != count)
        throw std::runtime_error("tridiagonal eigensolver failed (info " + std::to_string(info) + ")");

    SectorSolution out;
    out.energies = w.head(count);
    out.vectors = Eigen::MatrixXd::Zero(M + 1, count);
    const double norm = 1.0 / std::sqrt(2.0 * h);
    for (int c = 0; c < count; ++c) {
        for (int k = 0; k < n; ++k) out.vectors(k + offset, c) = z(k, c) * norm;
        if (parity == 0) out.vectors(0, c) *= std::sqrt(2.0);
    }
    return out;
}

struct RawBasis {
    Eigen::VectorXd energies;
    std::vector<int> parity;
    Eigen::MatrixXd half;
};

RawBasis solve_on_grid(const LocalPotential& v, const GridSpec& grid, int d) {
    const SectorSolution even = solve_sector(v, grid, 0, d);
    const SectorSolution odd = solve_sector(v, grid, 1, d);
    const int M = grid.half_points();

    RawBasis out;
    out.energies.resize(d);
    out.half.resize(M + 1, d);
    out.parity.resize(static_cast<std::size_t>(d));
    Eigen::Index ie = 0, io = 0;
    for (int q = 0; q < d; ++q) {
        const bool take_even =
            io >= odd.energies.size() || (ie < even.energies.size() && even.energies(ie) <= odd.energies(io));
        if (take_even) {
            out.energies(q) = even.energies(ie);
            out.half.col(q) = even.vectors.col(ie++);
            out.parity[static_cast<std::size_t>(q)] = 0;
        } else {
            out.energies(q) = odd.energies(io);
            out.half.col(q) = odd.vectors.col(io++);
            out.parity[static_cast<std::size_t>(q)] = 1;
        }
    }

    // Sign convention: the first non-negligible value on the full grid,
    // scanning from -y_max, is positive.
    for (int q = 0; q < d; ++q) {
        const double sign_left = out.parity[static_cast<std::size_t>(q)] == 0 ? 1.0 : -1.0;
        const double threshold = 1e-6 * out.half.col(q).cwiseAbs().maxCoeff();
        for (int i = M; i >= 0; --i) {
            const double value = sign_left * out.half(i, q);
            if (std::abs(value) > threshold) {
                if (value < 0.0) out.half.col(q) *= -1.0;
                break;
            }
        }
    }
    return out;
}

double max_relative_shift(const Eigen::VectorXd& coarse, const Eigen::VectorXd& fine) {
    const double scale = std::max(coarse.cwiseAbs().maxCoeff(), coarse(coarse.size() - 1) - coarse(0));
    double worst = 0.0;
    for (Eigen::Index q = 0; q < coarse.size(); ++q) {
        const double ref = std::max(std::abs(coarse(q)), scale);
        worst = std::max(worst, std::abs(fine(q) - coarse(q)) / ref);
    }
    return worst;
}

// Tableau on three grids with steps 4h, 2h, h (coarsest first).
template <typename T>
T richardson(const T& c4, const T& c2, const T& c1) {
    const T r_coarse = (4.0 * c2 - c4) / 3.0;
    const T r_fine = (4.0 * c1 - c2) / 3.0;
    return (16.0 * r_fine - r_coarse) / 15.0;
}

GridSpec doubled(const GridSpec& g) { return {g.y_max, 2 * (2 * g.half_points() + 1) + 1}; }

// Coordinate where V(y) reaches `level` (outer turning point).
double turning_point(const LocalPotential& v, double level) {
    const double a = v.quadratic, b = v.quartic;
    if (b > 0.0) return std::sqrt((-a + std::sqrt(a * a + 8.0 * b * level)) / (2.0 * b));
    if (a > 0.0) return std::sqrt(2.0 * level / a);
    throw std::invalid_argument("potential is not confining");
}

double wall_margin_energy(const LocalPotential& v, const LocalBasisOptions& opt) {
    return opt.wall_margin * v.g * v.curvature_frequency();
}

}  // namespace

TridiagonalMatrix build_grid_hamiltonian(const LocalPotential& potential, const GridSpec& grid) {
    if (grid.points < 64) throw std::invalid_argument("grid needs at least 64 points");
    const int M = grid.half_points();
    const double h = grid.step();
    const double t = kinetic(potential, h);
    TridiagonalMatrix out;
    out.step = h;
    for (int i = -M; i <= M; ++i) {
        const double y = i * h;
        const double pot = potential(y);
        check_finite(pot, y);
        out.y.push_back(y);
        out.diagonal.push_back(t + pot);
        if (i < M) out.off_diagonal.push_back(-0.5 * t);
    }
    return out;
}

TridiagonalMatrix build_grid_hamiltonian(const ModelParameters& params, const CoefficientTable& coeffs,
                                         const GridSpec& grid) {
    return build_grid_hamiltonian(LocalPotential::from(params, coeffs), grid);
}

LocalBasis solve_local_basis(const ModelParameters& params, const CoefficientTable& coeffs, int d,
                             const std::optional<GridSpec>& grid, const LocalBasisOptions& options) {
    if (d < 2) throw std::invalid_argument("local basis needs d >= 2");
    const LocalPotential v = LocalPotential::from(params, coeffs);
    if (!(v.quartic > 0.0 || v.quadratic > 0.0)) throw std::invalid_argument("potential is not confining");
    if (grid && grid->points < 64) throw std::invalid_argument("grid needs at least 64 points");

    // Size the domain on the starting grid so the wall clears the top kept level.
    const double margin = wall_margin_energy(v, options);
    GridSpec current;
    if (grid) {
        current = *grid;
    } else {
        const double estimate = v.minimum() + v.g * v.curvature_frequency() * (d + 0.5);
        current = {turning_point(v, estimate + margin), options.initial_points};
    }
    RawBasis coarse = solve_on_grid(v, current, d);
    for (int attempt = 0; v(current.y_max) - coarse.energies(d - 1) < margin; ++attempt) {
        if (grid) throw std::runtime_error("local basis domain too small: wall sits inside the kept levels");
        if (attempt == 8) throw std::runtime_error("could not size the local basis domain");
        current.y_max = 1.05 * turning_point(v, coarse.energies(d - 1) + 1.5 * margin);
        coarse = solve_on_grid(v, current, d);
    }

    // The stencil error is a series in h^2. Three successive doublings are
    // combined in a Richardson tableau that removes the h^2 and h^4 terms;
    // the combined energies must be stable under one more doubling.
    std::vector<RawBasis> levels;
    std::vector<GridSpec> level_grids;
    levels.push_back(std::move(coarse));
    level_grids.push_back(current);
    Eigen::VectorXd estimate;
    double shift = std::numeric_limits<double>::infinity();
    for (;;) {
        const GridSpec next_grid = doubled(level_grids.back());
        if (next_grid.points > options.max_points)
            throw std::runtime_error("local basis not converged at the maximum grid size");
        levels.push_back(solve_on_grid(v, next_grid, d));
        level_grids.push_back(next_grid);
        if (levels.size() > 3) levels.erase(levels.begin());
        if (levels.size() < 3) continue;
        const Eigen::VectorXd next_estimate =
            richardson(levels[0].energies, levels[1].energies, levels[2].energies);
        if (estimate.size() == 0) {
            estimate = next_estimate;
            continue;
        }
        shift = max_relative_shift(estimate, next_estimate);
        estimate = next_estimate;
        if (shift <= options.refine_tol) break;
        if (grid) {
            throw std::runtime_error("local basis not converged under grid refinement (relative shift " +
                                     std::to_string(shift) + ")");
        }
    }
    if (levels[0].parity != levels[2].parity) throw std::runtime_error("level parity changed under grid refinement");

    LocalBasis basis;
    basis.d = d;
    basis.params = params;
    basis.potential = v;
    basis.grid = level_grids.back();
    basis.energies = estimate;
    basis.parity = levels[2].parity;
    basis.half_wavefunctions = std::move(levels[2].half);
    basis.coarse_half_wavefunctions = {std::move(levels[1].half), std::move(levels[0].half)};
    basis.refinement_shift = shift;
    basis.Y = operator_matrix_elements(basis, 1);
    basis.W = operator_matrix_elements(basis, 2);
    return basis;
}

LocalBasis solve_local_basis(const ModelParameters& params, int d, const std::optional<GridSpec>& grid,
                             const LocalBasisOptions& options) {
    params.validate();
    if (params.order_t != 3)
        throw std::invalid_argument("only the t = 3 (y^4 on-site) model is simulated");
    return solve_local_basis(params, make_coefficient_table(params.alpha, 2), d, grid, options);
}

namespace {

Eigen::MatrixXd quadrature(const Eigen::MatrixXd& half, const std::vector<int>& parity, double h, int power) {
    const Eigen::Index M = half.rows() - 1;
    const int d = static_cast<int>(half.cols());
    // Integrands odd under y -> -y vanish; even ones are twice the y > 0
    // half (the y = 0 point carries y^power = 0).
    Eigen::VectorXd weight(M + 1);
    for (Eigen::Index i = 0; i <= M; ++i) weight(i) = 2.0 * h * std::pow(static_cast<double>(i) * h, power);
    Eigen::MatrixXd out = half.transpose() * (weight.asDiagonal() * half);
    for (int q = 0; q < d; ++q)
        for (int r = 0; r < d; ++r)
            if ((parity[static_cast<std::size_t>(q)] + parity[static_cast<std::size_t>(r)] + power) % 2 != 0)
                out(q, r) = 0.0;
    return 0.5 * (out + out.transpose());
}

}  // namespace

Eigen::MatrixXd operator_matrix_elements(const LocalBasis& basis, int power) {
    if (power < 1) throw std::invalid_argument("power must be >= 1");
    const double h = basis.grid.step();
    const Eigen::MatrixXd fine = quadrature(basis.half_wavefunctions, basis.parity, h, power);
    const auto& coarser = basis.coarse_half_wavefunctions;
    if (coarser.size() < 2) return fine;
    const Eigen::MatrixXd c2 = quadrature(coarser[0], basis.parity, 2.0 * h, power);
    const Eigen::MatrixXd c4 = quadrature(coarser[1], basis.parity, 4.0 * h, power);
    return richardson<Eigen::MatrixXd>(c4, c2, fine);
}

Eigen::MatrixXd LocalBasis::wavefunctions() const {
    const int M = grid.half_points();
    Eigen::MatrixXd full(2 * M + 1, d);
    for (int q = 0; q < d; ++q) {
        const double mirror = parity[static_cast<std::size_t>(q)] == 0 ? 1.0 : -1.0;
        for (int i = -M; i <= M; ++i)
            full(i + M, q) = i >= 0 ? half_wavefunctions(i, q) : mirror * half_wavefunctions(-i, q);
    }
    return full;
}

Eigen::VectorXd LocalBasis::grid_points() const {
    const int M = grid.half_points();
    return Eigen::VectorXd::LinSpaced(2 * M + 1, -M * grid.step(), M * grid.step());
}

Eigen::MatrixXd LocalBasis::reflection() const {
    Eigen::VectorXd r(d);
    for (int q = 0; q < d; ++q) r(q) = parity[static_cast<std::size_t>(q)] == 0 ? 1.0 : -1.0;
    return r.asDiagonal();
}

namespace {

void put(std::ostream& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, " %.17g", x);
    out << buf;
}

template <typename Range>
void put_row(std::ostream& out, const char* key, const Range& values) {
    out << key;
    for (double x : values) put(out, x);
    out << '\n';
}

}  // namespace

void write_local_basis(std::ostream& out, const LocalBasis& b, int samples) {
    out << "# zigzag local basis: energies, operator matrices (row-major) and sampled wavefunctions\n";
    out << "format_version 1\n";
    out << "alpha";
    put(out, b.params.alpha);
    out << "\ng";
    put(out, b.params.g);
    out << "\nomega2";
    put(out, b.params.omega2);
    out << "\nd " << b.d << "\ngrid_y_max";
    put(out, b.grid.y_max);
    out << "\ngrid_points " << b.grid.total_points() << '\n';
    put_row(out, "energies", std::vector<double>(b.energies.data(), b.energies.data() + b.d));
    out << "parity";
    for (int p : b.parity) out << ' ' << p;
    out << '\n';
    auto row_major = [](const Eigen::MatrixXd& m) {
        std::vector<double> v;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
        return v;
    };
    put_row(out, "Y", row_major(b.Y));
    put_row(out, "W", row_major(b.W));

    samples = std::max(samples, 2);
    const Eigen::MatrixXd full = b.wavefunctions();
    const Eigen::Index n = full.rows();
    std::vector<Eigen::Index> rows;
    for (int k = 0; k < samples; ++k)
        rows.push_back(static_cast<Eigen::Index>(std::llround(static_cast<double>(k) * (n - 1) / (samples - 1))));
    const Eigen::VectorXd y = b.grid_points();
    out << "wavefunction_samples " << samples << '\n';
    std::vector<double> ys;
    for (auto r : rows) ys.push_back(y(r));
    put_row(out, "y", ys);
    for (int q = 0; q < b.d; ++q) {
        std::vector<double> psi;
        for (auto r : rows) psi.push_back(full(r, q));
        const std::string key = "psi_" + std::to_string(q + 1);
        put_row(out, key.c_str(), psi);
    }
}

}  // namespace zigzag
