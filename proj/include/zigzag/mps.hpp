#pragma once

// Parity-blocked matrix product state with open boundaries.
//
// Site j carries blocks A[pl][ps] of shape (Dl[pl] * d[ps]) x Dr[pl ^ ps],
// stored column-major with the left index fastest, then the physical index,
// then the right index. The same memory is therefore also a Dl[pl] x
// (d[ps] * Dr) matrix.
//
// Bond 0 holds one even state. Bond L holds one even and one odd state: an
// auxiliary index equal to the total parity, which lets states without
// definite parity (broken-symmetry product states) be represented. Parity
// even quantities are read with the identity on that index; the physical
// pure state is the coherent sum over it.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "zigzag/z2.hpp"

namespace zigzag {

struct LocalBasis;

struct SiteTensor {
    std::array<std::array<Eigen::MatrixXd, 2>, 2> block;  ///< [pl][ps]

    Eigen::MatrixXd& at(int pl, int ps) { return block[static_cast<std::size_t>(pl)][static_cast<std::size_t>(ps)]; }
    const Eigen::MatrixXd& at(int pl, int ps) const {
        return block[static_cast<std::size_t>(pl)][static_cast<std::size_t>(ps)];
    }
};

class MatrixProductState {
public:
    MatrixProductState() = default;
    /// All-zero state with the given bond dimensions (size L + 1).
    MatrixProductState(LocalSpace space, std::vector<Bond> bonds);

    int length() const { return static_cast<int>(sites_.size()); }
    int d() const { return space_.d(); }
    const LocalSpace& space() const { return space_; }

    const Bond& bond(int b) const { return bonds_.at(static_cast<std::size_t>(b)); }
    const std::vector<Bond>& bonds() const { return bonds_; }
    int max_bond_dimension() const;

    SiteTensor& site(int j) { return sites_.at(static_cast<std::size_t>(j)); }
    const SiteTensor& site(int j) const { return sites_.at(static_cast<std::size_t>(j)); }
    /// Replace site j together with its right bond (used by the sweep).
    void set_site(int j, SiteTensor tensor, const Bond& right);
    void set_bond(int b, const Bond& bond) { bonds_.at(static_cast<std::size_t>(b)) = bond; }

    int center() const { return center_; }
    void set_center(int j) { center_ = j; }

    /// Schmidt values per cut 1..L-1 (index cut - 1) as last recorded by a
    /// canonicalisation or sweep; descending.
    const std::vector<std::vector<double>>& schmidt() const { return schmidt_; }
    void set_schmidt(int cut, std::vector<double> values);

    /// Bring the state into mixed-canonical form around `center` with QR
    /// steps from both ends, then normalise the centre.
    void canonicalize(int center);
    /// Move the orthogonality centre one site at a time.
    void move_center_to(int center);

    double norm() const;
    void normalize();

    /// Exact Schmidt values of every cut (index cut - 1) from an SVD sweep on
    /// a copy; the result is also stored as this state's recorded spectra.
    std::vector<std::vector<double>> compute_schmidt_spectra();
    std::vector<double> schmidt_spectrum(int cut) const;

    /// Largest deviation from the canonical identities: left-orthonormal
    /// sites before the centre, right-orthonormal after it.
    double canonical_error() const;

    /// Keep only the total-parity-p component (p = 0 even, 1 odd), shrink
    /// the closing bond to that sector and renormalise.
    void project_parity(int p);

    /// Multiply by the global reflection R on every site.
    void apply_global_parity();

    /// Coherent pure state as a dense vector of length d^L, configuration
    /// index sum_j s_j d^j (site 0 least significant). Requires d^L <= 2^24.
    Eigen::VectorXd to_dense() const;

    /// Direct-sum of the charge-0 and charge-1 parts: weights of the two
    /// total-parity sectors (sum 1 for a normalised state).
    std::array<double, 2> parity_weights() const;

private:
    void qr_right(int j);  // centre j -> j + 1
    void lq_left(int j);   // centre j -> j - 1

    LocalSpace space_;
    std::vector<Bond> bonds_;
    std::vector<SiteTensor> sites_;
    int center_ = 0;
    std::vector<std::vector<double>> schmidt_;
};

enum class InitStrategy { Random, Staggered, Linear };
InitStrategy parse_init_strategy(const std::string& name);
std::string to_string(InitStrategy s);

/// Starting state for DMRG. `linear` puts every site in the lowest level;
/// `staggered` uses the extreme eigenvectors of Y (largest on even sites,
/// smallest on odd sites); `random` draws Gaussian blocks of bond dimension
/// up to D_init from a std::mt19937_64 seeded with `seed`. The result is
/// normalised with its centre on site 0.
MatrixProductState initialize_state(const LocalBasis& basis, int L, int D_init, InitStrategy strategy,
                                    std::uint64_t seed = 0);

}  // namespace zigzag
