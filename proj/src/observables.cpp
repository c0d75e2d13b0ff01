#include "zigzag/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "contract.hpp"

namespace zigzag {

using detail::Blocks;

namespace {

int charge_of(const Eigen::MatrixXd& op, const LocalSpace& space) {
    double same = 0.0, flip = 0.0;
    for (int a = 0; a < space.d(); ++a)
        for (int b = 0; b < space.d(); ++b)
            (space.parity[static_cast<std::size_t>(a)] == space.parity[static_cast<std::size_t>(b)] ? same : flip) +=
                std::abs(op(a, b));
    if (same > 0.0 && flip > 0.0) throw std::invalid_argument("operator has no definite parity");
    return flip > 0.0 ? 1 : 0;
}

}  // namespace

Measurement::Measurement(const MatrixProductState& state, const Eigen::MatrixXd& Y) : psi_(state) {
    const int L = psi_.length();
    if (L < 1) throw std::invalid_argument("empty state");
    if (Y.rows() != psi_.d() || Y.cols() != psi_.d()) throw std::invalid_argument("Y must be d x d");
    const LocalSpace& sp = psi_.space();
    Y_ = SectorOperator::from_dense(Y, sp, 1);
    YY_ = SectorOperator::from_dense(Y * Y, sp, 0);

    left_id_.resize(static_cast<std::size_t>(L + 1));
    right_id_.resize(static_cast<std::size_t>(L + 1));
    right_sw_.resize(static_cast<std::size_t>(L + 1));
    left_id_[0] = detail::identity_blocks(psi_.bond(0));
    for (int j = 0; j < L; ++j) {
        Blocks out = detail::zero_blocks(psi_.bond(j + 1), 0);
        detail::left_contract(psi_.site(j), psi_.bond(j), sp, &left_id_[static_cast<std::size_t>(j)], 0, nullptr, 1.0,
                              out);
        left_id_[static_cast<std::size_t>(j + 1)] = std::move(out);
    }
    right_id_[static_cast<std::size_t>(L)] = detail::identity_blocks(psi_.bond(L));
    Blocks swap = detail::zero_blocks(psi_.bond(L), 1);
    for (auto& b : swap) b.setOnes();
    right_sw_[static_cast<std::size_t>(L)] = std::move(swap);
    for (int j = L - 1; j >= 0; --j) {
        Blocks id = detail::zero_blocks(psi_.bond(j), 0);
        Blocks sw = detail::zero_blocks(psi_.bond(j), 1);
        detail::right_contract(psi_.site(j), psi_.bond(j), sp, &right_id_[static_cast<std::size_t>(j + 1)], 0, nullptr,
                               1.0, id);
        detail::right_contract(psi_.site(j), psi_.bond(j), sp, &right_sw_[static_cast<std::size_t>(j + 1)], 1, nullptr,
                               1.0, sw);
        right_id_[static_cast<std::size_t>(j)] = std::move(id);
        right_sw_[static_cast<std::size_t>(j)] = std::move(sw);
    }
    norm2_ = detail::join(left_id_[static_cast<std::size_t>(L)], right_id_[static_cast<std::size_t>(L)]);
    if (!(norm2_ > 0.0)) throw std::runtime_error("state has zero norm");
}

double Measurement::local_expectation(int j, const Eigen::MatrixXd& op) const {
    if (j < 0 || j >= length()) throw std::out_of_range("site index out of range");
    const LocalSpace& sp = psi_.space();
    const int c = charge_of(op, sp);
    const SectorOperator O = SectorOperator::from_dense(op, sp, c);
    Blocks env = detail::zero_blocks(psi_.bond(j + 1), c);
    detail::left_contract(psi_.site(j), psi_.bond(j), sp, &left_id_[static_cast<std::size_t>(j)], 0, &O, 1.0, env);
    const auto& right = c == 0 ? right_id_ : right_sw_;
    return detail::join(env, right[static_cast<std::size_t>(j + 1)]) / norm2_;
}

double Measurement::pair_expectation(int j, const Eigen::MatrixXd& A, int k, const Eigen::MatrixXd& B) const {
    if (j < 0 || j >= length() || k < 0 || k >= length()) throw std::out_of_range("site index out of range");
    if (j == k) throw std::invalid_argument("pair_expectation needs distinct sites");
    if (k < j) return pair_expectation(k, B, j, A);
    const LocalSpace& sp = psi_.space();
    const int ca = charge_of(A, sp), cb = charge_of(B, sp);
    const SectorOperator Oa = SectorOperator::from_dense(A, sp, ca);
    const SectorOperator Ob = SectorOperator::from_dense(B, sp, cb);
    Blocks env = detail::zero_blocks(psi_.bond(j + 1), ca);
    detail::left_contract(psi_.site(j), psi_.bond(j), sp, &left_id_[static_cast<std::size_t>(j)], 0, &Oa, 1.0, env);
    for (int i = j + 1; i < k; ++i) {
        Blocks next = detail::zero_blocks(psi_.bond(i + 1), ca);
        detail::left_contract(psi_.site(i), psi_.bond(i), sp, &env, ca, nullptr, 1.0, next);
        env = std::move(next);
    }
    Blocks last = detail::zero_blocks(psi_.bond(k + 1), ca ^ cb);
    detail::left_contract(psi_.site(k), psi_.bond(k), sp, &env, ca, &Ob, 1.0, last);
    const auto& right = (ca ^ cb) == 0 ? right_id_ : right_sw_;
    return detail::join(last, right[static_cast<std::size_t>(k + 1)]) / norm2_;
}

double Measurement::y(int j) const {
    if (j < 0 || j >= length()) throw std::out_of_range("site index out of range");
    const LocalSpace& sp = psi_.space();
    Blocks env = detail::zero_blocks(psi_.bond(j + 1), 1);
    detail::left_contract(psi_.site(j), psi_.bond(j), sp, &left_id_[static_cast<std::size_t>(j)], 0, &Y_, 1.0, env);
    return detail::join(env, right_sw_[static_cast<std::size_t>(j + 1)]) / norm2_;
}

std::vector<double> Measurement::y_profile() const {
    std::vector<double> out;
    for (int j = 0; j < length(); ++j) out.push_back(y(j));
    return out;
}

double Measurement::correlator(int j, int k) const {
    if (j < 0 || j >= length() || k < 0 || k >= length()) throw std::out_of_range("site index out of range");
    const int a = std::min(j, k), b = std::max(j, k);
    return correlator_row(a, b - a + 1).back();
}

std::vector<double> Measurement::correlator_row(int j, int count) const {
    if (j < 0 || count < 1 || j + count > length()) throw std::out_of_range("correlator row out of range");
    const LocalSpace& sp = psi_.space();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    {
        Blocks env = detail::zero_blocks(psi_.bond(j + 1), 0);
        detail::left_contract(psi_.site(j), psi_.bond(j), sp, &left_id_[static_cast<std::size_t>(j)], 0, &YY_, 1.0,
                              env);
        out.push_back(detail::join(env, right_id_[static_cast<std::size_t>(j + 1)]) / norm2_);
    }
    Blocks env = detail::zero_blocks(psi_.bond(j + 1), 1);
    detail::left_contract(psi_.site(j), psi_.bond(j), sp, &left_id_[static_cast<std::size_t>(j)], 0, &Y_, 1.0, env);
    for (int k = j + 1; k < j + count; ++k) {
        Blocks closed = detail::zero_blocks(psi_.bond(k + 1), 0);
        detail::left_contract(psi_.site(k), psi_.bond(k), sp, &env, 1, &Y_, 1.0, closed);
        out.push_back(detail::join(closed, right_id_[static_cast<std::size_t>(k + 1)]) / norm2_);
        if (k + 1 < j + count) {
            Blocks next = detail::zero_blocks(psi_.bond(k + 1), 1);
            detail::left_contract(psi_.site(k), psi_.bond(k), sp, &env, 1, nullptr, 1.0, next);
            env = std::move(next);
        }
    }
    return out;
}

std::pair<double, double> Measurement::staggered_moments() const {
    // Three channels: identity (cached), open sum of s_j Y_j, completed M^2.
    const LocalSpace& sp = psi_.space();
    Blocks open = detail::zero_blocks(psi_.bond(0), 1);
    Blocks done = detail::zero_blocks(psi_.bond(0), 0);
    for (int j = 0; j < length(); ++j) {
        const double s = j % 2 == 0 ? 1.0 : -1.0;
        const Bond& left = psi_.bond(j);
        const SiteTensor& A = psi_.site(j);
        const Blocks& id = left_id_[static_cast<std::size_t>(j)];
        Blocks next_open = detail::zero_blocks(psi_.bond(j + 1), 1);
        Blocks next_done = detail::zero_blocks(psi_.bond(j + 1), 0);
        detail::left_contract(A, left, sp, &done, 0, nullptr, 1.0, next_done);
        detail::left_contract(A, left, sp, &open, 1, &Y_, 2.0 * s, next_done);
        detail::left_contract(A, left, sp, &id, 0, &YY_, 1.0, next_done);
        detail::left_contract(A, left, sp, &open, 1, nullptr, 1.0, next_open);
        detail::left_contract(A, left, sp, &id, 0, &Y_, s, next_open);
        open = std::move(next_open);
        done = std::move(next_done);
    }
    const auto L = static_cast<std::size_t>(length());
    return {detail::join(open, right_sw_[L]) / norm2_, detail::join(done, right_id_[L]) / norm2_};
}

std::vector<double> Measurement::populations(int j) const {
    if (j < 0 || j >= length()) throw std::out_of_range("site index out of range");
    const LocalSpace& sp = psi_.space();
    const Bond& bl = psi_.bond(j);
    std::vector<double> p(static_cast<std::size_t>(sp.d()), 0.0);
    for (int pl = 0; pl < 2; ++pl)
        for (int ps = 0; ps < 2; ++ps) {
            const Eigen::MatrixXd& A = psi_.site(j).at(pl, ps);
            if (A.size() == 0) continue;
            const int Dl = bl.dim[static_cast<std::size_t>(pl)];
            const int ds = sp.dim(ps);
            const auto Dr = A.cols();
            const Eigen::MatrixXd T =
                left_id_[static_cast<std::size_t>(j)][static_cast<std::size_t>(pl)] *
                Eigen::Map<const Eigen::MatrixXd>(A.data(), Dl, ds * Dr);
            const Eigen::MatrixXd U = Eigen::Map<const Eigen::MatrixXd>(T.data(), Dl * ds, Dr) *
                                      right_id_[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(pl ^ ps)]
                                          .transpose();
            for (int s = 0; s < ds; ++s) {
                double acc = 0.0;
                for (Eigen::Index r = 0; r < Dr; ++r)
                    for (int l = 0; l < Dl; ++l) acc += A(l + s * Dl, r) * U(l + s * Dl, r);
                p[static_cast<std::size_t>(sp.levels[static_cast<std::size_t>(ps)][static_cast<std::size_t>(s)])] +=
                    acc / norm2_;
            }
        }
    return p;
}

namespace {

double checked_root(double radicand) {
    if (radicand < -1e-12) throw std::runtime_error("negative structure-factor radicand");
    return std::sqrt(std::max(radicand, 0.0));
}

}  // namespace

double structure_factor_order_parameter(const Measurement& m) {
    const double L = m.length();
    return checked_root(m.staggered_moments().second / (L * L));
}

double structure_factor_by_pairs(const Measurement& m) {
    const int L = m.length();
    double sum = 0.0;
    for (int j = 0; j < L; ++j) {
        const std::vector<double> row = m.correlator_row(j, L - j);
        for (int dj = 0; dj < L - j; ++dj) sum += (dj == 0 ? 1.0 : 2.0) * (dj % 2 == 0 ? 1.0 : -1.0) * row[static_cast<std::size_t>(dj)];
    }
    return checked_root(sum / (static_cast<double>(L) * L));
}

int bulk_max_distance(int L) { return std::max(0, (2 * L) / 3 - L / 3 - 1); }

std::vector<std::pair<int, double>> bulk_correlation_profile(const Measurement& m, int max_distance) {
    const int L = m.length();
    if (max_distance < 0 || max_distance > bulk_max_distance(L))
        throw std::out_of_range("correlation distance exceeds the central third");
    const int lo = L / 3, hi = (2 * L) / 3;
    std::vector<double> y(static_cast<std::size_t>(L), 0.0);
    for (int j = lo; j < hi; ++j) y[static_cast<std::size_t>(j)] = m.y(j);
    std::vector<double> sum(static_cast<std::size_t>(max_distance + 1), 0.0);
    std::vector<int> count(static_cast<std::size_t>(max_distance + 1), 0);
    for (int j = lo; j < hi; ++j) {
        const int n = std::min(max_distance + 1, hi - j);
        const std::vector<double> row = m.correlator_row(j, n);
        for (int dj = 0; dj < n; ++dj) {
            sum[static_cast<std::size_t>(dj)] +=
                row[static_cast<std::size_t>(dj)] - y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j + dj)];
            ++count[static_cast<std::size_t>(dj)];
        }
    }
    std::vector<std::pair<int, double>> out;
    for (int dj = 0; dj <= max_distance; ++dj)
        out.emplace_back(dj, (dj % 2 == 0 ? 1.0 : -1.0) * sum[static_cast<std::size_t>(dj)] /
                                 count[static_cast<std::size_t>(dj)]);
    return out;
}

std::vector<double> entanglement_entropy_profile(const MatrixProductState& state) {
    MatrixProductState copy = state;
    std::vector<double> out;
    for (const auto& spectrum : copy.compute_schmidt_spectra()) {
        double s = 0.0;
        for (double v : spectrum) {
            const double p = v * v;
            if (p > 0.0) s -= p * std::log(p);
        }
        out.push_back(std::max(0.0, s));
    }
    return out;
}

double population_decay_rate(const std::vector<double>& p, double floor) {
    double rate = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 2; i < p.size(); ++i) {
        if (!(p[i] > floor)) continue;
        const double q = static_cast<double>(i + 1);
        const double r = -std::log(p[i]) / q;
        if (std::isnan(rate) || r < rate) rate = r;
    }
    return rate;
}

ObservableSet measure_observables(const MatrixProductState& state, const Eigen::MatrixXd& Y,
                                  const ObservableOptions& options) {
    const Measurement m(state, Y);
    const int L = m.length();
    ObservableSet out;
    const auto [M, M2] = m.staggered_moments();
    out.xi_L = checked_root(M2 / (static_cast<double>(L) * L));
    out.magnetization = M / L;
    out.y_profile = m.y_profile();
    const int corr_max = options.corr_max < 0 ? bulk_max_distance(L) : options.corr_max;
    out.correlation_profile = bulk_correlation_profile(m, corr_max);
    out.entropy_profile = entanglement_entropy_profile(state);
    out.pops_site = options.pops_site < 0 ? L / 2 : options.pops_site;
    out.populations = m.populations(out.pops_site);
    out.population_decay = population_decay_rate(out.populations);
    return out;
}

}  // namespace zigzag
