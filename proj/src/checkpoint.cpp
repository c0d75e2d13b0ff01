#include "zigzag/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace zigzag {

namespace {

constexpr const char* kMagic = "ZIGZAG-MPS";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

// Dense (bond-local) index of sector-local index i in sector p.
int bond_index(const Bond& b, int p, int i) { return b.offset(p) + i; }

}  // namespace

void write_checkpoint(const std::string& path, const MatrixProductState& psi, const ConvergenceReport& report,
                      const std::string& metadata) {
    using nlohmann::json;
    json header;
    header["format_version"] = kCheckpointFormatVersion;
    header["L"] = psi.length();
    header["d"] = psi.d();
    header["center"] = psi.center();
    json bonds = json::array();
    for (const Bond& b : psi.bonds()) bonds.push_back({b.dim[0], b.dim[1]});
    header["bond_dims"] = bonds;
    header["level_parity"] = psi.space().parity;
    header["report"] = {{"sweeps_done", report.sweeps_done},
                        {"final_energy", report.final_energy},
                        {"energy_delta_last_sweep", std::isfinite(report.energy_delta_last_sweep)
                                                        ? json(report.energy_delta_last_sweep)
                                                        : json(nullptr)},
                        {"max_discarded_weight", report.max_discarded_weight},
                        {"wall_time", report.wall_time},
                        {"converged", report.converged},
                        {"sweep_energies", report.sweep_energies}};
    header["metadata"] = json::parse(metadata.empty() ? "{}" : metadata);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + tmp);
        out << kMagic << '\n' << header.dump() << '\n';
        const LocalSpace& sp = psi.space();
        const int d = sp.d();
        for (int j = 0; j < psi.length(); ++j) {
            const Bond& bl = psi.bond(j);
            const Bond& br = psi.bond(j + 1);
            std::vector<double> dense(static_cast<std::size_t>(bl.total()) * d * br.total(), 0.0);
            for (int pl = 0; pl < 2; ++pl)
                for (int ps = 0; ps < 2; ++ps) {
                    const Eigen::MatrixXd& blk = psi.site(j).at(pl, ps);
                    const int Dl = bl.dim[static_cast<std::size_t>(pl)];
                    const int ds = sp.dim(ps);
                    for (int r = 0; r < blk.cols(); ++r)
                        for (int s = 0; s < ds; ++s)
                            for (int l = 0; l < Dl; ++l) {
                                const int L_ = bond_index(bl, pl, l);
                                const int S = sp.levels[static_cast<std::size_t>(ps)][static_cast<std::size_t>(s)];
                                const int R = bond_index(br, pl ^ ps, r);
                                dense[(static_cast<std::size_t>(L_) * d + S) * br.total() + R] = blk(l + s * Dl, r);
                            }
                }
            out.write(reinterpret_cast<const char*>(dense.data()),
                      static_cast<std::streamsize>(dense.size() * sizeof(double)));
        }
        out.flush();
        if (!out) throw std::runtime_error("failed writing checkpoint: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot rename checkpoint to " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    using nlohmann::json;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string magic, line;
    std::getline(in, magic);
    if (magic != kMagic) throw std::runtime_error("not a checkpoint file: " + path);
    std::getline(in, line);
    const json header = json::parse(line);
    if (header.at("format_version").get<int>() != kCheckpointFormatVersion)
        throw std::runtime_error("unsupported checkpoint format version");
    const int L = header.at("L").get<int>();
    const int d = header.at("d").get<int>();
    const LocalSpace sp(header.at("level_parity").get<std::vector<int>>());
    if (sp.d() != d) throw std::runtime_error("checkpoint header is inconsistent");
    std::vector<Bond> bonds;
    for (const auto& b : header.at("bond_dims")) bonds.push_back(Bond{{b.at(0).get<int>(), b.at(1).get<int>()}});
    if (static_cast<int>(bonds.size()) != L + 1) throw std::runtime_error("checkpoint header is inconsistent");

    Checkpoint cp;
    cp.state = MatrixProductState(sp, bonds);
    for (int j = 0; j < L; ++j) {
        const Bond& bl = bonds[static_cast<std::size_t>(j)];
        const Bond& br = bonds[static_cast<std::size_t>(j + 1)];
        std::vector<double> dense(static_cast<std::size_t>(bl.total()) * d * br.total());
        in.read(reinterpret_cast<char*>(dense.data()), static_cast<std::streamsize>(dense.size() * sizeof(double)));
        if (!in) throw std::runtime_error("truncated checkpoint: " + path);
        SiteTensor& A = cp.state.site(j);
        for (int pl = 0; pl < 2; ++pl)
            for (int ps = 0; ps < 2; ++ps) {
                Eigen::MatrixXd& blk = A.at(pl, ps);
                const int Dl = bl.dim[static_cast<std::size_t>(pl)];
                const int ds = sp.dim(ps);
                for (int r = 0; r < blk.cols(); ++r)
                    for (int s = 0; s < ds; ++s)
                        for (int l = 0; l < Dl; ++l) {
                            const int S = sp.levels[static_cast<std::size_t>(ps)][static_cast<std::size_t>(s)];
                            blk(l + s * Dl, r) = dense[(static_cast<std::size_t>(bond_index(bl, pl, l)) * d + S) *
                                                           br.total() +
                                                       bond_index(br, pl ^ ps, r)];
                        }
            }
    }
    cp.state.set_center(header.at("center").get<int>());
    const json& rep = header.at("report");
    cp.report.sweeps_done = rep.at("sweeps_done").get<int>();
    cp.report.final_energy = rep.at("final_energy").get<double>();
    cp.report.energy_delta_last_sweep = rep.at("energy_delta_last_sweep").is_null()
                                            ? std::numeric_limits<double>::infinity()
                                            : rep.at("energy_delta_last_sweep").get<double>();
    cp.report.max_discarded_weight = rep.at("max_discarded_weight").get<double>();
    cp.report.wall_time = rep.at("wall_time").get<double>();
    cp.report.converged = rep.at("converged").get<bool>();
    cp.report.sweep_energies = rep.at("sweep_energies").get<std::vector<double>>();
    cp.metadata = header.at("metadata").dump();
    return cp;
}

}  // namespace zigzag
