#pragma once

// File formats:
//   spectra      CSV "l,m,coeff"
//   grid fields  CSV "theta,phi,value"
//   trajectories CSV "t,l,m,f,fdot,fddot,G" plus a JSON sidecar with the
//                run parameters {kappa, T, n_steps, L}
// Doubles are written with shortest round-trip formatting, so rewriting a
// parsed file is bit-stable.

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtnwave/evolve.hpp"
#include "dtnwave/sphharm.hpp"

namespace dtnwave {

namespace io {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

inline void write_spectrum_csv(const std::string& path, const SpectralField& c) {
    std::ofstream out = open_out(path);
    out << "l,m,coeff\n";
    for (int l = 0; l <= c.L; ++l)
        for (int m = -l; m <= l; ++m)
            out << l << ',' << m << ',' << format_double(c.at(l, m)) << '\n';
}

inline SpectralField read_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("l,m,coeff", 0) != 0)
        throw std::runtime_error("bad spectrum header in " + path);
    struct Entry {
        int l, m;
        double v;
    };
    std::vector<Entry> entries;
    int L = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Entry e{};
        char comma;
        if (!(ss >> e.l >> comma >> e.m >> comma >> e.v))
            throw std::runtime_error("bad spectrum row in " + path + ": " + line);
        if (e.l < 0 || std::abs(e.m) > e.l)
            throw std::runtime_error("bad (l,m) in " + path + ": " + line);
        L = std::max(L, e.l);
        entries.push_back(e);
    }
    SpectralField c(L);
    for (const auto& e : entries) c.at(e.l, e.m) = e.v;
    return c;
}

inline void write_grid_csv(const std::string& path, const GridField& v) {
    std::ofstream out = open_out(path);
    out << "theta,phi,value\n";
    const std::size_t n = v.grid.n_nodes();
    for (std::size_t j = 0; j < n; ++j)
        out << format_double(v.grid.node_colat(j)) << ',' << format_double(v.grid.node_lon(j))
            << ',' << format_double(v.values[j]) << '\n';
}

/// Streaming trajectory writer: one row per (t_k, l, m).
class TrajectoryCsvWriter {
  public:
    explicit TrajectoryCsvWriter(const std::string& path) : out_(open_out(path)) {
        buffer_.reserve(1 << 20);
        buffer_ = "t,l,m,f,fdot,fddot,G\n";
    }
    ~TrajectoryCsvWriter() { flush(); }

    void sample(double t, int L, const std::vector<double>& f, const std::vector<double>& fdot,
                const std::vector<double>& fddot, const std::vector<double>& g) {
        const std::string ts = format_double(t);
        for (int l = 0; l <= L; ++l) {
            for (int m = -l; m <= l; ++m) {
                const std::size_t i = SpectralField::index(l, m);
                buffer_ += ts;
                buffer_ += ',';
                buffer_ += std::to_string(l);
                buffer_ += ',';
                buffer_ += std::to_string(m);
                buffer_ += ',';
                buffer_ += format_double(f[i]);
                buffer_ += ',';
                buffer_ += format_double(fdot[i]);
                buffer_ += ',';
                buffer_ += format_double(fddot[i]);
                buffer_ += ',';
                buffer_ += format_double(g[i]);
                buffer_ += '\n';
                if (buffer_.size() > (1 << 20)) flush();
            }
        }
    }
    void flush() {
        if (!buffer_.empty()) {
            out_ << buffer_;
            buffer_.clear();
        }
    }

  private:
    std::ofstream out_;
    std::string buffer_;
};

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    TrajectoryCsvWriter w(path);
    for (std::size_t k = 0; k < traj.states.size(); ++k)
        w.sample(traj.states[k].t, traj.params.L, traj.states[k].f.coeffs,
                 traj.states[k].fdot.coeffs, traj.fddot[k].coeffs, traj.forcing[k].coeffs);
}

inline nlohmann::json params_to_json(const EvolveParams& p) {
    return nlohmann::json{{"kappa", p.kappa}, {"T", p.T}, {"n_steps", p.n_steps}, {"L", p.L}};
}

inline void write_trajectory_sidecar(const std::string& path, const EvolveParams& p) {
    std::ofstream out = open_out(path);
    out << params_to_json(p).dump(2) << '\n';
}

}  // namespace io

}  // namespace dtnwave
