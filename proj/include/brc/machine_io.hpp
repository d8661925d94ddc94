#pragma once

#include "brc/machine.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace brc {

// Machine file layout (text, one field per line):
//
//   brc-machine
//   format_version 1
//   experiment_id <token>      config_digest <hex>      data_digest <hex>
//   master_seed <u64>          n, d, p, lambda, sigma, alpha_leak, eta, beta, dt
//   seed_input / seed_adjacency / seed_init_state <u64>
//   matrix <name> <rows> <cols>   followed by one line per row
//   end
//
// Matrices are input_weights, adjacency and readout, row-major, every value
// printed with 17 significant digits so parsing restores the exact double.

inline constexpr int kMachineFormatVersion = 1;

class MachineFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_matrix(std::ostream& os, const char* name, const Eigen::MatrixXd& m) {
    os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << g17(m(i, j));
        }
        os << '\n';
    }
}

inline std::string token_or_dash(const std::string& s) {
    if (s.empty()) return "-";
    for (char c : s)
        if (c == ' ' || c == '\n' || c == '\t')
            throw std::invalid_argument("machine file: identifiers may not contain whitespace: '" + s + "'");
    return s;
}

}  // namespace detail

inline void write_machine(std::ostream& os, const TrainedMachine& m) {
    using detail::g17;
    const auto& hp = m.hyperparams;
    os << "brc-machine\n";
    os << "format_version " << kMachineFormatVersion << '\n';
    os << "experiment_id " << detail::token_or_dash(m.provenance.experiment_id) << '\n';
    os << "config_digest " << detail::token_or_dash(m.provenance.config_digest) << '\n';
    os << "data_digest " << detail::token_or_dash(m.provenance.data_digest) << '\n';
    os << "master_seed " << m.provenance.master_seed << '\n';
    os << "n " << hp.n << '\n' << "d " << hp.d << '\n';
    os << "p " << g17(hp.p) << '\n' << "lambda " << g17(hp.lambda) << '\n';
    os << "sigma " << g17(hp.sigma) << '\n' << "alpha_leak " << g17(hp.alpha_leak) << '\n';
    os << "eta " << g17(hp.eta) << '\n' << "beta " << g17(m.beta) << '\n' << "dt " << g17(m.dt) << '\n';
    os << "seed_input " << m.matrices.seeds.input << '\n';
    os << "seed_adjacency " << m.matrices.seeds.adjacency << '\n';
    os << "seed_init_state " << m.matrices.seeds.init_state << '\n';
    detail::write_matrix(os, "input_weights", m.matrices.input_weights);
    detail::write_matrix(os, "adjacency", m.matrices.adjacency);
    detail::write_matrix(os, "readout", m.readout);
    os << "end\n";
}

inline TrainedMachine read_machine(std::istream& is) {
    auto fail = [](const std::string& what) -> MachineFormatError { return MachineFormatError("machine file: " + what); };
    std::string magic;
    if (!(is >> magic) || magic != "brc-machine") throw fail("missing 'brc-machine' header");

    auto field = [&](const char* key) {
        std::string k, v;
        if (!(is >> k >> v) || k != key) throw fail(std::string("expected field '") + key + "'");
        return v;
    };
    auto as_double = [&](const std::string& s, const char* key) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) throw fail(std::string("bad number for '") + key + "'");
        return v;
    };
    auto as_u64 = [&](const std::string& s, const char* key) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size()) throw fail(std::string("bad integer for '") + key + "'");
        return static_cast<std::uint64_t>(v);
    };
    auto dash = [](std::string s) { return s == "-" ? std::string() : s; };

    const auto version = as_u64(field("format_version"), "format_version");
    if (version != kMachineFormatVersion) throw fail("unsupported format_version " + std::to_string(version));

    TrainedMachine m;
    m.provenance.experiment_id = dash(field("experiment_id"));
    m.provenance.config_digest = dash(field("config_digest"));
    m.provenance.data_digest = dash(field("data_digest"));
    m.provenance.master_seed = as_u64(field("master_seed"), "master_seed");
    auto& hp = m.hyperparams;
    hp.n = as_u64(field("n"), "n");
    hp.d = as_u64(field("d"), "d");
    hp.p = as_double(field("p"), "p");
    hp.lambda = as_double(field("lambda"), "lambda");
    hp.sigma = as_double(field("sigma"), "sigma");
    hp.alpha_leak = as_double(field("alpha_leak"), "alpha_leak");
    hp.eta = as_double(field("eta"), "eta");
    m.beta = as_double(field("beta"), "beta");
    m.dt = as_double(field("dt"), "dt");
    m.matrices.seeds.input = as_u64(field("seed_input"), "seed_input");
    m.matrices.seeds.adjacency = as_u64(field("seed_adjacency"), "seed_adjacency");
    m.matrices.seeds.init_state = as_u64(field("seed_init_state"), "seed_init_state");
    hp.validate();

    auto read_matrix = [&](const char* name, Eigen::Index rows, Eigen::Index cols) {
        std::string tag, got;
        Eigen::Index r = 0, c = 0;
        if (!(is >> tag >> got >> r >> c) || tag != "matrix" || got != name)
            throw fail(std::string("expected matrix '") + name + "'");
        if (r != rows || c != cols) throw fail(std::string("matrix '") + name + "' has the wrong shape");
        Eigen::MatrixXd out(rows, cols);
        std::string tok;
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) {
                if (!(is >> tok)) throw fail(std::string("truncated matrix '") + name + "'");
                out(i, j) = as_double(tok, name);
            }
        return out;
    };
    const auto n = static_cast<Eigen::Index>(hp.n), d = static_cast<Eigen::Index>(hp.d);
    m.matrices.input_weights = read_matrix("input_weights", n, d);
    m.matrices.adjacency = read_matrix("adjacency", n, n);
    m.readout = read_matrix("readout", d, n);
    std::string end;
    if (!(is >> end) || end != "end") throw fail("missing 'end' marker");
    return m;
}

inline void save_machine(const std::string& path, const TrainedMachine& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_machine(os, m);
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

inline TrainedMachine load_machine(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open machine file '" + path + "'");
    return read_machine(is);
}

}  // namespace brc
