#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <string>

#include "cusplab/core.hpp"
#include "cusplab/discretization/grid.hpp"
#include "cusplab/discretization/operator.hpp"

namespace cusplab::discretization {

// Container layout (little-endian as written by the host):
//   char[8]  magic "CUSPLAB\0"
//   u32      version (1)
//   u32      record: 1 = grid, 2 = matrix
//   grid:    f64 lo[3], f64 hi[3], u64 n[3]
//   matrix:  u32 source kind, u64 rows, u64 cols, u64 id length, id bytes,
//            f64 entries column-major
// Matrix-free operators are materialized before writing.

namespace detail {

inline constexpr char container_magic[8] = {'C', 'U', 'S', 'P', 'L', 'A', 'B', '\0'};
inline constexpr std::uint32_t container_version = 1;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError("truncated container");
    return v;
}

inline void write_header(std::ostream& os, std::uint32_t record) {
    os.write(container_magic, sizeof container_magic);
    put(os, container_version);
    put(os, record);
}

inline std::uint32_t read_header(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, container_magic, sizeof magic) != 0) throw ConfigError("not a cusplab container");
    if (get<std::uint32_t>(is) != container_version) throw ConfigError("unsupported container version");
    return get<std::uint32_t>(is);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path);
    return is;
}

}  // namespace detail

inline void save_grid(const GridSpec& g, const std::string& path) {
    auto os = detail::open_out(path);
    detail::write_header(os, 1);
    for (double v : g.lo()) detail::put(os, v);
    for (double v : g.hi()) detail::put(os, v);
    for (std::size_t v : g.n()) detail::put(os, static_cast<std::uint64_t>(v));
}

inline GridSpec load_grid(const std::string& path) {
    auto is = detail::open_in(path);
    if (detail::read_header(is) != 1) throw ConfigError(path + " does not hold a grid");
    Vec3 lo{}, hi{};
    Index3 n{};
    for (double& v : lo) v = detail::get<double>(is);
    for (double& v : hi) v = detail::get<double>(is);
    for (std::size_t& v : n) v = static_cast<std::size_t>(detail::get<std::uint64_t>(is));
    return {lo, hi, n};
}

inline void save_operator(const DiscreteOperator& op, const std::string& path, double max_entries = 4e7) {
    const Eigen::MatrixXd m = to_dense(op, max_entries);
    auto os = detail::open_out(path);
    detail::write_header(os, 2);
    detail::put(os, static_cast<std::uint32_t>(op.kind()));
    detail::put(os, static_cast<std::uint64_t>(m.rows()));
    detail::put(os, static_cast<std::uint64_t>(m.cols()));
    const std::string id = op.id();
    detail::put(os, static_cast<std::uint64_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
    os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    if (!os) throw ResourceError("write failed: " + path);
}

struct LoadedOperator {
    OperatorKind source_kind;
    std::shared_ptr<const DenseOperator> op;
};

inline LoadedOperator load_operator(const std::string& path) {
    auto is = detail::open_in(path);
    if (detail::read_header(is) != 2) throw ConfigError(path + " does not hold an operator");
    const auto kind = detail::get<std::uint32_t>(is);
    if (kind > static_cast<std::uint32_t>(OperatorKind::Composite)) throw ConfigError("unknown operator kind");
    const auto rows = detail::get<std::uint64_t>(is), cols = detail::get<std::uint64_t>(is);
    const auto len = detail::get<std::uint64_t>(is);
    if (len > 4096) throw ConfigError("corrupt operator id");
    std::string id(len, '\0');
    is.read(id.data(), static_cast<std::streamsize>(len));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * rows * cols));
    if (!is) throw ConfigError("truncated operator payload");
    return {static_cast<OperatorKind>(kind), std::make_shared<DenseOperator>(std::move(m), id)};
}

inline void export_csv(const DiscreteOperator& op, const std::string& path, double max_entries = 4e7) {
    const Eigen::MatrixXd m = to_dense(op, max_entries);
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
        os << '\n';
    }
}

}  // namespace cusplab::discretization
