#pragma once

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "cusplab/core.hpp"

namespace cusplab::spectra {

/// Decreasing non-negative values with per-value residuals. The first
/// `certified` entries satisfy residual <= tol * values[0].
struct SpectralSequence {
    std::vector<double> values;
    std::vector<double> residuals;
    std::size_t certified = 0;
    double tol = 0.0;
    std::string method;       // "dense" or "lanczos"
    std::string operator_id;
    std::string grid_id;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] bool empty() const { return values.empty(); }
    /// 1-based access, s_k.
    [[nodiscard]] double s(std::size_t k) const { return values.at(k - 1); }

    [[nodiscard]] std::vector<double> certified_values() const {
        return {values.begin(), values.begin() + static_cast<std::ptrdiff_t>(certified)};
    }

    /// Builds a sequence from arbitrary values (sorted, exact); for synthetic inputs.
    static SpectralSequence exact(std::vector<double> v, std::string id = "synthetic") {
        std::sort(v.rbegin(), v.rend());
        SpectralSequence s;
        s.residuals.assign(v.size(), 0.0);
        s.certified = v.size();
        s.values = std::move(v);
        s.method = "exact";
        s.operator_id = std::move(id);
        return s;
    }

    void write_csv(std::ostream& os) const {
        os << "k,s_k,residual\n" << std::setprecision(17);
        for (std::size_t k = 0; k < values.size(); ++k) os << k + 1 << ',' << values[k] << ',' << residuals[k] << '\n';
    }

    void write_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw ConfigError("cannot write " + path);
        write_csv(os);
    }

    static SpectralSequence read_csv(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot read " + path);
        std::string line;
        std::getline(is, line);
        if (line.rfind("k,s_k", 0) != 0) throw ConfigError(path + ": missing k,s_k header");
        SpectralSequence s;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string f;
            std::vector<std::string> fields;
            while (std::getline(ls, f, ',')) fields.push_back(f);
            if (fields.size() < 2) throw ConfigError(path + ": malformed row '" + line + "'");
            s.values.push_back(std::stod(fields[1]));
            s.residuals.push_back(fields.size() > 2 ? std::stod(fields[2]) : 0.0);
        }
        s.certified = s.values.size();
        s.method = "file";
        s.operator_id = path;
        return s;
    }
};

}  // namespace cusplab::spectra
