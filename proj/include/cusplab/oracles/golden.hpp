#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cusplab/oracles/dense.hpp"
#include "cusplab/oracles/gaussian.hpp"
#include "cusplab/oracles/torus.hpp"

namespace cusplab::oracles {

struct GoldenFixture {
    std::string name;
    std::function<spectra::SpectralSequence()> compute;
};

inline kernellab::ModelKernelSpec unit_model(HomogeneousFunction phi) {
    return kernellab::ModelKernelSpec::unit_weights(2, kernellab::SmoothField::constant(1.0, kernellab::ModelKernelSpec::a_variables()),
                                                    std::move(phi));
}

/// Reference spectra checked into the golden directory as <name>.csv.
inline std::vector<GoldenFixture> golden_fixtures() {
    using discretization::GridSpec;
    return {
        {"cusp_gaussian_n6",
         [] {
             const auto g = gaussian_closed_forms().front();
             const auto grid = GridSpec::cube(-1.5, 1.5, 6);
             return dense_oracle(kernellab::gradient_kernel(kernellab::PairExpansion::parse(g.xi(), g.eta())), grid, grid);
         }},
        {"model_grad_abs_n8",
         [] {
             const auto grid = GridSpec::cube(0.0, 1.0, 8);
             return dense_oracle(kernellab::model_kernel(unit_model(HomogeneousFunction::grad_abs())), grid, grid);
         }},
        {"torus_grad_abs_n12", [] { return torus_symbol_analytic(HomogeneousFunction::grad_abs(), 12, 1.0, 2.0).sequence("torus_grad_abs_n12"); }},
    };
}

inline void write_golden(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& f : golden_fixtures()) f.compute().write_csv((dir / (f.name + ".csv")).string());
}

}  // namespace cusplab::oracles
