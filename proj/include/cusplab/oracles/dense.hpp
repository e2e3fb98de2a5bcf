#pragma once

#include "cusplab/discretization/assemble.hpp"
#include "cusplab/spectra/solver.hpp"

namespace cusplab::oracles {

/// Full SVD of the assembled Galerkin matrix; the reference for every
/// matrix-free path.
inline spectra::SpectralSequence dense_oracle(const kernellab::KernelField& kernel, const discretization::GridSpec& left,
                                              const discretization::GridSpec& right, const kernellab::QuadratureRule& rule = {},
                                              double max_entries = 4e7) {
    const auto op = discretization::assemble_dense(kernel, left, right, rule, max_entries);
    spectra::SolverOptions opt;
    opt.method = spectra::Method::Dense;
    opt.dense_entries = max_entries;
    return spectra::singular_values(*op, std::min(op->rows(), op->cols()), opt);
}

}  // namespace cusplab::oracles
