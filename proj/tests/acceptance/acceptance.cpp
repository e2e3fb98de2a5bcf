// Acceptance criteria 1-7, one line each. Usage: acceptance [report-dir]

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "cusplab/pipeline/suites.hpp"

using namespace cusplab;
using namespace cusplab::pipeline;

namespace tol {
constexpr double factorization = 1e-10;
constexpr double coefficient = 0.15;
constexpr double torus = 0.10;
constexpr double exponent_lo = 1.25, exponent_hi = 1.45;
constexpr double smooth_exponent = 3.0;
constexpr double matrix_free = 1e-8;
}  // namespace tol

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<SuiteResult()>>> criteria{
        {"1 factorization", [] { return factorization_suite(1, tol::factorization); }},
        {"2 inequalities", [] { return inequality_suite(2024, 200); }},
        {"3 model-constant",
         [] {
             auto s = fixtures::model("grad_abs", 0.0, 1.0, {12, 16, 24});
             s.assembly = Assembly::Convolutional;
             s.acceptance_tol = tol::coefficient;
             return model_constant_suite(s, tol::torus);
         }},
        {"4 cusp-B",
         [] {
             auto s = fixtures::gaussian_pair({12, 16, 24});
             s.assembly = Assembly::Convolutional;
             s.acceptance_tol = tol::coefficient;
             return cusp_B_suite(s);
         }},
        {"5 decay-orders",
         [] {
             auto s = fixtures::model("abs", 0.0, 1.0, {12, 16, 24});
             s.assembly = Assembly::Convolutional;
             return decay_orders_suite(s, tol::exponent_lo, tol::exponent_hi, tol::smooth_exponent);
         }},
        {"6 weighted-trend", [] { return weighted_trend_suite(32, {15, 60}, 1.0); }},
        {"7 oracle-agreement", [] { return oracle_agreement_suite(tol::matrix_free, 100); }},
    };

    Json all = Json::object();
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        SuiteResult r;
        try {
            r = run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.summary = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !r.pass;
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << name << ": " << r.summary << " [" << std::lround(secs) << " s]" << std::endl;
        all[name] = {{"pass", r.pass}, {"summary", r.summary}, {"seconds", secs}, {"report", r.report}};
    }
    if (argc > 1) {
        std::filesystem::create_directories(argv[1]);
        std::ofstream(std::filesystem::path(argv[1]) / "acceptance.json") << all.dump(2) << '\n';
    }
    std::cout << (failed ? std::to_string(failed) + " of 7 criteria failed" : "all 7 criteria pass") << std::endl;
    return failed ? 1 : 0;
}
