// cusplab: kernel synthesis, spectra, verification suites and golden files.
// Exit codes: 0 pass, 1 assertion or solver failure, 2 configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cusplab/oracles/golden.hpp"
#include "cusplab/pipeline/suites.hpp"

namespace fs = std::filesystem;
using namespace cusplab;
using namespace cusplab::pipeline;

namespace {

constexpr const char* version = "cusplab 1.0";

struct Overrides {
    std::string config;
    std::size_t grid = 0;
    std::string chain;
    std::size_t k = 0;
    double tol = 0.0;
    long seed = -1;
    std::string out;
};

Config load_config(const Overrides& o) {
    Config c = Config::load(o.config);
    if (o.grid) {
        c.set(c.has("grid.chain") ? "grid.chain" : "grid.n", std::to_string(o.grid));
    }
    if (!o.chain.empty()) c.set("grid.chain", o.chain);
    if (o.k) c.set("solver.k", std::to_string(o.k));
    if (o.tol > 0.0) c.set("solver.tol", format_sci(o.tol));
    if (o.seed >= 0) c.set("solver.seed", std::to_string(o.seed));
    return c;
}

void write_json(const fs::path& path, const Json& j) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

Json kernel_json(const KernelSpec& k) {
    Json j{{"id", k.id()}, {"kind", k.kind}};
    if (k.kind == "pair") {
        j["xi"] = k.xi;
        j["eta"] = k.eta;
    } else {
        j["phi"] = k.phi;
        j["a"] = k.a;
        j["b"] = k.b;
        j["beta"] = k.beta;
        if (k.a_support) j["a_support"] = {k.a_support->lo, k.a_support->hi};
    }
    return j;
}

int cmd_synth(const Overrides& o) {
    const Config c = Config::load(o.config);
    const Settings s = settings_from(c);
    (void)s.kernel.field();  // parse errors surface here
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        write_json(fs::path(o.out) / "kernel.json", kernel_json(s.kernel));
    }
    std::cout << s.kernel.id() << '\n';
    return 0;
}

int cmd_spectrum(const Overrides& o) {
    const Config c = load_config(o);
    const Settings s = settings_from(c);
    const fs::path out = o.out.empty() ? fs::path("out") : fs::path(o.out);
    fs::create_directories(out);

    Chain chain;
    Json levels = Json::array(), artifacts = Json::array();
    bool complete = true;
    for (std::size_t n : s.chain) {
        const auto op = build_operator(s, n);
        const std::size_t k = s.k_for(n);
        auto seq = spectra::singular_values(*op, k, s.solver);
        seq.grid_id = s.grid(n).id();
        const std::string csv = "spectrum_n" + std::to_string(n) + ".csv", scaled = "scaled_n" + std::to_string(n) + ".csv";
        seq.write_csv((out / csv).string());
        {
            std::ofstream os(out / scaled);
            asymptotics::write_scaled_csv(os, seq);
        }
        artifacts.push_back(csv);
        artifacts.push_back(scaled);
        levels.push_back({{"n", n}, {"grid", seq.grid_id}, {"operator", op->id()}, {"requested", k}, {"certified", seq.certified}, {"method", seq.method}});
        if (seq.certified < k) {
            complete = false;
            std::cerr << "n=" << n << ": solver certified " << seq.certified << " of " << k << " values\n";
        }
        chain.push_back({(s.hi[0] - s.lo[0]) / static_cast<double>(n), std::move(seq)});
    }

    Json report{{"kernel", kernel_json(s.kernel)}, {"levels", levels}};
    try {
        const auto w = s.window();
        report["tail"] = asymptotics::to_json(asymptotics::tail_report(chain, w));
    } catch (const ParameterError& e) {
        report["tail"] = nullptr;
        report["tail_skipped"] = e.what();
    }
    report["predicted_coefficient"] = s.kernel.predicted_coefficient(s.quadrature);
    write_json(out / "report.json", report);
    artifacts.push_back("report.json");

    Json manifest{{"tool", version},
                  {"config", c.origin()},
                  {"config_hash", s.config_hash},
                  {"config_values", c.values()},
                  {"kernel_id", s.kernel.id()},
                  {"chain", s.chain},
                  {"k", s.k},
                  {"seed", s.solver.seed},
                  {"tolerances", {{"solver", s.solver.tol}, {"quadrature", s.quadrature.tol}, {"acceptance", s.acceptance_tol}}},
                  {"artifacts", artifacts}};
    write_json(out / "manifest.json", manifest);
    std::cout << "wrote " << artifacts.size() << " artifacts to " << out.string() << '\n';
    return complete ? 0 : 1;
}

SuiteResult run_suite(const std::string& name, const Overrides& o) {
    std::optional<Settings> cfg;
    if (!o.config.empty()) cfg = settings_from(load_config(o));
    const std::uint64_t seed = o.seed >= 0 ? static_cast<std::uint64_t>(o.seed) : 0;
    if (name == "factorization") return factorization_suite(seed ? seed : 1);
    if (name == "inequalities") return inequality_suite(seed ? seed : 2024);
    if (name == "model-constant") {
        auto s = cfg.value_or(fixtures::model("grad_abs", 0.0, 1.0, {12, 16, 24}));
        if (!cfg) s.assembly = Assembly::Convolutional;
        if (s.kernel.kind != "model") throw ConfigError("suite model-constant needs kernel.kind = model");
        return model_constant_suite(s);
    }
    if (name == "cusp-B") {
        auto s = cfg.value_or(fixtures::gaussian_pair({12, 16, 24}));
        if (!cfg) s.assembly = Assembly::Convolutional;
        if (s.kernel.kind != "pair") throw ConfigError("suite cusp-B needs kernel.kind = pair");
        return cusp_B_suite(s);
    }
    if (name == "decay-orders") {
        auto s = cfg.value_or(fixtures::model("abs", 0.0, 1.0, {12, 16, 24}));
        if (!cfg) s.assembly = Assembly::Convolutional;
        return decay_orders_suite(s);
    }
    throw ConfigError("unknown suite '" + name + "' (inequalities, model-constant, cusp-B, factorization, decay-orders)");
}

int cmd_verify(const std::string& suite, const Overrides& o) {
    const SuiteResult r = run_suite(suite, o);
    const Json j{{"suite", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"report", r.report}};
    if (o.out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        fs::create_directories(o.out);
        write_json(fs::path(o.out) / ("verify_" + suite + ".json"), j);
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.summary << '\n';
    }
    return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral asymptotics of cusp-type integral operators"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);
    Overrides o;
    std::string suite;

    auto* synth = app.add_subcommand("synth", "parse a kernel config and print its id");
    synth->add_option("--config", o.config, "kernel config file")->required();
    synth->add_option("--out", o.out, "directory for kernel.json");

    auto* spectrum = app.add_subcommand("spectrum", "singular values on a grid or refinement chain");
    spectrum->add_option("--config", o.config, "config file")->required();
    auto* grid = spectrum->add_option("--grid", o.grid, "grid points per axis")->check(CLI::PositiveNumber);
    spectrum->add_option("--refine-chain", o.chain, "comma-separated grid sizes, coarse to fine")->excludes(grid);
    spectrum->add_option("--k", o.k, "number of singular values")->check(CLI::PositiveNumber);
    spectrum->add_option("--tol", o.tol, "solver tolerance relative to s_1")->check(CLI::PositiveNumber);
    spectrum->add_option("--seed", o.seed, "solver start-vector seed")->check(CLI::NonNegativeNumber);
    spectrum->add_option("--out", o.out, "output directory (default ./out)");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite, "inequalities | model-constant | cusp-B | factorization | decay-orders")->required();
    verify->add_option("--config", o.config, "settings for the operator suites (default: built-in fixture)");
    verify->add_option("--refine-chain", o.chain, "override grid.chain (with --config)");
    verify->add_option("--seed", o.seed, "random seed")->check(CLI::NonNegativeNumber);
    verify->add_option("--out", o.out, "write verify_<suite>.json here instead of stdout");

    auto* oracle = app.add_subcommand("oracle", "regenerate the golden spectra");
    oracle->add_option("--out", o.out, "golden directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) return cmd_synth(o);
        if (*spectrum) return cmd_spectrum(o);
        if (*verify) return cmd_verify(suite, o);
        if (*oracle) {
            oracles::write_golden(o.out);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
