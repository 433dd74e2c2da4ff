// bilayer_kpm: scan / single / check front end.
//
// Exit codes: 0 ok, 1 math or check failure, 2 usage/config error, 3 environment.

#include "bilayer/checks.hpp"
#include "bilayer/config.hpp"
#include "bilayer/csv.hpp"
#include "bilayer/scan.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMath = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEnvironment = 3;

void report(const bilayer::GridResult& gr, const std::vector<std::filesystem::path>& files) {
    std::size_t cached = 0;
    for (const auto& r : gr.records) cached += r.from_cache ? 1 : 0;
    std::printf("%zu ratios ok, %zu skipped, %zu from cache, %.2f s\n", gr.records.size(), gr.failures.size(), cached,
                gr.seconds);
    for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
}

int run_check() {
    const auto results = bilayer::run_checks();
    bool ok = true;
    for (const auto& r : results) {
        std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitMath;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Density of states and Kubo conductivity of an incommensurate 1D bilayer"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    long p = 0, q = 0;

    auto* scan = app.add_subcommand("scan", "scan all rational ratios p/q with p+q=N");
    scan->add_option("--config", config_path, "flat key=value config file")->required();
    scan->add_option("--set", overrides, "key=value override (repeatable)");
    scan->add_option("--out", out_dir, "output directory")->required();

    auto* single = app.add_subcommand("single", "evaluate one ratio p/q (N=p+q)");
    single->add_option("--p", p, "chain-1 sites")->required();
    single->add_option("--q", q, "chain-2 sites")->required();
    single->add_option("--config", config_path, "flat key=value config file");
    single->add_option("--set", overrides, "key=value override (repeatable)");
    single->add_option("--out", out_dir, "output directory")->required();

    auto* check = app.add_subcommand("check", "run the fast invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (check->parsed()) return run_check();

        bilayer::ScanConfig cfg;
        if (scan->parsed()) {
            cfg = bilayer::parse_config(config_path, overrides);
        } else {
            cfg = bilayer::parse_config(config_path, overrides, false);
            if (p < bilayer::kMinChainSites || q < bilayer::kMinChainSites)
                throw bilayer::ConfigError("p,q", "must both be >= " + std::to_string(bilayer::kMinChainSites));
            cfg.N = p + q;
            bilayer::validate_config(cfg);
        }
        cfg.output_dir = out_dir;
        const auto gr = scan->parsed() ? bilayer::run_scan(cfg) : bilayer::run_pairs(cfg, {{p, q}});
        report(gr, bilayer::emit_csv(gr, cfg.output_dir));
        return kExitOk;
    } catch (const bilayer::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const bilayer::EnvironmentError& e) {
        std::cerr << "environment error: " << e.what() << '\n';
        return kExitEnvironment;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitMath;
    }
}
