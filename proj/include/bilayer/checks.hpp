#pragma once

// Fast invariant suite behind the `check` subcommand.

#include "bilayer/algebra.hpp"
#include "bilayer/kpm.hpp"
#include "bilayer/kubo.hpp"
#include "bilayer/model.hpp"
#include "bilayer/sampling.hpp"
#include "bilayer/scan.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace bilayer {

struct CheckResult {
    std::string name;
    bool passed{false};
    std::string detail;
};

struct CheckOptions {
    // Damping used for DoS reconstruction; swapped out by fault-injection tests.
    std::function<std::vector<double>(int)> damping = jackson_coefficients;
    // Throws EnvironmentError when a numerical backend is unusable.
    std::function<void()> environment_probe;
    std::uint64_t seed{20240601};
};

namespace detail {

inline void default_environment_probe() {
    try {
        const auto sp = supercell_params(3, 3);
        const auto es = eigendecompose(assemble_supercell(ModelParams{0.0, 0.25, 6.0}, sp));
        if (std::abs(es.values(5) - 2.0) > 1e-12) throw EnvironmentError("eigensolver returned a wrong spectrum");
        const std::vector<double> c{1.0, 0.0, 0.0, 0.0};
        const auto y = cosine_transform_fast(c, 4);
        if (std::abs(y[0] - 1.0) > 1e-14) throw EnvironmentError("FFTW returned a wrong transform");
    } catch (const EnvironmentError&) {
        throw;
    } catch (const std::exception& e) {
        throw EnvironmentError(std::string("numerical backend unavailable: ") + e.what());
    }
}

inline std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

inline CheckResult check_algebra_axioms(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double phi = std::numbers::phi;
    const LatticeConstants lat{1.0 / std::sqrt(phi), std::sqrt(phi)};
    std::vector<AlgebraElement> els;
    for (int i = 0; i < 6; ++i) els.push_back(random_element(rng, lat));
    const auto samples = random_block_samples(rng, lat, 20, 4, 4.0);
    double worst = 0.0;
    for (std::size_t i = 0; i + 2 < els.size(); ++i) {
        const auto& f = els[i];
        const auto& g = els[i + 1];
        const auto& h = els[i + 2];
        worst = std::max(worst, max_block_difference(star_product(star_product(f, g), h),
                                                     star_product(f, star_product(g, h)), samples));
        worst = std::max(worst, max_block_difference(adjoint(adjoint(f)), f, samples));
        worst = std::max(worst, max_block_difference(adjoint(star_product(f, g)), star_product(adjoint(g), adjoint(f)),
                                                     samples));
        for (auto d : {derive_parallel, derive_perpendicular}) {
            worst = std::max(worst, max_block_difference(d(star_product(f, g)),
                                                         element_sum(star_product(d(f), g), star_product(f, d(g))),
                                                         samples));
        }
    }
    return {"algebra axioms", worst < 1e-12, "max pointwise defect " + sci(worst)};
}

inline CheckResult check_normalization(const std::function<std::vector<double>(int)>& damping) {
    ScanConfig cfg;
    cfg.N = 34;
    cfg.M = 64;
    double worst = 0.0;
    for (const auto& [p, q] : scan_ratios(cfg.N, cfg.alpha_min, cfg.alpha_max)) {
        if (p < kMinChainSites || q < kMinChainSites) continue;
        const auto sm = compute_moments(cfg, supercell_params(p, q), false);
        const auto g = damping(cfg.M);
        const auto nodes = dos_nodes(sm, g);
        double total = 0.0;
        for (double v : nodes.gamma) total += v;
        const auto n = integrated_dos(nodes.x, nodes.gamma);
        worst = std::max({worst, std::abs(sm.mu[0] - 1.0), std::abs(total / cfg.M - 1.0), std::abs(n.front() - 1.0)});
    }
    return {"normalization identities", worst < 1e-12, "max defect " + sci(worst)};
}

inline CheckResult check_free_chain_dos(const std::function<std::vector<double>(int)>& damping) {
    constexpr long p = 100;
    constexpr int M = 64;
    const auto sp = supercell_params(p, p);
    const auto es = eigendecompose(assemble_supercell(ModelParams{0.0, 0.25, 6.0}, sp));
    const std::span<const double> lambda(es.values.data(), static_cast<std::size_t>(es.values.size()));
    const auto r = rescale_bounds(lambda);
    const auto sm = dos_moments(lambda, r.a, r.b, M);
    const auto g = damping(M);
    const auto nodes = dos_nodes(sm, g);
    double worst = 0.0;
    for (std::size_t k = 0; k < nodes.x.size(); ++k) {
        const double E = r.to_energy(nodes.x[k]);
        if (std::abs(E) > 1.8) continue;
        const double exact = 1.0 / (std::numbers::pi * std::sqrt(4.0 - E * E));
        worst = std::max(worst, std::abs(node_density(r, nodes.x[k], nodes.gamma[k]) - exact));
    }
    return {"free-chain density of states", worst < 5e-3, "max deviation " + sci(worst)};
}

inline CheckResult check_kubo_kpm_vs_exact() {
    const auto sp = supercell_params(21, 13);
    const auto op = assemble_supercell(ModelParams{}, sp);
    const auto es = eigendecompose(op);
    const std::span<const double> lambda(es.values.data(), static_cast<std::size_t>(es.values.size()));
    const auto r = rescale_bounds(lambda);
    const Eigen::MatrixXcd J = current_in_eigenbasis(es.vectors, assemble_current(op));
    std::vector<double> lambda_hat(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda_hat[i] = r.to_unit(lambda[i]);
    SpectralMoments sm = dos_moments(lambda, r.a, r.b, 256);
    sm.ccc = ccc_moments(lambda_hat, J, 256);
    const auto w = conductivity_weights(sm);
    double worst = 0.0;
    for (double mu : {-1.0, 0.0, 1.0}) {
        const TransportConfig tc{10.0, mu, 1.0, 0.0};
        const Complex exact = conductivity_exact(lambda, J, tc, degeneracy_threshold(r.a));
        const Complex kpm = conductivity_kpm(w, tc);
        worst = std::max(worst, std::abs(kpm - exact) / std::max(std::abs(exact), 1e-8));
    }
    return {"Kubo KPM vs exact spectral sum", worst < 0.05, "max relative error " + sci(worst)};
}

inline CheckResult check_transform_agreement() {
    ScanConfig cfg;
    cfg.N = 21;
    cfg.M = 48;
    const auto sm = compute_moments(cfg, supercell_params(8, 13), true);
    const auto fast = dos_nodes(sm, TransformMethod::fast);
    const auto direct = dos_nodes(sm, TransformMethod::direct);
    double worst = 0.0;
    for (std::size_t k = 0; k < fast.gamma.size(); ++k) worst = std::max(worst, std::abs(fast.gamma[k] - direct.gamma[k]));
    const auto wf = conductivity_weights(sm, TransformMethod::fast);
    const auto wd = conductivity_weights(sm, TransformMethod::direct);
    worst = std::max(worst, (wf.Gamma - wd.Gamma).cwiseAbs().maxCoeff());
    return {"fast vs direct cosine transform", worst < 1e-10, "max difference " + sci(worst)};
}

} // namespace detail

/// Runs every check. Throws EnvironmentError if the backend probe fails.
inline std::vector<CheckResult> run_checks(const CheckOptions& opts = {}) {
    if (opts.environment_probe) opts.environment_probe();
    else detail::default_environment_probe();

    std::vector<CheckResult> out;
    auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            out.push_back(fn());
        } catch (const EnvironmentError&) {
            throw;
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("threw: ") + e.what()});
        }
    };
    guarded("algebra axioms", [&] { return detail::check_algebra_axioms(opts.seed); });
    guarded("normalization identities", [&] { return detail::check_normalization(opts.damping); });
    guarded("free-chain density of states", [&] { return detail::check_free_chain_dos(opts.damping); });
    guarded("Kubo KPM vs exact spectral sum", [&] { return detail::check_kubo_kpm_vs_exact(); });
    guarded("fast vs direct cosine transform", [&] { return detail::check_transform_agreement(); });
    return out;
}

} // namespace bilayer
