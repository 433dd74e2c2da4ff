#pragma once

// Sweep over rational supercells: assemble, diagonalize, take moments,
// evaluate node weights and conductivities. One task per ratio.

#include "bilayer/error.hpp"
#include "bilayer/kpm.hpp"
#include "bilayer/kubo.hpp"
#include "bilayer/lattice.hpp"
#include "bilayer/model.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace bilayer {

struct Quantities {
    bool dos{true};
    bool conductivity{true};
    bool integrated_dos{true};
};

struct ScanConfig {
    long N{0};
    double alpha_min{1.0 / 6.0};
    double alpha_max{6.0};
    int M{1000};
    ModelParams model;
    TransportConfig transport;
    double mu_min{-2.5};
    double mu_max{2.5};
    int mu_steps{21};
    double epsilon_rescale{kDefaultRescaleMargin};
    Quantities quantities;
    int workers{1};
    std::filesystem::path output_dir{"."};
    bool cache{false};
    std::filesystem::path cache_dir;  // empty: <output_dir>/cache

    std::vector<double> mu_grid() const {
        std::vector<double> g(static_cast<std::size_t>(mu_steps));
        for (int i = 0; i < mu_steps; ++i)
            g[i] = mu_steps == 1 ? mu_min : mu_min + (mu_max - mu_min) * static_cast<double>(i) / (mu_steps - 1);
        return g;
    }

    std::filesystem::path effective_cache_dir() const { return cache_dir.empty() ? output_dir / "cache" : cache_dir; }
};

/// Everything a cached moment file must match exactly to be reused.
struct MomentKey {
    long N{0};
    long p{0};
    long q{0};
    int M{0};
    double W{0.0};
    double sigma{0.0};
    double cutoff_sigmas{0.0};
    double epsilon{0.0};

    friend bool operator==(const MomentKey&, const MomentKey&) = default;

    static MomentKey from(const ScanConfig& cfg, long p, long q) {
        return {p + q, p, q, cfg.M, cfg.model.W, cfg.model.sigma, cfg.model.cutoff_sigmas, cfg.epsilon_rescale};
    }
};

struct RatioRecord {
    long p{0};
    long q{0};
    double alpha{0.0};
    SpectralMoments moments;
    std::vector<double> x;      // rescaled nodes
    std::vector<double> gamma;  // node weights
    std::vector<double> ids;    // integrated DoS at each node
    std::vector<double> mu_values;
    std::vector<Complex> sigma;
    std::vector<double> ids_at_mu;
    bool from_cache{false};

    double energy(std::size_t k) const { return moments.a * x[k] + moments.b; }
    double density(std::size_t k) const { return node_density(moments.rescaling(), x[k], gamma[k]); }
};

struct RatioFailure {
    long p{0};
    long q{0};
    std::string message;
};

struct GridResult {
    ScanConfig config;
    std::vector<RatioRecord> records;  // ascending p
    std::vector<RatioFailure> failures;
    double seconds{0.0};
};

// ---------------------------------------------------------------------------
// Moment cache: one JSON file per ratio, numbers with 17 significant digits.

inline constexpr int kCacheFormatVersion = 1;

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string key_text(const MomentKey& k) {
    return std::to_string(k.N) + "|" + std::to_string(k.p) + "|" + std::to_string(k.q) + "|" + std::to_string(k.M) +
           "|" + fmt17(k.W) + "|" + fmt17(k.sigma) + "|" + fmt17(k.cutoff_sigmas) + "|" + fmt17(k.epsilon);
}

} // namespace detail

inline std::filesystem::path cache_file(const std::filesystem::path& dir, const MomentKey& k) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(detail::fnv1a(detail::key_text(k))));
    return dir / ("moments_N" + std::to_string(k.N) + "_p" + std::to_string(k.p) + "_q" + std::to_string(k.q) + "_M" +
                  std::to_string(k.M) + "_" + hash + ".json");
}

inline std::string serialize_moments(const MomentKey& k, const SpectralMoments& sm) {
    using detail::fmt17;
    std::ostringstream os;
    os << "{\n  \"format_version\": " << kCacheFormatVersion << ",\n  \"N\": " << k.N << ",\n  \"p\": " << k.p
       << ",\n  \"q\": " << k.q << ",\n  \"M\": " << k.M << ",\n  \"W\": " << fmt17(k.W)
       << ",\n  \"sigma\": " << fmt17(k.sigma) << ",\n  \"cutoff_sigmas\": " << fmt17(k.cutoff_sigmas)
       << ",\n  \"epsilon\": " << fmt17(k.epsilon) << ",\n  \"a\": " << fmt17(sm.a) << ",\n  \"b\": " << fmt17(sm.b)
       << ",\n  \"mu\": [";
    for (std::size_t m = 0; m < sm.mu.size(); ++m) os << (m ? ", " : "") << fmt17(sm.mu[m]);
    os << "]";
    if (sm.ccc) {
        os << ",\n  \"ccc\": [";
        for (Eigen::Index r = 0; r < sm.ccc->rows(); ++r) {
            os << (r ? ",\n    [" : "\n    [");
            for (Eigen::Index c = 0; c < sm.ccc->cols(); ++c) os << (c ? ", " : "") << fmt17((*sm.ccc)(r, c));
            os << "]";
        }
        os << "\n  ]";
    }
    os << "\n}\n";
    return os.str();
}

/// Parses a cache file body. Returns nothing unless every key field matches.
inline std::optional<SpectralMoments> parse_moments(const std::string& text, const MomentKey& expect) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.at("format_version").get<int>() != kCacheFormatVersion) return std::nullopt;
        const MomentKey got{j.at("N").get<long>(),         j.at("p").get<long>(),
                            j.at("q").get<long>(),         j.at("M").get<int>(),
                            j.at("W").get<double>(),       j.at("sigma").get<double>(),
                            j.at("cutoff_sigmas").get<double>(), j.at("epsilon").get<double>()};
        if (!(got == expect)) return std::nullopt;
        SpectralMoments sm;
        sm.M = got.M;
        sm.a = j.at("a").get<double>();
        sm.b = j.at("b").get<double>();
        sm.mu = j.at("mu").get<std::vector<double>>();
        if (sm.mu.size() != static_cast<std::size_t>(sm.M) + 1) return std::nullopt;
        if (j.contains("ccc")) {
            const auto rows = j.at("ccc").get<std::vector<std::vector<double>>>();
            if (rows.size() != sm.mu.size()) return std::nullopt;
            Eigen::MatrixXd ccc(sm.M + 1, sm.M + 1);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != sm.mu.size()) return std::nullopt;
                for (std::size_t c = 0; c < rows[r].size(); ++c)
                    ccc(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            }
            sm.ccc = std::move(ccc);
        }
        return sm;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

inline void store_moments(const std::filesystem::path& dir, const MomentKey& k, const SpectralMoments& sm) {
    std::filesystem::create_directories(dir);
    const auto target = cache_file(dir, k);
    std::ostringstream tid;
    tid << std::this_thread::get_id();
    auto tmp = target;
    tmp += ".tmp." + tid.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw EnvironmentError("cannot write cache file " + tmp.string());
        out << serialize_moments(k, sm);
        if (!out) throw EnvironmentError("failed writing cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

inline std::optional<SpectralMoments> load_moments(const std::filesystem::path& dir, const MomentKey& k) {
    std::ifstream in(cache_file(dir, k), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_moments(buf.str(), k);
}

/// Write-then-read of a record's moments through the cache format.
inline RatioRecord moments_cache_roundtrip(const RatioRecord& rec, const MomentKey& key) {
    RatioRecord out = rec;
    auto parsed = parse_moments(serialize_moments(key, rec.moments), key);
    if (!parsed) throw NumericalError("cache roundtrip failed to parse its own output");
    out.moments = std::move(*parsed);
    return out;
}

// ---------------------------------------------------------------------------

/// Moments (and, when requested, current-current moments) of one supercell.
inline SpectralMoments compute_moments(const ScanConfig& cfg, const SupercellParams& sp, bool with_current) {
    const SupercellOperator op = assemble_supercell(cfg.model, sp);
    const Eigensystem es = eigendecompose(op);
    const std::span<const double> lambda(es.values.data(), static_cast<std::size_t>(es.values.size()));
    const Rescaling r = rescale_bounds(lambda, cfg.epsilon_rescale);
    SpectralMoments sm = dos_moments(lambda, r.a, r.b, cfg.M);
    if (with_current) {
        const Eigen::MatrixXcd J = current_in_eigenbasis(es.vectors, assemble_current(op));
        std::vector<double> lambda_hat(lambda.size());
        for (std::size_t i = 0; i < lambda.size(); ++i) lambda_hat[i] = r.to_unit(lambda[i]);
        sm.ccc = ccc_moments(lambda_hat, J, cfg.M);
    }
    return sm;
}

namespace detail {

inline bool all_finite(const RatioRecord& r) {
    auto finite = [](const auto& v) {
        for (const auto& e : v)
            if (!std::isfinite(std::abs(e))) return false;
        return true;
    };
    if (!std::isfinite(r.moments.a) || !std::isfinite(r.moments.b)) return false;
    if (r.moments.ccc && !r.moments.ccc->allFinite()) return false;
    return finite(r.moments.mu) && finite(r.gamma) && finite(r.ids) && finite(r.sigma) && finite(r.ids_at_mu);
}

} // namespace detail

/// Evaluates observables from moments: node weights, integrated DoS and sigma(mu).
inline void evaluate_record(const ScanConfig& cfg, RatioRecord& rec) {
    const DosNodes nodes = dos_nodes(rec.moments);
    rec.x = nodes.x;
    rec.gamma = nodes.gamma;
    rec.ids = integrated_dos(rec.x, rec.gamma);
    rec.mu_values.clear();
    rec.sigma.clear();
    rec.ids_at_mu.clear();
    if (cfg.quantities.conductivity) {
        const ConductivityWeights w = conductivity_weights(rec.moments);
        TransportConfig tc = cfg.transport;
        for (double mu : cfg.mu_grid()) {
            tc.mu = mu;
            rec.mu_values.push_back(mu);
            rec.sigma.push_back(conductivity_kpm(w, tc));
            rec.ids_at_mu.push_back(integrated_dos_at(rec.moments.rescaling(), rec.x, rec.gamma, mu));
        }
    }
}

inline RatioRecord process_ratio(const ScanConfig& cfg, long p, long q) {
    const SupercellParams sp = supercell_params(p, q);
    const MomentKey key = MomentKey::from(cfg, p, q);
    const bool need_ccc = cfg.quantities.conductivity;
    RatioRecord rec;
    rec.p = p;
    rec.q = q;
    rec.alpha = sp.alpha;

    std::optional<SpectralMoments> cached;
    if (cfg.cache) {
        cached = load_moments(cfg.effective_cache_dir(), key);
        if (cached && need_ccc && !cached->ccc) cached.reset();
    }
    if (cached) {
        rec.moments = std::move(*cached);
        rec.from_cache = true;
    } else {
        rec.moments = compute_moments(cfg, sp, need_ccc);
        if (cfg.cache) store_moments(cfg.effective_cache_dir(), key, rec.moments);
    }
    if (!need_ccc) rec.moments.ccc.reset();
    evaluate_record(cfg, rec);
    if (!detail::all_finite(rec))
        throw NumericalError("non-finite value in record (p=" + std::to_string(p) + ", q=" + std::to_string(q) + ")");
    return rec;
}

inline void validate(const ScanConfig& cfg) {
    if (cfg.N < 6) throw ConfigError("N", "must be >= 6");
    if (cfg.M < 1) throw ConfigError("M", "must be >= 1");
    if (!(cfg.alpha_min > 0.0)) throw ConfigError("alpha_min", "must be > 0");
    if (!(cfg.alpha_min < cfg.alpha_max)) throw ConfigError("alpha_max", "must exceed alpha_min");
    if (cfg.mu_steps < 1) throw ConfigError("mu_steps", "must be >= 1");
    if (cfg.workers < 1) throw ConfigError("workers", "must be >= 1");
    if (!(cfg.epsilon_rescale > 0.0 && cfg.epsilon_rescale < 1.0)) throw ConfigError("epsilon", "must lie in (0, 1)");
    cfg.model.validate();
    cfg.transport.validate();
}

/// Runs `pairs` with a pool of cfg.workers threads. Results keep the order of `pairs`.
inline GridResult run_pairs(const ScanConfig& cfg, const std::vector<std::pair<long, long>>& pairs,
                            std::ostream* warnings = &std::cerr) {
    validate(cfg);
    if (pairs.empty()) throw Error("no ratios in range");
    const auto start = std::chrono::steady_clock::now();

    using Slot = std::variant<std::monostate, RatioRecord, RatioFailure, std::exception_ptr>;
    std::vector<Slot> slots(pairs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < pairs.size(); i = next++) {
            const auto [p, q] = pairs[i];
            try {
                slots[i] = process_ratio(cfg, p, q);
            } catch (const NumericalError&) {
                slots[i] = std::current_exception();
            } catch (const EnvironmentError&) {
                slots[i] = std::current_exception();
            } catch (const std::exception& e) {
                slots[i] = RatioFailure{p, q, e.what()};
            }
        }
    };
    const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), pairs.size());
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(nthreads);
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(work);
    }

    GridResult gr;
    gr.config = cfg;
    for (auto& slot : slots) {
        if (auto* err = std::get_if<std::exception_ptr>(&slot)) std::rethrow_exception(*err);
        if (auto* rec = std::get_if<RatioRecord>(&slot)) {
            gr.records.push_back(std::move(*rec));
        } else if (auto* fail = std::get_if<RatioFailure>(&slot)) {
            if (warnings)
                *warnings << "warning: skipping ratio p=" << fail->p << " q=" << fail->q << ": " << fail->message << '\n';
            gr.failures.push_back(std::move(*fail));
        }
    }
    if (gr.records.empty()) throw Error("scan produced no successful ratio");
    gr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return gr;
}

inline GridResult run_scan(const ScanConfig& cfg, std::ostream* warnings = &std::cerr) {
    validate(cfg);
    return run_pairs(cfg, scan_ratios(cfg.N, cfg.alpha_min, cfg.alpha_max), warnings);
}

} // namespace bilayer
