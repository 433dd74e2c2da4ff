#pragma once

#include "bilayer/error.hpp"
#include "bilayer/scan.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace bilayer {

namespace detail {

inline std::string fmt10(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string row_prefix(const RatioRecord& r) {
    return fmt10(r.alpha) + "," + std::to_string(r.p) + "," + std::to_string(r.q) + ",";
}

} // namespace detail

inline std::string dos_csv(const GridResult& gr) {
    std::string s = "alpha,p,q,E,nu\n";
    for (const auto& r : gr.records) {
        const auto prefix = detail::row_prefix(r);
        for (std::size_t k = 0; k < r.x.size(); ++k)
            s += prefix + detail::fmt10(r.energy(k)) + "," + detail::fmt10(r.density(k)) + "\n";
    }
    return s;
}

inline std::string conductivity_csv(const GridResult& gr) {
    std::string s = "alpha,p,q,mu,sigma_re,sigma_im\n";
    for (const auto& r : gr.records) {
        const auto prefix = detail::row_prefix(r);
        for (std::size_t i = 0; i < r.sigma.size(); ++i)
            s += prefix + detail::fmt10(r.mu_values[i]) + "," + detail::fmt10(r.sigma[i].real()) + "," +
                 detail::fmt10(r.sigma[i].imag()) + "\n";
    }
    return s;
}

/// Conductivity against the integrated density of states at each chemical potential.
inline std::string ids_csv(const GridResult& gr) {
    std::string s = "alpha,p,q,n,sigma_re\n";
    for (const auto& r : gr.records) {
        const auto prefix = detail::row_prefix(r);
        for (std::size_t i = 0; i < r.sigma.size(); ++i)
            s += prefix + detail::fmt10(r.ids_at_mu[i]) + "," + detail::fmt10(r.sigma[i].real()) + "\n";
    }
    return s;
}

/// Writes dos.csv, conductivity.csv and ids.csv according to the requested
/// quantities. Returns the paths written.
inline std::vector<std::filesystem::path> emit_csv(const GridResult& gr, const std::filesystem::path& dir) {
    const auto& q = gr.config.quantities;
    std::vector<std::pair<std::string, std::string>> files;
    if (q.dos) files.emplace_back("dos.csv", dos_csv(gr));
    if (q.conductivity) files.emplace_back("conductivity.csv", conductivity_csv(gr));
    if (q.conductivity && q.integrated_dos) files.emplace_back("ids.csv", ids_csv(gr));

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto probe = dir / ".write_probe";
    {
        std::ofstream out(probe, std::ios::binary | std::ios::trunc);
        if (!out) throw EnvironmentError("output directory is not writable: " + dir.string());
    }
    std::filesystem::remove(probe, ec);

    std::vector<std::filesystem::path> written;
    for (const auto& [name, body] : files) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << body;
        if (!out) throw EnvironmentError("failed writing " + path.string());
        written.push_back(path);
    }
    return written;
}

} // namespace bilayer
