#pragma once

#include "bilayer/lattice.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

namespace bilayer {

using Complex = std::complex<double>;

enum class Layer : int { one = 1, two = 2 };

struct Site {
    Layer layer{Layer::one};
    double x{0.0};  // horizontal coordinate
};

/// Dense matrix of a represented algebra element together with the ordered
/// site list it acts on. Layer-1 sites come first, each layer ascending in x.
/// `period` is set for periodic truncations; open truncations use literal
/// displacements.
struct SupercellOperator {
    Eigen::MatrixXcd H;
    std::vector<Site> sites;
    std::optional<double> period;
    std::optional<SupercellParams> params;

    Eigen::Index size() const noexcept { return H.rows(); }

    double displacement(Eigen::Index row, Eigen::Index col) const {
        const double x = sites[static_cast<std::size_t>(row)].x;
        const double y = sites[static_cast<std::size_t>(col)].x;
        return period ? min_image_displacement(x, y, *period) : y - x;
    }
};

/// max_ij |A_ij - conj(A_ji)|
inline double hermiticity_defect(const Eigen::MatrixXcd& A) {
    return (A - A.adjoint()).cwiseAbs().maxCoeff();
}

} // namespace bilayer
