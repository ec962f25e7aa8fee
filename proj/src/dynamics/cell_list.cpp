#include "kinetic/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace kinetic {

CellList::CellList(const SpatialDomain& domain, double min_cell_size)
    : dimension_(domain.dimension)
{
    domain.validate();
    for (int k = 0; k < 3; ++k) {
        if (k >= dimension_) {
            shape_[k] = 1;
            cell_size_[k] = 1.0;
            continue;
        }
        const double side = domain.lengths[k];
        const double size = std::max(min_cell_size, side / 32.0);
        shape_[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(side / size)));
        cell_size_[k] = side / static_cast<double>(shape_[k]);
    }

    const std::size_t nx = shape_[0], ny = shape_[1], nz = shape_[2];
    neighbors_.resize(nx * ny * nz);
    for (std::size_t cz = 0; cz < nz; ++cz)
        for (std::size_t cy = 0; cy < ny; ++cy)
            for (std::size_t cx = 0; cx < nx; ++cx) {
                auto& list = neighbors_[(cz * ny + cy) * nx + cx];
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            long x = static_cast<long>(cx) + dx;
                            long y = static_cast<long>(cy) + dy;
                            long z = static_cast<long>(cz) + dz;
                            if (x < 0 || y < 0 || z < 0 || x >= static_cast<long>(nx) || y >= static_cast<long>(ny)
                                || z >= static_cast<long>(nz))
                                continue;
                            list.push_back((static_cast<std::size_t>(z) * ny + static_cast<std::size_t>(y)) * nx
                                           + static_cast<std::size_t>(x));
                        }
            }
    start_.assign(neighbors_.size() + 1, 0);
}

std::size_t CellList::cell_of(const Vec3& q) const
{
    std::size_t c[3] = {0, 0, 0};
    for (int k = 0; k < dimension_; ++k) {
        double v = std::floor(q[k] / cell_size_[k]);
        c[k] = static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(shape_[k] - 1)));
    }
    return (c[2] * shape_[1] + c[1]) * shape_[0] + c[0];
}

void CellList::rebuild(const std::vector<Vec3>& positions)
{
    // Counting sort keeps members of each cell in ascending particle order.
    std::vector<std::size_t> cell(positions.size());
    std::fill(start_.begin(), start_.end(), 0);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        cell[i] = cell_of(positions[i]);
        ++start_[cell[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c)
        start_[c] += start_[c - 1];
    items_.resize(positions.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < positions.size(); ++i)
        items_[fill[cell[i]]++] = i;
}

std::span<const std::size_t> CellList::members(std::size_t cell) const
{
    return {items_.data() + start_[cell], start_[cell + 1] - start_[cell]};
}

} // namespace kinetic
