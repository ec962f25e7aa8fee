#include "kinetic/scattering.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace kinetic {


ScatteringKernel::ScatteringKernel(std::vector<double> reduced_b, std::vector<double> g, std::vector<double> b_max,
                                   std::vector<double> chi, double chi_min)
    : x_(std::move(reduced_b)), g_(std::move(g)), b_max_(std::move(b_max)), chi_(std::move(chi)), chi_min_(chi_min)
{
    if (x_.empty() || g_.empty())
        throw InputError("kernel grids must not be empty");
    if (b_max_.size() != g_.size() || chi_.size() != x_.size() * g_.size())
        throw InputError("kernel table size does not match its grids");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1]))
            throw InputError("reduced impact grid must be strictly increasing");
    for (std::size_t j = 0; j < g_.size(); ++j) {
        if (!(g_[j] > 0.0) || (j > 0 && !(g_[j] > g_[j - 1])))
            throw InputError("speed grid must be positive and strictly increasing");
        log_g_.push_back(std::log(g_[j]));
        log_b_max_.push_back(b_max_[j] > 0.0 ? std::log(b_max_[j]) : -HUGE_VAL);
    }
    if (g_.size() >= 3) {
        const double d = (log_g_.back() - log_g_.front()) / static_cast<double>(g_.size() - 1);
        uniform_g_ = d > 0.0;
        for (std::size_t j = 1; j < g_.size() && uniform_g_; ++j)
            uniform_g_ = std::fabs(log_g_[j] - log_g_[j - 1] - d) < 1e-9 * d;
        inv_dlg_ = uniform_g_ ? 1.0 / d : 0.0;
    }
    if (x_.size() >= 3 && x_.front() >= 0.0 && x_.back() <= 1.0) {
        const std::size_t buckets = 4 * x_.size();
        x_guide_.resize(buckets);
        std::size_t i = 0;
        for (std::size_t k = 0; k < buckets; ++k) {
            const double edge = static_cast<double>(k) / static_cast<double>(buckets);
            while (i + 1 < x_.size() && x_[i + 1] * x_[i + 1] <= edge)
                ++i;
            x_guide_[k] = i;
        }
    }
}

ScatteringKernel::Lookup ScatteringKernel::lookup(double g) const
{
    Lookup at;
    if (g_.size() == 1) {
        at.b_max = b_max_[0];
        return at;
    }
    const double lg = std::log(g);
    const std::size_t last = g_.size() - 2;
    std::size_t j;
    if (lg <= log_g_.front()) {
        j = 0;
    } else if (lg >= log_g_.back()) {
        j = last;
    } else if (uniform_g_) {
        j = std::min(last, static_cast<std::size_t>((lg - log_g_.front()) * inv_dlg_));
        if (lg < log_g_[j])
            --j;
        else if (j < last && lg >= log_g_[j + 1])
            ++j;
    } else {
        j = static_cast<std::size_t>(std::upper_bound(log_g_.begin(), log_g_.end(), lg) - log_g_.begin()) - 1;
    }
    // Log-log linear between rows, extrapolated from the edge segments; exact
    // for power laws where b_max ~ g^(-2/gamma).
    const double u = (lg - log_g_[j]) / (log_g_[j + 1] - log_g_[j]);
    at.row = j;
    at.t = std::clamp(u, 0.0, 1.0);
    if (b_max_[j] <= 0.0 || b_max_[j + 1] <= 0.0)
        at.b_max = 0.0;
    else
        at.b_max = std::exp(log_b_max_[j] + u * (log_b_max_[j + 1] - log_b_max_[j]));
    return at;
}

double ScatteringKernel::b_max(double g) const
{
    return lookup(g).b_max;
}

double ScatteringKernel::chi(const Lookup& at, double b) const
{
    const double bm = at.b_max;
    if (!(bm > 0.0))
        return 0.0;
    const double x = b / bm;
    if (x >= 1.0)
        return 0.0;
    const std::size_t nb = x_.size();
    std::size_t i = 0;
    double s = 0.0;
    if (nb >= 2) {
        if (x <= x_.front()) {
            i = 0;
        } else if (x >= x_.back()) {
            i = nb - 2;
            s = 1.0;
        } else {
            if (!x_guide_.empty()) {
                const std::size_t k = std::min(x_guide_.size() - 1,
                                               static_cast<std::size_t>(x * x * static_cast<double>(x_guide_.size())));
                i = std::min(nb - 2, x_guide_[k]);
                while (i > 0 && x < x_[i])
                    --i;
                while (i < nb - 2 && x >= x_[i + 1])
                    ++i;
            } else {
                i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
            }
            s = (x - x_[i]) / (x_[i + 1] - x_[i]);
        }
    }
    const std::size_t j = at.row;
    const double t = at.t;
    if (nb == 1 && g_.size() == 1)
        return chi_[0];
    if (nb == 1)
        return (1.0 - t) * chi_[j] + t * chi_[j + 1];
    const double* row0 = chi_.data() + j * nb;
    const double lower = (1.0 - s) * row0[i] + s * row0[i + 1];
    if (g_.size() == 1)
        return lower;
    const double* row1 = row0 + nb;
    const double upper = (1.0 - s) * row1[i] + s * row1[i + 1];
    return (1.0 - t) * lower + t * upper;
}

double ScatteringKernel::chi(double b, double g) const
{
    return chi(lookup(g), b);
}

void ScatteringKernel::write_csv(std::ostream& out) const
{
    out << "# kinetic scattering kernel v1\n";
    out << fmt::format("# chi_min={:.17g}\n", chi_min_);
    out << "g_index,b_index,g,b_max,x,b,chi\n";
    for (std::size_t j = 0; j < g_.size(); ++j)
        for (std::size_t i = 0; i < x_.size(); ++i)
            out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", j, i, g_[j], b_max_[j], x_[i],
                               x_[i] * b_max_[j], chi_at(i, j));
}

ScatteringKernel ScatteringKernel::read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "# kinetic scattering kernel v1")
        throw InputError("not a version-1 scattering kernel file");
    if (!std::getline(in, line) || line.rfind("# chi_min=", 0) != 0)
        throw InputError("kernel file lacks the chi_min header");
    const double chi_min = std::stod(line.substr(10));
    if (!std::getline(in, line) || line != "g_index,b_index,g,b_max,x,b,chi")
        throw InputError("unexpected kernel column header");

    std::map<std::size_t, double> g, b_max, x;
    std::map<std::pair<std::size_t, std::size_t>, double> chi;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 7)
            throw InputError("kernel row with " + std::to_string(cells.size()) + " columns");
        const auto j = std::stoul(cells[0]);
        const auto i = std::stoul(cells[1]);
        g[j] = std::stod(cells[2]);
        b_max[j] = std::stod(cells[3]);
        x[i] = std::stod(cells[4]);
        chi[{j, i}] = std::stod(cells[6]);
    }
    std::vector<double> gv, bv, xv, cv;
    for (auto& [j, v] : g) {
        if (j != gv.size())
            throw InputError("kernel g indices are not contiguous");
        gv.push_back(v);
        bv.push_back(b_max[j]);
    }
    for (auto& [i, v] : x) {
        if (i != xv.size())
            throw InputError("kernel b indices are not contiguous");
        xv.push_back(v);
    }
    if (chi.size() != gv.size() * xv.size())
        throw InputError("kernel table is incomplete");
    for (auto& [key, v] : chi)
        cv.push_back(v);
    return ScatteringKernel(std::move(xv), std::move(gv), std::move(bv), std::move(cv), chi_min);
}

KernelGrid KernelGrid::standard(double g_lo, double g_hi, std::size_t n_b, std::size_t n_g)
{
    if (!(g_lo > 0.0) || !(g_hi >= g_lo) || n_b == 0 || n_g == 0)
        throw DomainError("invalid kernel grid request");
    KernelGrid grid;
    if (n_b == 1) {
        grid.reduced_b = {0.5};
    } else if (n_b < 16) {
        for (std::size_t i = 0; i < n_b; ++i)
            grid.reduced_b.push_back(std::sqrt(static_cast<double>(i) / static_cast<double>(n_b - 1)));
    } else {
        // chi is close to linear in b near b = 0, and uniform-in-b^2 spacing
        // makes that first cell ~2.5x wider in b than the next; quarter it.
        const std::size_t m = n_b - 3;
        const double x1 = std::sqrt(1.0 / static_cast<double>(m - 1));
        grid.reduced_b.push_back(0.0);
        for (int s = 1; s < 4; ++s)
            grid.reduced_b.push_back(0.25 * s * x1);
        for (std::size_t i = 1; i < m; ++i)
            grid.reduced_b.push_back(std::sqrt(static_cast<double>(i) / static_cast<double>(m - 1)));
    }
    if (n_g == 1)
        grid.g = {g_lo};
    else
        for (std::size_t j = 0; j < n_g; ++j)
            grid.g.push_back(g_lo * std::pow(g_hi / g_lo, static_cast<double>(j) / static_cast<double>(n_g - 1)));
    return grid;
}

ScatteringKernel build_kernel_table(const InteractionPotential& pot, double mass, const KernelGrid& grid,
                                    double chi_min, std::size_t validation_samples, double* midpoint_error)
{
    pot.validate();
    const std::size_t nb = grid.reduced_b.size();
    const std::size_t ng = grid.g.size();
    if (nb == 0 || ng == 0)
        throw InputError("kernel grids must not be empty");
    for (double x : grid.reduced_b)
        if (!(x >= 0.0 && x <= 1.0))
            throw InputError("reduced impact parameters must lie in [0, 1]");

    std::vector<double> b_max(ng);
    std::vector<double> table(nb * ng);
    bool failed = false;
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < ng; ++j) {
        try {
            b_max[j] = b_max_for(pot, grid.g[j], chi_min, mass);
            for (std::size_t i = 0; i < nb; ++i)
                table[j * nb + i] = deflection_angle(grid.reduced_b[i] * b_max[j], grid.g[j], pot, mass);
        } catch (const Error& e) {
#pragma omp critical
            {
                failed = true;
                failure = e.what();
            }
        }
    }
    if (failed)
        throw NumericalError("kernel table construction failed: " + failure);

    ScatteringKernel kernel(grid.reduced_b, grid.g, std::move(b_max), std::move(table), chi_min);

    double worst = 0.0;
    if (validation_samples > 0 && nb > 1 && ng > 1) {
        std::mt19937_64 rng(0x6b65726e656cULL);
        std::uniform_int_distribution<std::size_t> pick_b(0, nb - 2), pick_g(0, ng - 2);
        // the random sample, plus every cell of the first and last b column
        // (the b = 0 and b = b_max ends, where the table is coarsest)
        const std::size_t total = validation_samples + 2 * (ng - 1);
        for (std::size_t s = 0; s < total; ++s) {
            std::size_t i, j;
            if (s < validation_samples) {
                i = pick_b(rng);
                j = pick_g(rng);
            } else {
                const std::size_t e = s - validation_samples;
                i = e < ng - 1 ? 0 : nb - 2;
                j = e % (ng - 1);
            }
            const double g = std::sqrt(grid.g[j] * grid.g[j + 1]);
            const double x = 0.5 * (grid.reduced_b[i] + grid.reduced_b[i + 1]);
            const double b = x * kernel.b_max(g);
            worst = std::max(worst, std::fabs(kernel.chi(b, g) - deflection_angle(b, g, pot, mass)));
        }
        if (worst > 1e-3)
            throw NumericalError(fmt::format("kernel interpolation error {:.3g} exceeds 1e-3; refine the grids", worst));
    }
    if (midpoint_error)
        *midpoint_error = worst;
    return kernel;
}

} // namespace kinetic
