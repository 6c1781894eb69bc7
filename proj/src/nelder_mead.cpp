#include "spuf/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spuf::opt {

OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                        std::vector<double> start, const NelderMeadOptions& opts) {
    const std::size_t dim = start.size();
    OptimResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evals;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(dim + 1, start);
    for (std::size_t i = 0; i < dim; ++i) {
        const double step = start[i] != 0.0 ? opts.initial_step * std::max(1.0, std::abs(start[i]))
                                            : opts.initial_step;
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);

    auto diameter = [&](std::size_t best) {
        double d = 0.0;
        for (std::size_t i = 0; i <= dim; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double diff = simplex[i][k] - simplex[best][k];
                s += diff * diff;
            }
            d = std::max(d, std::sqrt(s));
        }
        return d;
    };
    auto along = [&](double coef, std::vector<double>& out, std::size_t worst) {
        for (std::size_t k = 0; k < dim; ++k) {
            out[k] = centroid[k] + coef * (simplex[worst][k] - centroid[k]);
        }
    };

    while (true) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[dim - 1];

        if (diameter(best) < opts.simplex_tol) {
            res.converged = true;
            break;
        }
        if (res.evals >= opts.max_evals) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k];
        }
        for (auto& c : centroid) c /= static_cast<double>(dim);

        along(-1.0, trial, worst);
        const double f_reflect = eval(trial);
        if (f_reflect < values[best]) {
            along(-2.0, trial2, worst);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < values[second]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }
        // contraction: outside if the reflection improved on the worst, inside otherwise
        const bool outside = f_reflect < values[worst];
        along(outside ? -0.5 : 0.5, trial2, worst);
        const double f_contract = eval(trial2);
        if (f_contract < (outside ? f_reflect : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = f_contract;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < dim; ++k) {
                simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
            }
            values[i] = eval(simplex[i]);
        }
    }

    const auto it = std::min_element(values.begin(), values.end());
    res.x = simplex[static_cast<std::size_t>(it - values.begin())];
    res.value = *it;
    return res;
}

}  // namespace spuf::opt
