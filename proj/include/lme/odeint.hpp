#pragma once
// Fixed-step classical RK4 with dense grid output and blow-up detection.
// Backward integration is expressed by a grid with t1 < t0 (negative step).
// Fixed steps keep solver output and golden files bit-stable across runs.

#include <cmath>
#include <cstddef>
#include <vector>

namespace lme {

struct TimeGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    int n_steps = 1;

    double dt() const { return (t1 - t0) / n_steps; }
    double time(int i) const {
        return (i == n_steps) ? t1 : t0 + i * dt();
    }
};

// Default grid density: 4000 RK4 steps per unit of time.
inline constexpr int kStepsPerUnitTime = 4000;

inline TimeGrid make_grid(double t0, double t1,
                          int steps_per_unit = kStepsPerUnitTime) {
    int n = static_cast<int>(std::ceil(std::abs(t1 - t0) * steps_per_unit));
    return TimeGrid{t0, t1, n < 1 ? 1 : n};
}

inline constexpr double kBlowUpBound = 1e8;

enum class PathStatus { completed, blew_up };

struct Path {
    TimeGrid grid;
    // values[i] is the state at grid.time(i); present up to the blow-up index.
    std::vector<std::vector<double>> values;
    PathStatus status = PathStatus::completed;
    double blowup_time = 0.0;
    int blowup_component = -1;

    bool completed() const { return status == PathStatus::completed; }
    const std::vector<double>& back() const { return values.back(); }
};

namespace detail {
inline int first_bad_component(const std::vector<double>& x, double bound) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || std::abs(x[i]) > bound)
            return static_cast<int>(i);
    return -1;
}
}  // namespace detail

// field(t, x, dx): writes dx/dt into dx (same size as x). A non-finite
// derivative or a component exceeding `bound` terminates the path with
// blew_up status at that grid time; no exception is thrown so that callers
// (shooting, gap evaluations) can treat blow-up as an ordinary outcome.
template <class Field>
Path integrate(Field&& field, const std::vector<double>& init,
               const TimeGrid& grid, double bound = kBlowUpBound) {
    const std::size_t dim = init.size();
    const double h = grid.dt();

    Path out;
    out.grid = grid;
    out.values.reserve(grid.n_steps + 1);
    out.values.push_back(init);

    std::vector<double> x = init;
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

    for (int i = 0; i < grid.n_steps; ++i) {
        const double t = grid.time(i);
        field(t, x, k1);
        if (int bad = detail::first_bad_component(k1, bound); bad >= 0) {
            out.status = PathStatus::blew_up;
            out.blowup_time = t;
            out.blowup_component = bad;
            return out;
        }
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
        field(t + 0.5 * h, tmp, k2);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
        field(t + 0.5 * h, tmp, k3);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = x[j] + h * k3[j];
        field(t + h, tmp, k4);
        for (std::size_t j = 0; j < dim; ++j)
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

        if (int bad = detail::first_bad_component(x, bound); bad >= 0) {
            out.status = PathStatus::blew_up;
            out.blowup_time = grid.time(i + 1);
            out.blowup_component = bad;
            return out;
        }
        out.values.push_back(x);
    }
    return out;
}

struct RefineReport {
    double sup_diff = 0.0;        // sup-norm over shared grid points
    bool blowup_mismatch = false; // the two refinements disagree on completion
    PathStatus status_coarse = PathStatus::completed;
    PathStatus status_fine = PathStatus::completed;
};

// Integrates at n and 2n steps and reports the sup-norm difference on the
// coarse grid; used to certify that the default step is adequate.
template <class Field>
RefineReport refine_check(Field&& field, const std::vector<double>& init,
                          const TimeGrid& grid, double bound = kBlowUpBound) {
    Path coarse = integrate(field, init, grid, bound);
    TimeGrid fine_grid{grid.t0, grid.t1, 2 * grid.n_steps};
    Path fine = integrate(field, init, fine_grid, bound);

    RefineReport rep;
    rep.status_coarse = coarse.status;
    rep.status_fine = fine.status;
    rep.blowup_mismatch = (coarse.status != fine.status);
    const std::size_t shared =
        std::min(coarse.values.size(), (fine.values.size() + 1) / 2);
    for (std::size_t i = 0; i < shared; ++i)
        for (std::size_t j = 0; j < coarse.values[i].size(); ++j)
            rep.sup_diff = std::max(
                rep.sup_diff, std::abs(coarse.values[i][j] - fine.values[2 * i][j]));
    return rep;
}

}  // namespace lme
