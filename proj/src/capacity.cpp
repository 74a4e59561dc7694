#include "covert/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covert/infodiv.hpp"
#include "covert/solvers.hpp"

namespace covert {

namespace {

// kl(W(.|x), q) for every x at once; reuses the log of q.
std::vector<double> row_divergences(const Channel& ch, const std::vector<double>& q) {
    const std::size_t nx = ch.num_inputs();
    const std::size_t ny = ch.num_outputs();
    std::vector<double> logq(ny);
    for (std::size_t y = 0; y < ny; ++y)
        logq[y] = q[y] > 0.0 ? std::log(q[y]) : -std::numeric_limits<double>::infinity();
    std::vector<double> d(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        double acc = 0.0;
        for (std::size_t y = 0; y < ny; ++y) {
            const double w = ch.matrix[x][y];
            if (w > 0.0) acc += w * (std::log(w) - logq[y]);
        }
        d[x] = acc;
    }
    return d;
}

}  // namespace

CapacityResult blahut_arimoto(const Channel& ch, double tol, int max_iter) {
    ch.validate();
    const std::size_t nx = ch.num_inputs();
    const std::size_t ny = ch.num_outputs();

    std::vector<double> p(nx, 1.0 / static_cast<double>(nx));
    std::vector<double> q(ny, 0.0);

    CapacityResult res;
    for (int it = 1; it <= max_iter; ++it) {
        std::fill(q.begin(), q.end(), 0.0);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y) q[y] += p[x] * ch.matrix[x][y];

        const std::vector<double> d = row_divergences(ch, q);
        double lower = 0.0;
        double upper = -std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < nx; ++x) {
            lower += p[x] * d[x];
            upper = std::max(upper, d[x]);
        }

        // C <= max_x kl(W(.|x), Q) for any Q, and lower is achieved by p.
        if (upper - lower <= tol) {
            res.capacity_nats = lower;
            res.input_dist = p;
            res.output_dist = q;
            res.iterations = it;
            res.residual = upper - lower;
            res.kkt_slacks.resize(nx);
            for (std::size_t x = 0; x < nx; ++x) res.kkt_slacks[x] = lower - d[x];
            return res;
        }

        double z = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            p[x] *= std::exp(d[x] - upper);
            z += p[x];
        }
        for (std::size_t x = 0; x < nx; ++x) p[x] /= z;
    }
    throw convergence_error("capacity iteration did not certify the requested tolerance");
}

FullSupportCondition check_condition_all_inputs(const Channel& ch,
                                                const CapacityResult& cap) {
    const std::size_t nx = ch.num_inputs();
    const std::size_t ny = ch.num_outputs();
    FullSupportCondition out;

    // An input with a strictly positive KKT slack is excluded from every
    // capacity-achieving distribution, so no full-support optimizer exists.
    for (std::size_t x = 0; x < nx; ++x)
        if (cap.kkt_slacks[x] > 1e-6) return out;

    // maximize t  s.t.  P W = Q*, sum P = 1, P(x) - t - s_x = 0, all vars >= 0.
    const std::size_t nvars = 2 * nx + 1;  // P (nx), t, slacks (nx)
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t y = 0; y < ny; ++y) {
        const double qy = cap.output_dist[y];
        const double scale = qy > 1e-300 ? 1.0 / qy : 1.0;
        std::vector<double> row(nvars, 0.0);
        for (std::size_t x = 0; x < nx; ++x) row[x] = ch.matrix[x][y] * scale;
        A.push_back(std::move(row));
        b.push_back(qy * scale);
    }
    {
        std::vector<double> row(nvars, 0.0);
        for (std::size_t x = 0; x < nx; ++x) row[x] = 1.0;
        A.push_back(std::move(row));
        b.push_back(1.0);
    }
    for (std::size_t x = 0; x < nx; ++x) {
        std::vector<double> row(nvars, 0.0);
        row[x] = 1.0;
        row[nx] = -1.0;
        row[nx + 1 + x] = -1.0;
        A.push_back(std::move(row));
        b.push_back(0.0);
    }
    std::vector<double> c(nvars, 0.0);
    c[nx] = 1.0;

    const solvers::LpResult lp = solvers::simplex_lp(A, b, c);
    if (!lp.feasible) return out;  // cap.input_dist is feasible; only numerics land here
    out.min_mass = lp.value;
    out.holds = lp.value > 1e-9;
    if (out.holds) out.witness.assign(lp.x.begin(), lp.x.begin() + nx);
    return out;
}

CapacityResult constrained_capacity_redundant(const ReducedChannel& rch, double tol) {
    (void)tol;  // the LP is exact up to simplex arithmetic
    const std::vector<std::size_t> active = rch.non_off_inputs();
    const std::size_t k = active.size();
    const std::size_t ny = rch.num_outputs();
    const std::vector<double>& q0 = rch.q0();

    std::vector<double> d(k);
    for (std::size_t i = 0; i < k; ++i) d[i] = kl(rch.row(active[i]), q0);

    // Output rows scaled by 1/Q0(y) for conditioning; sum row kept although
    // it is implied by the stochastic rows.
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> row(k);
        for (std::size_t i = 0; i < k; ++i) row[i] = rch.row(active[i])[y] / q0[y];
        A.push_back(std::move(row));
        b.push_back(1.0);
    }
    A.push_back(std::vector<double>(k, 1.0));
    b.push_back(1.0);

    const solvers::LpResult lp = solvers::simplex_lp(A, b, d);
    if (!lp.feasible)
        throw reduction_error(
            "off output is not a mixture of the other inputs: "
            "the pinned-output capacity has an empty feasible set");

    CapacityResult res;
    res.capacity_nats = lp.value;
    res.input_dist.assign(rch.num_inputs(), 0.0);
    for (std::size_t i = 0; i < k; ++i) res.input_dist[active[i]] = lp.x[i];
    res.output_dist = output_marginal(res.input_dist, rch.ch);
    res.kkt_slacks.assign(rch.num_inputs(), lp.value);
    for (std::size_t i = 0; i < k; ++i) res.kkt_slacks[active[i]] = lp.value - d[i];
    res.iterations = 1;
    res.residual = 0.0;
    return res;
}

}  // namespace covert
