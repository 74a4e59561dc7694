#include "covert/lpd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "covert/infodiv.hpp"
#include "covert/solvers.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace covert {

namespace {

constexpr double kHullSqTol = 1e-14;  // squared L2 threshold for hull membership

std::vector<std::vector<double>> identity_matrix(std::size_t n) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

// Ratio sum_x P(x) kl(W(.|x),Q0) / sqrt(chi2_half(PW,Q0)) for P over the
// non-off inputs; P given as weights aligned with `rows`.
double scaling_ratio(const std::vector<double>& weights,
                     const std::vector<const std::vector<double>*>& rows,
                     const std::vector<double>& kls, const std::vector<double>& q0) {
    const std::size_t k = rows.size();
    const std::size_t ny = q0.size();
    double num = 0.0;
    for (std::size_t i = 0; i < k; ++i) num += weights[i] * kls[i];
    double den2 = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
        double qy = 0.0;
        for (std::size_t i = 0; i < k; ++i) qy += weights[i] * (*rows[i])[y];
        const double d = qy - q0[y];
        den2 += d * d / q0[y];
    }
    den2 *= 0.5;
    if (den2 <= 0.0) return 0.0;
    return num / std::sqrt(den2);
}

struct RatioContext {
    std::vector<const std::vector<double>*> rows;
    std::vector<double> kls;
    const std::vector<double>* q0 = nullptr;
};

RatioContext make_ratio_context(const ReducedChannel& rch) {
    RatioContext ctx;
    for (std::size_t x : rch.non_off_inputs()) {
        ctx.rows.push_back(&rch.row(x));
        ctx.kls.push_back(kl(rch.row(x), rch.q0()));
    }
    ctx.q0 = &rch.q0();
    return ctx;
}

// Enumerates integer compositions of `total` into k parts in lexicographic
// order, invoking f on each weight vector m/total.
void visit_compositions(int total, int k, std::vector<int>& m,
                        const std::function<void(const std::vector<int>&)>& f,
                        int pos = 0, int remaining = -1) {
    if (remaining < 0) remaining = total;
    if (pos == k - 1) {
        m[pos] = remaining;
        f(m);
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        m[pos] = v;
        visit_compositions(total, k, m, f, pos + 1, remaining - v);
    }
}

// Penalized objective machinery for the finite-n program.

struct PenalizedGradient {
    std::vector<double> g;  // D(W_x || Q) - nu * sum_y W(y|x) log(Q(y)/Q0(y))
    double fw_gap = 0.0;    // max_x g_x - sum_x P(x) g_x
};

std::vector<double> marginal(const std::vector<double>& p, const ReducedChannel& rch) {
    std::vector<double> q(rch.num_outputs(), 0.0);
    for (std::size_t x = 0; x < rch.num_inputs(); ++x) {
        if (p[x] == 0.0) continue;
        for (std::size_t y = 0; y < rch.num_outputs(); ++y)
            q[y] += p[x] * rch.row(x)[y];
    }
    return q;
}

PenalizedGradient penalized_gradient(const std::vector<double>& p,
                                     const std::vector<double>& q,
                                     const ReducedChannel& rch, double nu) {
    const std::size_t nx = rch.num_inputs();
    const std::size_t ny = rch.num_outputs();
    const std::vector<double>& q0 = rch.q0();
    PenalizedGradient out;
    out.g.assign(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        double dx = 0.0, rx = 0.0;
        for (std::size_t y = 0; y < ny; ++y) {
            const double w = rch.row(x)[y];
            if (w == 0.0) continue;
            if (q[y] <= 0.0) {
                dx = std::numeric_limits<double>::infinity();
                continue;
            }
            const double lq = std::log(q[y]);
            dx += w * (std::log(w) - lq);
            rx += w * (lq - std::log(q0[y]));
        }
        out.g[x] = dx - nu * rx;
    }
    double avg = 0.0, mx = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < nx; ++x) {
        if (p[x] > 0.0) avg += p[x] * out.g[x];  // off-support gradients may be +inf
        mx = std::max(mx, out.g[x]);
    }
    out.fw_gap = mx - avg;
    return out;
}

struct PenalizedSolution {
    std::vector<double> p;
    std::vector<double> q;
    double mutual = 0.0;   // I(P, W)
    double spent = 0.0;    // kl(PW, Q0)
    double fw_gap = 0.0;
};

// Away-step conditional gradient with derivative-bisection line search on
// F_nu(P) = I(P,W) - nu kl(PW,Q0), concave over the simplex.
PenalizedSolution maximize_penalized(const ReducedChannel& rch, double nu,
                                     double gap_tol, int max_iter) {
    const std::size_t nx = rch.num_inputs();
    std::vector<double> p(nx, 1.0 / static_cast<double>(nx));
    std::vector<double> q = marginal(p, rch);

    // directional derivative of F_nu at p + gamma*dir (dir sums to zero)
    auto dir_derivative = [&](const std::vector<double>& base,
                              const std::vector<double>& dir, double gamma) {
        std::vector<double> pt(nx);
        for (std::size_t x = 0; x < nx; ++x) pt[x] = std::max(base[x] + gamma * dir[x], 0.0);
        const std::vector<double> qt = marginal(pt, rch);
        const PenalizedGradient pg = penalized_gradient(pt, qt, rch, nu);
        double s = 0.0;
        for (std::size_t x = 0; x < nx; ++x)
            if (dir[x] != 0.0) s += dir[x] * pg.g[x];
        return s;
    };

    double last_gap = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        const PenalizedGradient pg = penalized_gradient(p, q, rch, nu);
        last_gap = pg.fw_gap;
        if (pg.fw_gap <= gap_tol) break;

        std::size_t fw = 0, aw = nx;
        for (std::size_t x = 1; x < nx; ++x)
            if (pg.g[x] > pg.g[fw]) fw = x;
        for (std::size_t x = 0; x < nx; ++x)
            if (p[x] > 1e-15 && (aw == nx || pg.g[x] < pg.g[aw])) aw = x;

        double avg = 0.0;
        for (std::size_t x = 0; x < nx; ++x)
            if (p[x] > 0.0) avg += p[x] * pg.g[x];
        const double rate_fw = pg.g[fw] - avg;
        const double rate_aw = aw < nx ? avg - pg.g[aw] : -1.0;

        std::vector<double> dir(nx, 0.0);
        double gamma_max;
        if (aw < nx && rate_aw > rate_fw && p[aw] < 1.0 - 1e-15) {
            for (std::size_t x = 0; x < nx; ++x) dir[x] = p[x];
            dir[aw] -= 1.0;  // p - e_aw
            gamma_max = p[aw] / (1.0 - p[aw]);
        } else {
            for (std::size_t x = 0; x < nx; ++x) dir[x] = -p[x];
            dir[fw] += 1.0;  // e_fw - p
            gamma_max = 1.0;
        }

        double gamma;
        if (dir_derivative(p, dir, gamma_max) >= 0.0) {
            gamma = gamma_max;
        } else {
            double lo = 0.0, hi = gamma_max;
            for (int b = 0; b < 90; ++b) {
                const double mid = 0.5 * (lo + hi);
                (dir_derivative(p, dir, mid) > 0.0 ? lo : hi) = mid;
            }
            gamma = 0.5 * (lo + hi);
        }
        if (gamma <= 0.0) break;

        double sum = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            p[x] = std::max(p[x] + gamma * dir[x], 0.0);
            if (p[x] < 1e-16) p[x] = 0.0;
            sum += p[x];
        }
        for (std::size_t x = 0; x < nx; ++x) p[x] /= sum;
        q = marginal(p, rch);
    }

    PenalizedSolution out;
    out.p = std::move(p);
    out.q = std::move(q);
    out.mutual = mutual_information(out.p, rch.ch);
    out.spent = kl(out.q, rch.q0());
    out.fw_gap = last_gap;
    return out;
}

}  // namespace

CaseLabel classify(const ReducedChannel& rch) {
    const std::vector<std::size_t> active = rch.non_off_inputs();
    std::vector<std::vector<double>> verts;
    for (std::size_t x : active) verts.push_back(rch.row(x));

    const solvers::QpHullResult qp = solvers::qp_over_hull(
        identity_matrix(rch.num_outputs()), rch.q0(), verts, 1e-15);
    if (qp.gap > 1e-12)
        throw convergence_error("hull projection failed to certify its duality gap");

    CaseLabel out;
    out.residual = std::sqrt(std::max(qp.objective, 0.0));
    if (qp.objective <= kHullSqTol) {
        out.kind = OffCase::RedundantOff;
        std::vector<double> w(rch.num_inputs(), 0.0);
        for (std::size_t i = 0; i < active.size(); ++i) w[active[i]] = qp.weights[i];
        out.mixture_witness = std::move(w);
    } else {
        out.kind = OffCase::NonRedundantOff;
    }
    return out;
}

double grid_search_L(const ReducedChannel& rch, double coarse_step, double fine_step,
                     bool parallel) {
    const RatioContext ctx = make_ratio_context(rch);
    const int k = static_cast<int>(ctx.rows.size());
    if (k == 1) return scaling_ratio({1.0}, ctx.rows, ctx.kls, *ctx.q0);

    const int steps = std::max(1, static_cast<int>(std::llround(1.0 / coarse_step)));

    // coarse sweep, chunked by the first coordinate; lexicographically first
    // maximizer wins regardless of thread count
    std::vector<double> chunk_best(steps + 1, -1.0);
    std::vector<std::vector<double>> chunk_arg(steps + 1);
    const double inv = 1.0 / static_cast<double>(steps);

    auto scan_chunk = [&](int v0) {
        double best = -1.0;
        std::vector<double> arg;
        std::vector<int> m(k);
        std::vector<double> w(k);
        m[0] = v0;
        visit_compositions(steps, k, m,
                           [&](const std::vector<int>& comp) {
                               for (int i = 0; i < k; ++i) w[i] = comp[i] * inv;
                               const double val =
                                   scaling_ratio(w, ctx.rows, ctx.kls, *ctx.q0);
                               if (val > best) {
                                   best = val;
                                   arg = w;
                               }
                           },
                           1, steps - v0);
        chunk_best[v0] = best;
        chunk_arg[v0] = std::move(arg);
    };

#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int v0 = 0; v0 <= steps; ++v0) scan_chunk(v0);
    } else
#endif
    {
        (void)parallel;
        for (int v0 = 0; v0 <= steps; ++v0) scan_chunk(v0);
    }

    double best = -1.0;
    std::vector<double> w;
    for (int v0 = 0; v0 <= steps; ++v0)
        if (chunk_best[v0] > best) {
            best = chunk_best[v0];
            w = chunk_arg[v0];
        }

    // pairwise-exchange refinement: the directions e_i - e_j positively span
    // the simplex tangent space, so shrinking the step to fine_step localizes
    // the maximum to O(fine_step^2) in value
    double step = coarse_step;
    long long evals = 0;
    while (step > 0.5 * fine_step && evals < 4000000) {
        bool improved = false;
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                if (i == j || w[j] < step - 1e-12) continue;
                std::vector<double> cand = w;
                cand[i] += step;
                cand[j] = std::max(cand[j] - step, 0.0);
                const double val = scaling_ratio(cand, ctx.rows, ctx.kls, *ctx.q0);
                ++evals;
                if (val > best) {
                    best = val;
                    w = std::move(cand);
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

LResult solve_L(const ReducedChannel& rch) {
    const CaseLabel label = classify(rch);
    if (label.kind == OffCase::RedundantOff)
        throw reduction_error(
            "scaling constant undefined: the off output is a mixture of the "
            "other inputs (linear covert regime)");

    const std::vector<std::size_t> active = rch.non_off_inputs();
    const std::size_t k = active.size();
    const std::size_t ny = rch.num_outputs();
    const std::vector<double>& q0 = rch.q0();

    std::vector<double> kls(k);
    for (std::size_t i = 0; i < k; ++i) kls[i] = kl(rch.row(active[i]), q0);

    LResult res;
    if (k == 1) {
        const double c2 = chi2_half(rch.row(active[0]), q0);
        res.L = kls[0] / std::sqrt(c2);
        res.maximizer.assign(rch.num_inputs(), 0.0);
        res.maximizer[active[0]] = 1.0;
        res.induced_output = rch.row(active[0]);
        res.solver_gap = 0.0;
    } else {
        // minimize |U a|^2 over conv{e_i / kl_i}; the ratio is 0-homogeneous
        // in the divergence-scaled cone, so the minimum gives L = sqrt(2/min)
        std::vector<std::vector<double>> U(ny, std::vector<double>(k));
        for (std::size_t y = 0; y < ny; ++y) {
            const double s = std::sqrt(q0[y]);
            for (std::size_t i = 0; i < k; ++i)
                U[y][i] = (rch.row(active[i])[y] - q0[y]) / s;
        }
        std::vector<std::vector<double>> verts(k, std::vector<double>(k, 0.0));
        for (std::size_t i = 0; i < k; ++i) verts[i][i] = 1.0 / kls[i];

        const solvers::QpHullResult qp =
            solvers::qp_over_hull(U, std::vector<double>(ny, 0.0), verts, 1e-15, 500000);
        const double obj = qp.objective;
        if (!(obj > 0.0))
            throw convergence_error("scaling-constant program degenerated to zero");

        res.L = std::sqrt(2.0 / obj);
        const double relaxed = obj - std::max(qp.gap, 0.0);
        res.solver_gap = relaxed > 0.0 ? std::sqrt(2.0 / relaxed) - res.L
                                       : std::numeric_limits<double>::infinity();

        double mass = 0.0;
        for (double a : qp.point) mass += a;
        res.maximizer.assign(rch.num_inputs(), 0.0);
        for (std::size_t i = 0; i < k; ++i) res.maximizer[active[i]] = qp.point[i] / mass;
        res.induced_output.assign(ny, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t y = 0; y < ny; ++y)
                res.induced_output[y] += res.maximizer[active[i]] * rch.row(active[i])[y];
    }

    if (k <= 3) {
        const double lg = grid_search_L(rch, 1e-2, 1e-5, true);
        if (std::abs(lg - res.L) > 1e-4 * std::max(res.L, 1.0))
            throw convergence_error("scaling-constant solver disagrees with grid oracle");
        res.oracle_checked = true;
    }
    return res;
}

double variance_bound(const ReducedChannel& rch, const CapacityResult& cap) {
    return std::sqrt(2.0 * llr_variance(rch.q0(), cap.output_dist));
}

TangentCertificate tangent_certificate(const ReducedChannel& rch,
                                       const CapacityResult& cap) {
    const std::vector<std::size_t> active = rch.non_off_inputs();
    const std::size_t k = active.size();
    const std::size_t ny = rch.num_outputs();
    const std::vector<double>& q0 = rch.q0();
    const std::vector<double>& qs = cap.output_dist;

    const double shift = kl(q0, qs);  // centers the target: sum_y s(y) = 0
    std::vector<double> s(ny);
    for (std::size_t y = 0; y < ny; ++y)
        s[y] = q0[y] * (std::log(qs[y] / q0[y]) + shift);

    std::vector<double> colnorm(k, 0.0);
    std::vector<std::vector<double>> A(ny, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        double nrm = 0.0;
        for (std::size_t y = 0; y < ny; ++y) {
            const double v = rch.row(active[i])[y] - q0[y];
            A[y][i] = v;
            nrm += v * v;
        }
        colnorm[i] = std::sqrt(nrm);
        if (colnorm[i] > 0.0)
            for (std::size_t y = 0; y < ny; ++y) A[y][i] /= colnorm[i];
    }

    const solvers::NnlsResult fit = solvers::nnls(A, s);

    TangentCertificate out;
    out.s = std::move(s);
    out.residual_linf = fit.residual_linf;
    out.tight = fit.residual_linf <= 1e-7;
    out.alpha.assign(rch.num_inputs(), 0.0);
    for (std::size_t i = 0; i < k; ++i)
        out.alpha[active[i]] = colnorm[i] > 0.0 ? fit.x[i] / colnorm[i] : 0.0;
    return out;
}

std::vector<double> geodesic_point(const std::vector<double>& q0,
                                   const std::vector<double>& qstar, double lambda) {
    if (q0.size() != qstar.size())
        throw std::invalid_argument("geodesic endpoints must share an alphabet");
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("geodesic parameter must lie in [0,1]");
    const std::size_t n = q0.size();
    std::vector<double> lg(n);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (q0[i] <= 0.0 || qstar[i] <= 0.0)
            throw std::invalid_argument("geodesic endpoints must be strictly positive");
        lg[i] = (1.0 - lambda) * std::log(q0[i]) + lambda * std::log(qstar[i]);
        mx = std::max(mx, lg[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lg[i] = std::exp(lg[i] - mx);
        z += lg[i];
    }
    for (std::size_t i = 0; i < n; ++i) lg[i] /= z;
    return lg;
}

double output_hull_distance(const ReducedChannel& rch, const std::vector<double>& q) {
    std::vector<std::vector<double>> verts;
    for (std::size_t x = 0; x < rch.num_inputs(); ++x) verts.push_back(rch.row(x));
    const solvers::QpHullResult qp =
        solvers::qp_over_hull(identity_matrix(rch.num_outputs()), q, verts, 1e-15);
    return std::sqrt(std::max(qp.objective, 0.0));
}

FiniteNResult finite_n_constrained_capacity(const ReducedChannel& rch, double eps) {
    if (eps < 0.0) throw std::invalid_argument("divergence budget must be nonnegative");
    const std::size_t nx = rch.num_inputs();

    FiniteNResult out;
    if (eps == 0.0) {
        if (classify(rch).kind == OffCase::RedundantOff) {
            const CapacityResult cc = constrained_capacity_redundant(rch);
            out.value_nats = cc.capacity_nats;
            out.input_dist = cc.input_dist;
            return out;
        }
        out.input_dist.assign(nx, 0.0);
        out.input_dist[rch.off()] = 1.0;
        return out;
    }

    const CapacityResult cap = blahut_arimoto(rch.ch, 1e-11);
    if (kl(cap.output_dist, rch.q0()) <= eps) {
        out.value_nats = cap.capacity_nats;
        out.input_dist = cap.input_dist;
        out.gap = cap.residual;
        return out;
    }

    const std::vector<double>& q0 = rch.q0();
    auto spent_of = [&](const std::vector<double>& p) {
        return kl(marginal(p, rch), q0);
    };
    // exact-budget pull-back along the mixture line toward the off point mass
    auto pull_back = [&](const std::vector<double>& p) {
        if (spent_of(p) <= eps) return p;
        double lo = 0.0, hi = 1.0;  // fraction retained of p; lo side feasible
        std::vector<double> cand(nx);
        for (int b = 0; b < 100; ++b) {
            const double t = 0.5 * (lo + hi);
            for (std::size_t x = 0; x < nx; ++x) cand[x] = t * p[x];
            cand[rch.off()] += 1.0 - t;
            (spent_of(cand) <= eps ? lo : hi) = t;
        }
        for (std::size_t x = 0; x < nx; ++x) cand[x] = lo * p[x];
        cand[rch.off()] += 1.0 - lo;
        return cand;
    };

    constexpr double kGapTarget = 1e-10;
    constexpr double kInnerTol = 1e-13;

    double best_value = 0.0;
    std::vector<double> best_p(nx, 0.0);
    best_p[rch.off()] = 1.0;
    double ub_min = cap.capacity_nats + cap.residual;

    auto consider = [&](const PenalizedSolution& sol, double nu) {
        // weak duality: C_eps <= max_P F_nu + nu*eps <= F_nu(p) + fw_gap + nu*eps
        const double ub = sol.mutual - nu * sol.spent + sol.fw_gap + nu * eps;
        ub_min = std::min(ub_min, ub);
        const std::vector<double> pc = pull_back(sol.p);
        const double val = mutual_information(pc, rch.ch);
        if (val > best_value) {
            best_value = val;
            best_p = pc;
        }
    };

    double lo = 0.0, hi = 1.0;
    for (int d = 0; d < 90; ++d) {
        const PenalizedSolution sol = maximize_penalized(rch, hi, kInnerTol, 100000);
        consider(sol, hi);
        if (sol.spent <= eps) break;
        lo = hi;
        hi *= 2.0;
        if (d == 89)
            throw convergence_error("penalty search for the divergence budget diverged");
    }

    for (int it = 0; it < 200 && ub_min - best_value > kGapTarget; ++it) {
        const double nu = 0.5 * (lo + hi);
        const PenalizedSolution sol = maximize_penalized(rch, nu, kInnerTol, 100000);
        consider(sol, nu);
        (sol.spent <= eps ? hi : lo) = nu;
    }

    out.gap = ub_min - best_value;
    if (out.gap > kGapTarget)
        throw convergence_error("budgeted capacity failed to certify its duality gap");
    out.value_nats = best_value;
    out.input_dist = std::move(best_p);
    return out;
}

CovertInputSpec build_covert_input(const ReducedChannel& rch, const LResult& lres,
                                   long long n, double delta) {
    if (n < 1) throw std::invalid_argument("blocklength must be positive");
    if (delta < 0.0) throw std::invalid_argument("divergence budget must be nonnegative");
    const std::size_t nx = rch.num_inputs();

    auto mix = [&](double mu) {
        std::vector<double> p(nx);
        for (std::size_t x = 0; x < nx; ++x) p[x] = mu * lres.maximizer[x];
        p[rch.off()] += 1.0 - mu;
        return p;
    };
    auto budget = [&](double mu) {
        return static_cast<double>(n) * kl(marginal(mix(mu), rch), rch.q0());
    };

    CovertInputSpec spec;
    spec.n = n;
    spec.delta = delta;

    double mu = 0.0;
    if (delta > 0.0) {
        if (budget(1.0) <= delta) {
            mu = 1.0;
            spec.underspent = true;
        } else {
            // kl along the mixture line is convex with value 0 at mu = 0,
            // hence increasing; keep the feasible (lower) side
            double lo = 0.0, hi = 1.0;
            for (int b = 0; b < 200; ++b) {
                const double mid = 0.5 * (lo + hi);
                (budget(mid) <= delta ? lo : hi) = mid;
                if (delta - budget(lo) <= 1e-12 * delta) break;
            }
            mu = lo;
        }
    }

    spec.mu = mu;
    spec.p_n = mix(mu);
    spec.q_n = marginal(spec.p_n, rch);
    spec.exact_per_letter_kl = kl(spec.q_n, rch.q0());
    return spec;
}

}  // namespace covert
