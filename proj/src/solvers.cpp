#include "covert/solvers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace covert::solvers {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

// Full-tableau simplex with Bland's rule (no cycling on these tiny problems).
// Maximizes over the current tableau; basis holds the basic column of each row.
bool simplex_iterate(std::vector<std::vector<double>>& T, std::vector<int>& basis,
                     int ncols) {
    const int m = static_cast<int>(basis.size());
    for (;;) {
        int enter = -1;
        for (int j = 0; j < ncols; ++j) {
            if (T[m][j] > kPivotTol) { enter = j; break; }  // Bland: first improving
        }
        if (enter < 0) return true;
        int leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            if (T[i][enter] > kPivotTol) {
                const double ratio = T[i][ncols] / T[i][enter];
                if (ratio < best - 1e-15 ||
                    (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
                     basis[i] < basis[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return false;  // unbounded
        const double piv = T[leave][enter];
        for (int j = 0; j <= ncols; ++j) T[leave][j] /= piv;
        for (int i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = T[i][enter];
            if (f == 0.0) continue;
            for (int j = 0; j <= ncols; ++j) T[i][j] -= f * T[leave][j];
        }
        basis[leave] = enter;
    }
}

void set_objective_row(std::vector<std::vector<double>>& T, const std::vector<int>& basis,
                       const std::vector<double>& cost, int ncols) {
    const int m = static_cast<int>(basis.size());
    for (int j = 0; j <= ncols; ++j) T[m][j] = j < ncols ? cost[j] : 0.0;
    for (int i = 0; i < m; ++i) {
        const double cb = cost[basis[i]];
        if (cb == 0.0) continue;
        for (int j = 0; j <= ncols; ++j) T[m][j] -= cb * T[i][j];
    }
    // invariant: the objective-row rhs cell holds -(objective value)
}

}  // namespace

LpResult simplex_lp(const std::vector<std::vector<double>>& A,
                    const std::vector<double>& b, const std::vector<double>& c) {
    const int m = static_cast<int>(A.size());
    const int n = static_cast<int>(c.size());
    LpResult res;
    if (m == 0) throw std::invalid_argument("simplex_lp: empty constraint set");

    const int ntot = n + m;  // artificials appended
    std::vector<std::vector<double>> T(m + 1, std::vector<double>(ntot + 1, 0.0));
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        const double sign = b[i] < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) T[i][j] = sign * A[i][j];
        T[i][ntot] = sign * b[i];
        T[i][n + i] = 1.0;
        basis[i] = n + i;
    }

    std::vector<double> phase1(ntot, 0.0);
    for (int i = 0; i < m; ++i) phase1[n + i] = -1.0;
    set_objective_row(T, basis, phase1, ntot);
    if (!simplex_iterate(T, basis, ntot))
        throw std::runtime_error("simplex_lp: phase 1 unbounded");
    const double infeas = T[m][ntot];  // = sum of artificials at the optimum
    if (infeas > kFeasTol) return res;  // infeasible

    // pivot artificials out; redundant rows keep a zero artificial basic
    for (int i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        int enter = -1;
        for (int j = 0; j < n; ++j)
            if (std::abs(T[i][j]) > kPivotTol) { enter = j; break; }
        if (enter < 0) {
            // numerically redundant row; blank it so the huge phase-2 cost on
            // its artificial cannot leak rounding noise into the reduced costs
            for (int j = 0; j <= ntot; ++j) T[i][j] = 0.0;
            continue;
        }
        const double piv = T[i][enter];
        for (int j = 0; j <= ntot; ++j) T[i][j] /= piv;
        for (int r = 0; r <= m; ++r) {
            if (r == i) continue;
            const double f = T[r][enter];
            if (f == 0.0) continue;
            for (int j = 0; j <= ntot; ++j) T[r][j] -= f * T[i][j];
        }
        basis[i] = enter;
    }

    std::vector<double> phase2(ntot, 0.0);
    for (int j = 0; j < n; ++j) phase2[j] = c[j];
    for (int i = 0; i < m; ++i) phase2[n + i] = -1e9;  // keep leftover artificials at zero
    set_objective_row(T, basis, phase2, ntot);
    if (!simplex_iterate(T, basis, ntot))
        throw std::runtime_error("simplex_lp: objective unbounded on feasible set");

    res.feasible = true;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) res.x[basis[i]] = T[i][ntot];
    res.value = 0.0;
    for (int j = 0; j < n; ++j) res.value += c[j] * res.x[j];
    return res;
}

std::vector<double> equality_ls(const std::vector<std::vector<double>>& A,
                                const std::vector<double>& b) {
    const int m = static_cast<int>(A.size());
    const int n = m > 0 ? static_cast<int>(A[0].size()) : 0;
    if (n == 0) return {};
    Eigen::MatrixXd M(m, n);
    Eigen::VectorXd q(m);
    for (int i = 0; i < m; ++i) {
        q(i) = b[i];
        for (int j = 0; j < n; ++j) M(i, j) = A[i][j];
    }
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 1, n + 1);
    K.topLeftCorner(n, n) = 2.0 * M.transpose() * M;
    K.topRightCorner(n, 1).setOnes();
    K.bottomLeftCorner(1, n).setOnes();
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = 2.0 * M.transpose() * q;
    rhs(n) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) return {};
    Eigen::VectorXd sol = lu.solve(rhs);
    return std::vector<double>(sol.data(), sol.data() + n);
}

QpHullResult qp_over_hull(const std::vector<std::vector<double>>& M,
                          const std::vector<double>& q,
                          const std::vector<std::vector<double>>& V, double gap_tol,
                          int max_iter) {
    const int d = static_cast<int>(M.size());
    const int k = static_cast<int>(V.size());
    if (k == 0) throw std::invalid_argument("qp_over_hull: no vertices");
    const int nv = static_cast<int>(V[0].size());

    // image-space vertices u_i = M V_i; the objective only sees z = sum w_i u_i
    Eigen::MatrixXd U(d, k);
    for (int i = 0; i < k; ++i)
        for (int r = 0; r < d; ++r) {
            double s = 0.0;
            for (int j = 0; j < nv; ++j) s += M[r][j] * V[i][j];
            U(r, i) = s;
        }
    Eigen::VectorXd target(d);
    for (int r = 0; r < d; ++r) target(r) = q[r];

    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    w(0) = 1.0;
    Eigen::VectorXd z = U.col(0);

    auto objective = [&](const Eigen::VectorXd& zz) { return (zz - target).squaredNorm(); };

    QpHullResult res;
    double gap = std::numeric_limits<double>::infinity();
    int it = 0;

    auto polish = [&]() {
        // exact minimizer on the current face; retreat from negative weights
        std::vector<int> S;
        for (int i = 0; i < k; ++i)
            if (w(i) > 1e-12) S.push_back(i);
        while (!S.empty()) {
            const int s = static_cast<int>(S.size());
            Eigen::MatrixXd Us(d, s);
            for (int i = 0; i < s; ++i) Us.col(i) = U.col(S[i]);
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(s + 1, s + 1);
            K.topLeftCorner(s, s) = 2.0 * Us.transpose() * Us;
            K.topRightCorner(s, 1).setOnes();
            K.bottomLeftCorner(1, s).setOnes();
            Eigen::VectorXd rhs(s + 1);
            rhs.head(s) = 2.0 * Us.transpose() * target;
            rhs(s) = 1.0;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
            if (!lu.isInvertible()) return;
            Eigen::VectorXd lam = lu.solve(rhs).head(s);
            int worst = -1;
            for (int i = 0; i < s; ++i)
                if (lam(i) < -1e-12 && (worst < 0 || lam(i) < lam(worst))) worst = i;
            if (worst < 0) {
                Eigen::VectorXd wn = Eigen::VectorXd::Zero(k);
                double sum = 0.0;
                for (int i = 0; i < s; ++i) {
                    const double v = std::max(lam(i), 0.0);
                    wn(S[i]) = v;
                    sum += v;
                }
                if (sum <= 0.0) return;
                wn /= sum;
                Eigen::VectorXd zn = U * wn;
                if (objective(zn) <= objective(z) + 1e-18) {
                    w = wn;
                    z = zn;
                }
                return;
            }
            S.erase(S.begin() + worst);
        }
    };

    for (; it < max_iter; ++it) {
        const Eigen::VectorXd r = z - target;         // 0.5 * gradient in image space
        const Eigen::VectorXd g = 2.0 * (U.transpose() * r);
        int fw = 0, away = -1;
        for (int i = 1; i < k; ++i)
            if (g(i) < g(fw)) fw = i;
        for (int i = 0; i < k; ++i)
            if (w(i) > 1e-14 && (away < 0 || g(i) > g(away))) away = i;

        gap = g.dot(w) - g(fw);
        if (gap <= gap_tol) break;
        if ((it & 63) == 63) {
            polish();
            const Eigen::VectorXd r2 = z - target;
            const Eigen::VectorXd g2 = 2.0 * (U.transpose() * r2);
            int fw2 = 0;
            for (int i = 1; i < k; ++i)
                if (g2(i) < g2(fw2)) fw2 = i;
            gap = g2.dot(w) - g2(fw2);
            if (gap <= gap_tol) break;
            continue;
        }

        const double d_fw = g(fw) - g.dot(w);                        // < 0
        const double d_aw = away >= 0 ? g.dot(w) - g(away) : 0.0;    // <= 0
        bool use_away = away >= 0 && d_aw < d_fw && w(away) < 1.0 - 1e-14;
        Eigen::VectorXd dir;
        double gamma_max;
        if (use_away) {
            dir = z - U.col(away);
            gamma_max = w(away) / (1.0 - w(away));
        } else {
            dir = U.col(fw) - z;
            gamma_max = 1.0;
        }
        const double denom = dir.squaredNorm();
        if (denom <= 0.0) break;
        double gamma = -r.dot(dir) / denom;
        gamma = std::clamp(gamma, 0.0, gamma_max);
        if (gamma <= 0.0) {
            polish();
            break;
        }
        if (use_away) {
            w *= (1.0 + gamma);
            w(away) -= gamma;
            if (w(away) < 1e-16) w(away) = 0.0;
        } else {
            w *= (1.0 - gamma);
            w(fw) += gamma;
        }
        z = U * w;
    }
    polish();

    const Eigen::VectorXd r = z - target;
    const Eigen::VectorXd g = 2.0 * (U.transpose() * r);
    int fw = 0;
    for (int i = 1; i < k; ++i)
        if (g(i) < g(fw)) fw = i;
    res.gap = g.dot(w) - g(fw);
    res.objective = objective(z);
    res.iterations = it;
    res.weights.assign(w.data(), w.data() + k);
    res.point.assign(nv, 0.0);
    for (int i = 0; i < k; ++i)
        if (w(i) != 0.0)
            for (int j = 0; j < nv; ++j) res.point[j] += w(i) * V[i][j];
    return res;
}

NnlsResult nnls(const std::vector<std::vector<double>>& A, const std::vector<double>& b) {
    const int m = static_cast<int>(A.size());
    const int n = m > 0 ? static_cast<int>(A[0].size()) : 0;
    Eigen::MatrixXd M(m, n);
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) {
        v(i) = b[i];
        for (int j = 0; j < n; ++j) M(i, j) = A[i][j];
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);
    const double wtol = 1e-12 * std::max(1.0, (M.transpose() * v).cwiseAbs().maxCoeff());

    auto solve_passive = [&](Eigen::VectorXd& zz) {
        std::vector<int> P;
        for (int j = 0; j < n; ++j)
            if (passive[j]) P.push_back(j);
        zz = Eigen::VectorXd::Zero(n);
        if (P.empty()) return;
        Eigen::MatrixXd Mp(m, static_cast<int>(P.size()));
        for (std::size_t i = 0; i < P.size(); ++i) Mp.col(static_cast<int>(i)) = M.col(P[i]);
        Eigen::VectorXd sol = Mp.colPivHouseholderQr().solve(v);
        for (std::size_t i = 0; i < P.size(); ++i) zz(P[i]) = sol(static_cast<int>(i));
    };

    for (int outer = 0; outer < 30 * std::max(n, 1); ++outer) {
        const Eigen::VectorXd grad = M.transpose() * (v - M * x);
        int best = -1;
        for (int j = 0; j < n; ++j)
            if (!passive[j] && grad(j) > wtol && (best < 0 || grad(j) > grad(best))) best = j;
        if (best < 0) break;
        passive[best] = true;

        Eigen::VectorXd zz;
        for (;;) {
            solve_passive(zz);
            double alpha = 1.0;
            int blocker = -1;
            for (int j = 0; j < n; ++j) {
                if (!passive[j] || zz(j) > 0.0) continue;
                const double a = x(j) / (x(j) - zz(j));
                if (a < alpha) {
                    alpha = a;
                    blocker = j;
                }
            }
            if (blocker < 0) {
                x = zz;
                break;
            }
            x += alpha * (zz - x);
            for (int j = 0; j < n; ++j)
                if (passive[j] && x(j) <= 1e-14) {
                    x(j) = 0.0;
                    passive[j] = false;
                }
        }
    }

    NnlsResult res;
    res.x.assign(x.data(), x.data() + n);
    const Eigen::VectorXd r = M * x - v;
    res.residual_l2 = r.norm();
    res.residual_linf = r.cwiseAbs().maxCoeff();
    return res;
}

}  // namespace covert::solvers
