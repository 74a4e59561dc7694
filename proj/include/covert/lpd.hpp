#pragma once

#include <optional>
#include <vector>

#include "covert/capacity.hpp"
#include "covert/channel.hpp"

namespace covert {

enum class OffCase {
    RedundantOff,     // Q0 in conv{W(.|x) : x != off}: linear covert scaling
    NonRedundantOff,  // sqrt(n delta) covert scaling
};

struct CaseLabel {
    OffCase kind = OffCase::NonRedundantOff;
    double residual = 0.0;                         // L2 distance of Q0 to the hull
    std::optional<std::vector<double>> mixture_witness;  // full-length, witness[off] = 0
};

// Distance of Q0 to conv{W(.|x) : x != off} via the hull QP
// (duality gap <= 1e-14 on the squared distance). RedundantOff iff
// squared distance <= 1e-14.
CaseLabel classify(const ReducedChannel& rch);

struct LResult {
    double L = 0.0;                      // sqrt-nats scaling constant
    std::vector<double> maximizer;       // distribution over non-off inputs (full-length, 0 at off)
    std::vector<double> induced_output;  // maximizer * W
    double solver_gap = 0.0;             // certified |L - L_true| upper bound
    bool oracle_checked = false;         // small-alphabet grid verification ran
};

// Scaling constant: maximize
//   sum_x P(x) kl(W(.|x),Q0) / sqrt(chi2_half(PW, Q0))
// over distributions P on the non-off inputs. Solved as the convex program
//   minimize a'G a  s.t.  sum_x a_x kl(W(.|x),Q0) = 1, a >= 0
// (the ratio is 0-homogeneous in the unnormalized cone), G the chi-squared
// quadratic form; L = 1/sqrt(min). Single non-off input solves in closed form.
// Requires NonRedundantOff (g > 0 on the feasible set).
LResult solve_L(const ReducedChannel& rch);

// Upper bound sqrt(2 * llr_variance(Q0, Q*)). A genuine bound on L only when
// check_condition_all_inputs holds; callers carry that flag.
double variance_bound(const ReducedChannel& rch, const CapacityResult& cap);

struct TangentCertificate {
    bool tight = false;          // residual_linf <= 1e-7
    std::vector<double> alpha;   // over non-off inputs (full-length, 0 at off)
    std::vector<double> s;       // target tangent vector
    double residual_linf = 0.0;
};

// Solves min |sum_x alpha_x (W(.|x) - Q0) - s|^2, alpha >= 0, with
// s(y) = Q0(y) (log(Q*(y)/Q0(y)) + C). Zero residual certifies that the
// variance bound is attained (columns are scaled to unit norm for
// conditioning; the residual itself is scale-invariant).
TangentCertificate tangent_certificate(const ReducedChannel& rch,
                                       const CapacityResult& cap);

// Normalized q0^(1-lambda) * qstar^lambda, lambda in [0,1]. Both inputs
// strictly positive; computed in log domain.
std::vector<double> geodesic_point(const std::vector<double>& q0,
                                   const std::vector<double>& qstar,
                                   double lambda);

// L2 distance of q to conv{W(.|x) : all x} (output polytope membership).
double output_hull_distance(const ReducedChannel& rch, const std::vector<double>& q);

struct FiniteNResult {
    double value_nats = 0.0;
    std::vector<double> input_dist;
    double gap = 0.0;  // certified duality gap
};

// maximize I(P,W) over {P : kl(PW, Q0) <= eps}. Lagrangian-dual conditional
// gradient: away-step Frank-Wolfe on I - nu*kl over the simplex, bisection on
// nu (the spent divergence is monotone in nu), final feasibility pull-back
// along the mixture line toward the off point-mass. Certified gap <= 1e-10.
FiniteNResult finite_n_constrained_capacity(const ReducedChannel& rch, double eps);

struct CovertInputSpec {
    long long n = 0;
    double delta = 0.0;
    double mu = 0.0;                 // mixture weight toward the L-maximizer
    std::vector<double> p_n;         // (1-mu) e_off + mu * maximizer
    std::vector<double> q_n;         // output marginal
    double exact_per_letter_kl = 0.0;
    bool underspent = false;         // mu = 1 could not spend the full budget
};

// Calibrates mu by bisection so n * kl(q_n, Q0) = delta within 1e-12 relative,
// never exceeding delta. delta = 0 gives mu = 0.
CovertInputSpec build_covert_input(const ReducedChannel& rch, const LResult& lres,
                                   long long n, double delta);

// Independent grid-search oracle for solve_L: dense simplex sweep at
// `coarse_step`, then shrinking local refinement down to `fine_step`.
// Deterministic lowest-index tie-breaking; parallelized over grid chunks.
double grid_search_L(const ReducedChannel& rch, double coarse_step = 1e-3,
                     double fine_step = 1e-6, bool parallel = true);

}  // namespace covert
