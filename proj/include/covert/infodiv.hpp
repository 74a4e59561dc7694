#pragma once

#include <vector>

#include "covert/channel.hpp"

namespace covert {

// All divergences are in nats. Conventions: 0*log(0/q) = 0;
// p > 0 with q = 0 gives +infinity.

double kl(const std::vector<double>& p, const std::vector<double>& q);

// Halved chi-squared divergence 0.5 * sum_y (p(y)-q(y))^2 / q(y).
// Local quadratic approximation of kl(p,q) around q. Requires q > 0.
double chi2_half(const std::vector<double>& p, const std::vector<double>& q);

double entropy(const std::vector<double>& p);

// Output marginal of input distribution p through ch.
std::vector<double> output_marginal(const std::vector<double>& p, const Channel& ch);

// I(P, W) = sum_x P(x) kl(W(.|x), PW) in nats.
double mutual_information(const std::vector<double>& p, const Channel& ch);

// Variance under q0 of log(q0(y)/qref(y)). Both strictly positive.
double llr_variance(const std::vector<double>& q0, const std::vector<double>& qref);

// Pinsker: TV <= sqrt(d/2) for KL divergence d.
double pinsker_tv_bound(double kl_nats);

}  // namespace covert
