#include "covert/infodiv.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace covert {

double kl(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;                 // 0 log 0 = 0
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

double chi2_half(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("chi2_half: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] <= 0.0) throw std::invalid_argument("chi2_half: reference has a zero entry");
        const double d = p[i] - q[i];
        s += d * d / q[i];
    }
    return 0.5 * s;
}

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

std::vector<double> output_marginal(const std::vector<double>& p, const Channel& ch) {
    if (p.size() != ch.num_inputs())
        throw std::invalid_argument("output_marginal: input size mismatch");
    std::vector<double> q(ch.num_outputs(), 0.0);
    for (std::size_t x = 0; x < p.size(); ++x) {
        if (p[x] == 0.0) continue;
        const auto& row = ch.matrix[x];
        for (std::size_t y = 0; y < q.size(); ++y) q[y] += p[x] * row[y];
    }
    return q;
}

double mutual_information(const std::vector<double>& p, const Channel& ch) {
    const auto q = output_marginal(p, ch);
    double s = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x)
        if (p[x] > 0.0) s += p[x] * kl(ch.matrix[x], q);
    return s;
}

double llr_variance(const std::vector<double>& q0, const std::vector<double>& qref) {
    if (q0.size() != qref.size()) throw std::invalid_argument("llr_variance: size mismatch");
    double mean = 0.0, second = 0.0;
    for (std::size_t y = 0; y < q0.size(); ++y) {
        if (q0[y] <= 0.0) continue;
        if (qref[y] <= 0.0) throw std::invalid_argument("llr_variance: reference has a zero entry");
        const double z = std::log(q0[y] / qref[y]);
        mean += q0[y] * z;
        second += q0[y] * z * z;
    }
    return second - mean * mean;
}

double pinsker_tv_bound(double kl_nats) {
    if (kl_nats < 0.0) throw std::invalid_argument("pinsker_tv_bound: negative divergence");
    return std::sqrt(kl_nats / 2.0);
}

}  // namespace covert
