#include "covert/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "covert/infodiv.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace covert {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform on (0,1), never exactly 0 or 1
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }
};

double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// log Binomial(m, p) pmf at k; lgt[i] = lgamma(i+1)
double ln_binom_pmf(long long k, long long m, double p, const std::vector<double>& lgt) {
    if (k < 0 || k > m) return kNegInf;
    if (p <= 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p >= 1.0) return k == m ? 0.0 : kNegInf;
    return lgt[static_cast<std::size_t>(m)] - lgt[static_cast<std::size_t>(k)] -
           lgt[static_cast<std::size_t>(m - k)] +
           static_cast<double>(k) * std::log(p) +
           static_cast<double>(m - k) * std::log1p(-p);
}

// ln P(k0*d0 + k1*d1 >= c), k0 ~ Bin(n0,mu), k1 ~ Bin(n1,mu) independent.
// Exact full-range summation in log domain; ties count as successes.
double ln_weighted_binom_tail(long long n0, long long n1, double mu, double d0,
                              double d1, double c, const std::vector<double>& lgt) {
    const double tiny = 1e-15;
    if (std::abs(d0) < tiny && std::abs(d1) < tiny) return c <= 0.0 ? 0.0 : kNegInf;
    if (std::abs(d1) < tiny) {
        std::swap(d0, d1);
        std::swap(n0, n1);
    }
    // suffix / prefix log-sums of the k1 binomial
    std::vector<double> tail(static_cast<std::size_t>(n1) + 2, kNegInf);
    if (d1 > 0.0) {
        for (long long k = n1; k >= 0; --k)
            tail[static_cast<std::size_t>(k)] = logaddexp(
                ln_binom_pmf(k, n1, mu, lgt), tail[static_cast<std::size_t>(k) + 1]);
    } else {
        double run = kNegInf;
        for (long long k = 0; k <= n1; ++k) {
            run = logaddexp(run, ln_binom_pmf(k, n1, mu, lgt));
            tail[static_cast<std::size_t>(k)] = run;  // prefix when d1 < 0
        }
    }
    auto cond_prob = [&](long long k0) {
        const double rem = c - static_cast<double>(k0) * d0;
        if (d1 > 0.0) {
            const long long m = static_cast<long long>(std::ceil(rem / d1 - 1e-12));
            if (m <= 0) return 0.0;
            if (m > n1) return kNegInf;
            return tail[static_cast<std::size_t>(m)];
        }
        const long long m = static_cast<long long>(std::floor(rem / d1 + 1e-12));
        if (m >= n1) return 0.0;
        if (m < 0) return kNegInf;
        return tail[static_cast<std::size_t>(m)];
    };
    // online logsumexp over the full k0 range (no truncation)
    double mx = kNegInf, s = 0.0;
    for (long long k0 = 0; k0 <= n0; ++k0) {
        const double lp = ln_binom_pmf(k0, n0, mu, lgt);
        if (lp == kNegInf) continue;
        const double term = lp + cond_prob(k0);
        if (term == kNegInf) continue;
        if (term > mx) {
            s = s * std::exp(mx - term) + 1.0;
            mx = term;
        } else {
            s += std::exp(term - mx);
        }
    }
    if (mx == kNegInf) return kNegInf;
    return std::min(mx + std::log(s), 0.0);
}

// conf = 1 - (1-q)^{M-1} with q = exp(lnq) and log(M-1) = log_m1
double confusion_probability(double lnq, double log_m1) {
    if (lnq == kNegInf) return 0.0;
    const double q = std::exp(std::min(lnq, 0.0));
    if (q >= 1.0 - 1e-15) return 1.0;
    const double g = -std::log1p(-q);  // > 0
    const double lu = log_m1 + std::log(g);
    if (lu > 700.0) return 1.0;
    return -std::expm1(-std::exp(lu));
}

double log_m_minus_one(double log_m) {
    // ln(e^logm - 1), stable for both ends
    return log_m + std::log1p(-std::exp(-log_m));
}

// lower-tail log CDF of a noncentral chi-square via the Lugannani-Rice
// saddlepoint, stable far into the tail where the plain CDF underflows
double ncchisq_log_cdf(double x, double nu, double lambda) {
    if (x <= 0.0) return kNegInf;
    const double mean = nu + lambda;
    const double sd = std::sqrt(2.0 * nu + 4.0 * lambda);

    double u;  // 1/(1-2t) at the saddlepoint K'(t) = x
    if (lambda > 0.0) {
        u = (-nu + std::sqrt(nu * nu + 4.0 * lambda * x)) / (2.0 * lambda);
    } else {
        u = x / nu;
    }
    const double t = 0.5 * (1.0 - 1.0 / u);
    const double K = lambda * t * u + 0.5 * nu * std::log(u);
    const double Kpp = 2.0 * nu * u * u + 4.0 * lambda * u * u * u;
    const double warg = 2.0 * (t * x - K);
    if (warg <= 0.0 || std::abs(t) < 1e-8) {
        // saddlepoint degenerates at the mean; normal approximation is exact
        // to the same order there
        const double zn = (x - mean) / sd;
        if (zn > -8.0) {
            const double p = 0.5 * std::erfc(-zn / std::sqrt(2.0));
            return std::log(std::max(p, 1e-300));
        }
        return -0.5 * zn * zn - 0.5 * std::log(kTwoPi) - std::log(-zn);
    }
    const double w = (t < 0.0 ? -1.0 : 1.0) * std::sqrt(warg);
    const double v = t * std::sqrt(Kpp);

    if (w > -8.0) {
        const double phiw = std::exp(-0.5 * w * w) / std::sqrt(kTwoPi);
        const double Phiw = 0.5 * std::erfc(-w / std::sqrt(2.0));
        const double p = Phiw + phiw * (1.0 / w - 1.0 / v);
        return std::log(std::min(std::max(p, 1e-300), 1.0));
    }
    // Mills-ratio expansion: Phi(w)/phi(w) + 1/w = (1/w^3)(1 - 3/w^2 + ...)
    const double iw2 = 1.0 / (w * w);
    const double series = (1.0 - iw2 * (3.0 - iw2 * (15.0 - 105.0 * iw2))) / (w * w * w);
    const double bracket = series - 1.0 / v;
    if (bracket <= 0.0) return kNegInf;
    return -0.5 * w * w - 0.5 * std::log(kTwoPi) + std::log(bracket);
}

struct TrialOutcomes {
    std::vector<char> miss;
    std::vector<double> lnq;  // per-competitor success log-probability given y
    bool supports_rescaling = false;  // lnq valid, error(M) recomputable
};

double error_at_rate(const TrialOutcomes& out, double log_m) {
    const double lm1 = log_m_minus_one(log_m);
    double acc = 0.0;
    for (std::size_t t = 0; t < out.miss.size(); ++t)
        acc += out.miss[t] ? 1.0 : confusion_probability(out.lnq[t], lm1);
    return acc / static_cast<double>(out.miss.size());
}

void run_indexed_trials(int trials, bool parallel, const std::function<void(int)>& body) {
#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
#endif
    (void)parallel;
    for (int t = 0; t < trials; ++t) body(t);
}

TrialOutcomes dmc_outcomes(const SimConfig& cfg, const CovertInputSpec& spec,
                           const ReducedChannel& rch) {
    const long long n = cfg.n;
    const std::size_t ny = rch.num_outputs();
    const std::vector<double>& q0 = rch.q0();
    const std::vector<double>& qn = spec.q_n;

    std::vector<std::size_t> atoms;  // non-off codebook support
    for (std::size_t x = 0; x < rch.num_inputs(); ++x)
        if (x != rch.off() && spec.p_n[x] > 0.0) atoms.push_back(x);

    const double info = mutual_information(spec.p_n, rch.ch);
    const double t_sum = static_cast<double>(n) * info * (1.0 - cfg.threshold_offset);

    TrialOutcomes out;
    out.miss.assign(cfg.trials, 0);
    out.lnq.assign(cfg.trials, kNegInf);

    if (ny == 2 && atoms.size() <= 1) {
        // two-letter codebook alphabet, binary outputs: the competitor tail
        // is an exact function of the number of 1-outputs
        const bool has_on = !atoms.empty();
        const std::size_t on = has_on ? atoms[0] : rch.off();
        const double mu = has_on ? spec.p_n[on] : 0.0;
        const std::vector<double>& onrow = rch.row(on);

        double lw[2][2];  // lw[atom][y] = log(row[y]/qn[y]); atom 0 = off
        for (int y = 0; y < 2; ++y) {
            lw[0][y] = std::log(q0[static_cast<std::size_t>(y)] /
                                qn[static_cast<std::size_t>(y)]);
            lw[1][y] = std::log(onrow[static_cast<std::size_t>(y)] /
                                qn[static_cast<std::size_t>(y)]);
        }
        const double a0 = lw[0][0], a1 = lw[0][1];
        const double d0 = lw[1][0] - lw[0][0], d1 = lw[1][1] - lw[0][1];

        std::vector<double> lgt(static_cast<std::size_t>(n) + 1);
        for (long long i = 0; i <= n; ++i)
            lgt[static_cast<std::size_t>(i)] = std::lgamma(static_cast<double>(i) + 1.0);

        std::vector<long long> ones(cfg.trials, 0);
        run_indexed_trials(cfg.trials, cfg.parallel, [&](int t) {
            SplitMix64 rng(trial_seed(cfg.master_seed,
                                      static_cast<std::uint64_t>(t)));
            double a_sum = 0.0;
            long long w = 0;
            for (long long i = 0; i < n; ++i) {
                const int atom = rng.next_double() < mu ? 1 : 0;
                const double p1 = atom == 1 ? onrow[1] : q0[1];
                const int y = rng.next_double() < p1 ? 1 : 0;
                a_sum += lw[atom][y];
                w += y;
            }
            out.miss[static_cast<std::size_t>(t)] = a_sum < t_sum ? 1 : 0;
            ones[static_cast<std::size_t>(t)] = w;
        });

        std::vector<long long> uniq = ones;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        std::vector<double> lnq_of(uniq.size());
        const int nu = static_cast<int>(uniq.size());
        run_indexed_trials(nu, cfg.parallel, [&](int i) {
            const long long w = uniq[static_cast<std::size_t>(i)];
            const double base = static_cast<double>(n - w) * a0 +
                                static_cast<double>(w) * a1;
            lnq_of[static_cast<std::size_t>(i)] =
                ln_weighted_binom_tail(n - w, w, mu, d0, d1, t_sum - base, lgt);
        });
        std::unordered_map<long long, double> table;
        for (std::size_t i = 0; i < uniq.size(); ++i) table[uniq[i]] = lnq_of[i];
        for (int t = 0; t < cfg.trials; ++t)
            out.lnq[static_cast<std::size_t>(t)] =
                table[ones[static_cast<std::size_t>(t)]];
        out.supports_rescaling = true;
        return out;
    }

    // literal competitor enumeration; only viable for small message counts
    const double mcount = std::exp(cfg.log_message_count);
    if (!(mcount <= 65537.0))
        throw std::invalid_argument(
            "exact confusion needs a binary-output two-letter codebook; "
            "literal decoding is limited to |M| <= 65537");
    const long long m1 = std::llround(mcount) - 1;

    std::vector<double> logw(rch.num_inputs() * ny);
    for (std::size_t x = 0; x < rch.num_inputs(); ++x)
        for (std::size_t y = 0; y < ny; ++y)
            logw[x * ny + y] =
                rch.row(x)[y] > 0.0 ? std::log(rch.row(x)[y] / qn[y]) : kNegInf;

    auto draw_index = [](SplitMix64& rng, const std::vector<double>& dist) {
        const double u = rng.next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < dist.size(); ++i) {
            acc += dist[i];
            if (u < acc) return i;
        }
        return dist.size() - 1;
    };

    run_indexed_trials(cfg.trials, cfg.parallel, [&](int t) {
        SplitMix64 rng(trial_seed(cfg.master_seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> ys(static_cast<std::size_t>(n));
        double a_true = 0.0;
        for (long long i = 0; i < n; ++i) {
            const std::size_t x = draw_index(rng, spec.p_n);
            const std::size_t y = draw_index(rng, rch.row(x));
            ys[static_cast<std::size_t>(i)] = y;
            a_true += logw[x * ny + y];
        }
        bool err = a_true < t_sum;
        for (long long m = 0; m < m1 && !err; ++m) {
            double a = 0.0;
            for (long long i = 0; i < n; ++i)
                a += logw[draw_index(rng, spec.p_n) * ny +
                          ys[static_cast<std::size_t>(i)]];
            if (a >= t_sum) err = true;
        }
        out.miss[static_cast<std::size_t>(t)] = err ? 1 : 0;  // folded error flag
    });
    out.supports_rescaling = false;
    return out;
}

TrialOutcomes awgn_outcomes(const SimConfig& cfg, const AwgnCodebookSpec& spec) {
    const long long n = cfg.n;
    const double sigma2 = spec.sigma2;
    const double rho = spec.rho_n;
    const double c1 = 0.5 * std::log1p(rho / sigma2);
    const double sqn = std::sqrt(static_cast<double>(n));
    const double t_norm = spec.info_density_mean * (1.0 - cfg.threshold_offset);
    const double sx = std::sqrt(rho), sz = std::sqrt(sigma2);

    TrialOutcomes out;
    out.miss.assign(cfg.trials, 0);
    out.lnq.assign(cfg.trials, kNegInf);

    run_indexed_trials(cfg.trials, cfg.parallel, [&](int t) {
        SplitMix64 rng(trial_seed(cfg.master_seed, static_cast<std::uint64_t>(t)));
        double sum_ratio = 0.0, sum_y2 = 0.0;
        for (long long i = 0; i < n; ++i) {
            const double u1 = rng.next_double();
            const double u2 = rng.next_double();
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double g1 = r * std::cos(kTwoPi * u2);
            const double g2 = r * std::sin(kTwoPi * u2);
            const double x = sx * g1, z = sz * g2, y = x + z;
            sum_ratio += -z * z / (2.0 * sigma2) + y * y / (2.0 * (rho + sigma2)) + c1;
            sum_y2 += y * y;
        }
        out.miss[static_cast<std::size_t>(t)] = sum_ratio / sqn < t_norm ? 1 : 0;
        const double c = 2.0 * sigma2 * (sum_y2 / (2.0 * (rho + sigma2)) +
                                         static_cast<double>(n) * c1 - sqn * t_norm);
        out.lnq[static_cast<std::size_t>(t)] =
            c <= 0.0 ? kNegInf
                     : ncchisq_log_cdf(c / rho, static_cast<double>(n), sum_y2 / rho);
    });
    out.supports_rescaling = true;
    return out;
}

SimReport assemble_report(const SimConfig& cfg, const TrialOutcomes& out,
                          double kl_spent, std::optional<double> tv) {
    SimReport rep;
    rep.trials = cfg.trials;
    rep.log_message_count = cfg.log_message_count;
    rep.message_count = std::exp(cfg.log_message_count);
    rep.kl_spent = kl_spent;
    rep.tv_exact = tv;
    rep.normalized_rate =
        cfg.delta > 0.0
            ? cfg.log_message_count /
                  std::sqrt(static_cast<double>(cfg.n) * cfg.delta)
            : 0.0;

    const double lm1 = log_m_minus_one(cfg.log_message_count);
    const int T = cfg.trials;
    std::vector<double> err(static_cast<std::size_t>(T));
    double mean = 0.0;
    for (int t = 0; t < T; ++t) {
        const std::size_t i = static_cast<std::size_t>(t);
        err[i] = out.miss[i] ? 1.0
                             : (out.supports_rescaling
                                    ? confusion_probability(out.lnq[i], lm1)
                                    : 0.0);
        mean += err[i];
    }
    const double total = mean;
    mean /= static_cast<double>(T);
    rep.error_rate = mean;

    const double z = 1.959963984540054;
    if (total < 10.0 || static_cast<double>(T) - total < 10.0) {
        // Wilson half-width on the effective success count
        const double tn = static_cast<double>(T);
        rep.error_rate_ci95 = z / (1.0 + z * z / tn) *
                              std::sqrt(mean * (1.0 - mean) / tn +
                                        z * z / (4.0 * tn * tn));
    } else {
        double var = 0.0;
        for (int t = 0; t < T; ++t) {
            const double d = err[static_cast<std::size_t>(t)] - mean;
            var += d * d;
        }
        var /= static_cast<double>(T - 1);
        rep.error_rate_ci95 = z * std::sqrt(var / static_cast<double>(T));
    }
    return rep;
}

void validate_config(const SimConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("blocklength must be positive");
    if (cfg.trials < 1) throw std::invalid_argument("trial count must be positive");
    if (cfg.log_message_count < std::log(2.0) - 1e-12)
        throw std::invalid_argument("need at least two messages");
    if (cfg.threshold_offset >= 1.0)
        throw std::invalid_argument("threshold offset must be below 1");
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) {
    SplitMix64 mix(master_seed ^ (0xD1B54A32D192ED03ull * (trial + 1)));
    return mix.next_u64();
}

double exact_binary_tv(double q1_on, double q1_off, long long n) {
    if (!(q1_on >= 0.0 && q1_on <= 1.0 && q1_off >= 0.0 && q1_off <= 1.0))
        throw std::invalid_argument("letter probabilities must lie in [0,1]");
    if (n < 1) throw std::invalid_argument("blocklength must be positive");
    if (q1_on == q1_off) return 0.0;

    std::vector<double> lgt(static_cast<std::size_t>(n) + 1);
    for (long long i = 0; i <= n; ++i)
        lgt[static_cast<std::size_t>(i)] = std::lgamma(static_cast<double>(i) + 1.0);

    // the likelihood ratio of the two product measures depends only on the
    // number of ones, so TV reduces to the binomial counts
    double acc = 0.0;
    for (long long w = 0; w <= n; ++w) {
        const double l1 = ln_binom_pmf(w, n, q1_on, lgt);
        const double l0 = ln_binom_pmf(w, n, q1_off, lgt);
        if (l1 == kNegInf && l0 == kNegInf) continue;
        const double m = std::max(l1, l0);
        acc += std::exp(m) * -std::expm1(-std::abs(l1 - l0));
    }
    return 0.5 * acc;
}

SimReport run_dmc_trials(const SimConfig& cfg, const CovertInputSpec& spec) {
    validate_config(cfg);
    const ReducedChannel& rch = std::get<ReducedChannel>(cfg.channel);
    if (spec.n != cfg.n)
        throw std::invalid_argument("codebook schedule was built for a different n");

    const TrialOutcomes out = dmc_outcomes(cfg, spec, rch);
    const double kl_spent =
        static_cast<double>(cfg.n) * spec.exact_per_letter_kl;
    std::optional<double> tv;
    if (rch.num_outputs() == 2)
        tv = exact_binary_tv(spec.q_n[1], rch.q0()[1], cfg.n);
    return assemble_report(cfg, out, kl_spent, tv);
}

SimReport run_awgn_trials(const SimConfig& cfg, const AwgnCodebookSpec& spec) {
    validate_config(cfg);
    if (!std::holds_alternative<AwgnChannel>(cfg.channel))
        throw std::invalid_argument("configuration does not carry a Gaussian channel");
    if (spec.n != cfg.n)
        throw std::invalid_argument("codebook schedule was built for a different n");

    const TrialOutcomes out = awgn_outcomes(cfg, spec);
    const double kl_spent = static_cast<double>(cfg.n) * spec.per_letter_kl;
    return assemble_report(cfg, out, kl_spent, std::nullopt);
}

std::vector<SweepRow> sqrt_law_sweep(const SimConfig& cfg_template,
                                     const std::vector<long long>& n_values,
                                     double target_error) {
    if (!(target_error > 0.0 && target_error < 1.0))
        throw std::invalid_argument("target error must lie in (0,1)");

    const bool is_dmc = std::holds_alternative<ReducedChannel>(cfg_template.channel);
    LResult lres;
    if (is_dmc) lres = solve_L(std::get<ReducedChannel>(cfg_template.channel));

    std::vector<SweepRow> rows;
    for (long long n : n_values) {
        SimConfig cfg = cfg_template;
        cfg.n = n;
        cfg.log_message_count = std::log(2.0);

        TrialOutcomes out;
        double kl_spent = 0.0;
        if (is_dmc) {
            const ReducedChannel& rch = std::get<ReducedChannel>(cfg.channel);
            const CovertInputSpec spec =
                build_covert_input(rch, lres, n, cfg.delta);
            out = dmc_outcomes(cfg, spec, rch);
            kl_spent = static_cast<double>(n) * spec.exact_per_letter_kl;
        } else {
            const AwgnCodebookSpec spec = achievability_schedule(
                n, cfg.delta, std::get<AwgnChannel>(cfg.channel).sigma2);
            out = awgn_outcomes(cfg, spec);
            kl_spent = static_cast<double>(n) * spec.per_letter_kl;
        }
        if (!out.supports_rescaling)
            throw std::invalid_argument(
                "rate sweep needs the closed-form competitor tail");

        SweepRow row;
        row.n = n;
        row.kl_spent = kl_spent;

        const double floor_log_m = std::log(2.0);
        double lo = floor_log_m;
        if (error_at_rate(out, lo) > target_error) {
            row.at_floor = true;
            row.log_message_count = lo;
            row.error_rate = error_at_rate(out, lo);
        } else {
            double hi = std::max(2.0 * floor_log_m, 1.0);
            int guard = 0;
            while (error_at_rate(out, hi) <= target_error) {
                hi *= 2.0;
                if (++guard > 200)
                    throw convergence_error("error rate never exceeded the target");
            }
            for (int b = 0; b < 100; ++b) {
                const double mid = 0.5 * (lo + hi);
                (error_at_rate(out, mid) <= target_error ? lo : hi) = mid;
            }
            row.log_message_count = lo;
            row.error_rate = error_at_rate(out, lo);
        }
        row.normalized_rate =
            cfg.delta > 0.0
                ? row.log_message_count /
                      std::sqrt(static_cast<double>(n) * cfg.delta)
                : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace covert
