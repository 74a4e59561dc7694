#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "covert/awgn.hpp"
#include "covert/capacity.hpp"
#include "covert/channel.hpp"
#include "covert/infodiv.hpp"
#include "covert/lpd.hpp"
#include "covert/sim.hpp"

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Display-only unit conversion: a quantity carrying nats^pow is divided by
// ln(2)^pow, never inside the library.
struct Display {
    bool bits = false;

    double operator()(double v, double pow = 1.0) const {
        return bits ? v / std::pow(kLn2, pow) : v;
    }
    std::string unit(const char* nats_name, const char* bits_name) const {
        return bits ? bits_name : nats_name;
    }
};

covert::Channel load_channel(const std::string& file, const std::string& family) {
    if (!file.empty() && !family.empty())
        throw covert::parse_error("give either a channel file or a family, not both");
    if (!file.empty()) return covert::parse_channel_file(file);
    if (family.empty()) throw covert::parse_error("no channel given");

    const auto colon = family.find(':');
    const std::string name = family.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : family.substr(colon + 1);
    try {
        if (name == "bsc") return covert::make_bsc(std::stod(args));
        if (name == "idle") return covert::make_binary_with_idle(std::stod(args));
        if (name == "kary") {
            const auto comma = args.find(',');
            if (comma == std::string::npos)
                throw covert::parse_error("kary family needs k and p: kary:k,p");
            return covert::make_kary_uniform_error(std::stoi(args.substr(0, comma)),
                                                   std::stod(args.substr(comma + 1)));
        }
    } catch (const std::logic_error&) {  // stod/stoi failures
        throw covert::parse_error("malformed family parameter: " + family);
    }
    throw covert::parse_error("unknown channel family: " + name);
}

// output stream selection; file when --out given, stdout otherwise
class OutStream {
  public:
    explicit OutStream(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw covert::parse_error("cannot open output file: " + path);
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

std::vector<long long> parse_n_values(long long single, const std::string& grid) {
    std::vector<long long> out;
    if (single > 0) out.push_back(single);
    if (grid.empty()) return out;
    if (grid.find(':') != std::string::npos) {
        long long a = 0, b = 0, s = 0;
        if (std::sscanf(grid.c_str(), "%lld:%lld:%lld", &a, &b, &s) != 3 || s <= 0 ||
            a <= 0)
            throw covert::parse_error("bad n grid, expected A:B:STEP");
        for (long long n = a; n <= b; n += s) out.push_back(n);
        return out;
    }
    std::stringstream ss(grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const long long n = std::atoll(tok.c_str());
        if (n <= 0) throw covert::parse_error("bad n value: " + tok);
        out.push_back(n);
    }
    return out;
}

std::vector<double> parse_real_grid(const std::string& grid, const char* what) {
    double a = 0, b = 0, s = 0;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%lf", &a, &b, &s) != 3 || s <= 0.0)
        throw covert::parse_error(std::string("bad ") + what + " grid, expected A:B:STEP");
    std::vector<double> out;
    for (double v = a; v <= b + 1e-12; v += s) out.push_back(v);
    if (out.empty()) throw covert::parse_error(std::string("empty ") + what + " grid");
    return out;
}

std::string join_dist(const std::vector<double>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ",";
        s += fmt(p[i]);
    }
    return s;
}

int cmd_analyze(const std::string& file, const std::string& family, double tol,
                const Display& disp) {
    const covert::Channel ch = load_channel(file, family);
    const covert::ReducedChannel rch = covert::reduce(ch);
    const covert::CaseLabel label = covert::classify(rch);
    const covert::CapacityResult cap = covert::blahut_arimoto(rch.ch, tol);
    const covert::FullSupportCondition cond =
        covert::check_condition_all_inputs(rch.ch, cap);

    std::ostream& os = std::cout;
    os << "inputs=" << ch.num_inputs() << " outputs=" << ch.num_outputs()
       << " off=" << ch.input_labels[ch.off_index] << "\n";
    os << "reduced_inputs=" << rch.num_inputs()
       << " reduced_outputs=" << rch.num_outputs() << "\n";
    os << "case="
       << (label.kind == covert::OffCase::RedundantOff ? "redundant_off"
                                                       : "non_redundant_off")
       << "\n";
    os << "hull_residual[l2]=" << fmt(label.residual) << "\n";
    os << "capacity[" << disp.unit("nats", "bits")
       << "]=" << fmt(disp(cap.capacity_nats)) << "\n";
    os << "condition_all_inputs=" << (cond.holds ? "true" : "false") << "\n";

    if (label.kind == covert::OffCase::RedundantOff) {
        const covert::CapacityResult cc = covert::constrained_capacity_redundant(rch);
        os << "constrained_capacity[" << disp.unit("nats", "bits")
           << "]=" << fmt(disp(cc.capacity_nats)) << "\n";
        os << "constrained_input[prob]=" << join_dist(cc.input_dist) << "\n";
        return 0;
    }

    const covert::LResult lres = covert::solve_L(rch);
    const double vb = covert::variance_bound(rch, cap);
    const covert::TangentCertificate cert = covert::tangent_certificate(rch, cap);
    const std::string su = disp.unit("sqrt-nats", "sqrt-bits");
    os << "L[" << su << "]=" << fmt(disp(lres.L, 0.5)) << "\n";
    os << "solver_gap[" << su << "]=" << fmt(disp(lres.solver_gap, 0.5)) << "\n";
    os << "oracle_checked=" << (lres.oracle_checked ? "true" : "false") << "\n";
    os << "variance_bound[" << su << "]=" << fmt(disp(vb, 0.5)) << "\n";
    os << "certificate_tight=" << (cert.tight ? "true" : "false") << "\n";
    os << "certificate_residual[linf]=" << fmt(cert.residual_linf) << "\n";
    os << "maximizer[prob]=" << join_dist(lres.maximizer) << "\n";
    os << "induced_output[prob]=" << join_dist(lres.induced_output) << "\n";
    return 0;
}

int cmd_sweep(const std::string& family, const std::string& p_grid,
              const std::string& k_grid, const std::string& out_path, double tol,
              const Display& disp) {
    if (family != "bsc" && family != "kary")
        throw covert::parse_error("sweep supports families bsc and kary");
    const std::vector<double> ps = parse_real_grid(p_grid, "p");
    std::vector<int> ks;
    if (family == "kary") {
        int a = 0, b = 0;
        if (std::sscanf(k_grid.c_str(), "%d:%d", &a, &b) != 2 || a < 2 || b < a)
            throw covert::parse_error("bad k grid, expected A:B with A >= 2");
        for (int k = a; k <= b; ++k) ks.push_back(k);
    } else {
        ks.push_back(2);
    }

    OutStream out(out_path);
    std::ostream& os = out.get();
    const std::string su = disp.unit("sqrt-nats", "sqrt-bits");
    if (family == "kary") os << "k[count],";
    os << "p[prob],L[" << su << "],variance_bound[" << su << "],tight[bool]\n";

    for (int k : ks) {
        for (double p : ps) {
            const covert::Channel ch = family == "bsc"
                                           ? covert::make_bsc(p)
                                           : covert::make_kary_uniform_error(k, p);
            const covert::ReducedChannel rch = covert::reduce(ch);
            const covert::LResult lres = covert::solve_L(rch);
            const covert::CapacityResult cap = covert::blahut_arimoto(rch.ch, tol);
            const double vb = covert::variance_bound(rch, cap);
            const covert::TangentCertificate cert = covert::tangent_certificate(rch, cap);
            if (family == "kary") os << k << ",";
            os << fmt(p) << "," << fmt(disp(lres.L, 0.5)) << ","
               << fmt(disp(vb, 0.5)) << "," << (cert.tight ? "true" : "false") << "\n";
        }
    }
    return 0;
}

int cmd_geodesic(const std::string& file, const std::string& family,
                 const std::string& lambda_grid, const std::string& out_path,
                 double tol) {
    const covert::Channel ch = load_channel(file, family);
    const covert::ReducedChannel rch = covert::reduce(ch);
    const covert::CapacityResult cap = covert::blahut_arimoto(rch.ch, tol);
    const std::vector<double> lambdas = parse_real_grid(lambda_grid, "lambda");

    OutStream out(out_path);
    std::ostream& os = out.get();
    os << "lambda[1]";
    for (std::size_t y = 0; y < rch.num_outputs(); ++y)
        os << ",q_" << rch.ch.output_labels[y] << "[prob]";
    os << ",membership_residual[l2]\n";
    for (double lam : lambdas) {
        const std::vector<double> q =
            covert::geodesic_point(rch.q0(), cap.output_dist, std::min(lam, 1.0));
        os << fmt(lam);
        for (double v : q) os << "," << fmt(v);
        os << "," << fmt(covert::output_hull_distance(rch, q)) << "\n";
    }
    return 0;
}

int cmd_awgn(double sigma2, double delta, long long n_single, const std::string& n_grid,
             const std::string& out_path, const Display& disp) {
    std::vector<long long> ns = parse_n_values(n_single, n_grid);
    if (ns.empty()) ns = {100, 1000, 10000, 100000, 1000000};

    OutStream out(out_path);
    std::ostream& os = out.get();
    os << "n[count],converse_power_bound[power],rho_n[power],budget_spent["
       << disp.unit("nats", "bits") << "],converse_normalized[1],"
       << "achievability_normalized[1]\n";
    for (long long n : ns) {
        const double rho_c = covert::converse_power_bound(n, delta, sigma2);
        const covert::AwgnCodebookSpec spec =
            covert::achievability_schedule(n, delta, sigma2);
        const double sqnd = std::sqrt(static_cast<double>(n) * delta);
        const double conv_norm =
            static_cast<double>(n) * 0.5 * std::log1p(rho_c / sigma2) / sqnd;
        const double ach_norm = spec.info_density_mean / std::sqrt(delta);
        os << n << "," << fmt(rho_c) << "," << fmt(spec.rho_n) << ","
           << fmt(disp(static_cast<double>(n) * spec.per_letter_kl)) << ","
           << fmt(conv_norm) << "," << fmt(ach_norm) << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& file, const std::string& family, bool awgn,
                 double sigma2, long long n_single, const std::string& n_grid,
                 double delta, double rate_factor, int trials, std::uint64_t seed,
                 double offset, bool serial, std::optional<double> bisect_target,
                 const std::string& out_path, const Display& disp) {
    const std::vector<long long> ns = parse_n_values(n_single, n_grid);
    if (ns.empty()) throw covert::parse_error("simulate needs --n or --n-grid");

    covert::SimConfig cfg;
    cfg.delta = delta;
    cfg.trials = trials;
    cfg.master_seed = seed;
    cfg.threshold_offset = offset;
    cfg.parallel = !serial;

    double scale_L = covert::awgn_L();
    std::optional<covert::ReducedChannel> rch;
    std::optional<covert::LResult> lres;
    if (awgn) {
        if (!file.empty() || !family.empty())
            throw covert::parse_error("--awgn excludes --channel/--family");
        cfg.channel = covert::AwgnChannel{sigma2};
    } else {
        rch = covert::reduce(load_channel(file, family));
        lres = covert::solve_L(*rch);
        scale_L = lres->L;
        cfg.channel = *rch;
    }

    OutStream out(out_path);
    std::ostream& os = out.get();
    const std::string nu = disp.unit("nats", "bits");
    const std::string su = disp.unit("sqrt-nats", "sqrt-bits");

    if (bisect_target) {
        const std::vector<covert::SweepRow> rows =
            covert::sqrt_law_sweep(cfg, ns, *bisect_target);
        os << "n[count],log_message_count[" << nu << "],error_rate[1],"
           << "normalized_rate[" << su << "],kl_spent[" << nu << "],at_floor[bool]\n";
        for (const covert::SweepRow& r : rows)
            os << r.n << "," << fmt(disp(r.log_message_count)) << ","
               << fmt(r.error_rate) << "," << fmt(disp(r.normalized_rate, 0.5)) << ","
               << fmt(disp(r.kl_spent)) << "," << (r.at_floor ? "true" : "false")
               << "\n";
        return 0;
    }

    os << "n[count],message_count[1],error_rate[1],ci95[1],kl_spent[" << nu
       << "],tv_exact[1],normalized_rate[" << su << "]\n";
    for (long long n : ns) {
        cfg.n = n;
        cfg.log_message_count =
            std::max(std::log(2.0),
                     rate_factor * scale_L * std::sqrt(static_cast<double>(n) * delta));
        covert::SimReport rep;
        if (awgn) {
            rep = covert::run_awgn_trials(
                cfg, covert::achievability_schedule(n, delta, sigma2));
        } else {
            rep = covert::run_dmc_trials(
                cfg, covert::build_covert_input(*rch, *lres, n, delta));
        }
        os << n << "," << fmt(rep.message_count) << "," << fmt(rep.error_rate) << ","
           << fmt(rep.error_rate_ci95) << "," << fmt(disp(rep.kl_spent)) << ","
           << (rep.tv_exact ? fmt(*rep.tv_exact) : std::string()) << ","
           << fmt(disp(rep.normalized_rate, 0.5)) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covert-channel scaling analysis"};
    app.require_subcommand(1);

    std::string file, family, out_path;
    std::string p_grid = "0.005:0.495:0.005", k_grid = "2:5", lambda_grid = "0:1:0.01";
    std::string n_grid;
    long long n_single = 0;
    double tol = 1e-9, sigma2 = 1.0, delta = 1.0, rate_factor = 0.8, offset = 0.15;
    double bisect_target = -1.0;
    int trials = 1000;
    std::uint64_t seed = 0;
    bool bits = false, awgn_flag = false, serial = false;

    app.add_flag("--bits", bits, "display information quantities in bits");

    CLI::App* an = app.add_subcommand("analyze", "classify a channel and report its constants");
    an->fallthrough();
    an->add_option("--channel", file, "channel JSON file");
    an->add_option("--family", family, "built-in family: bsc:p | kary:k,p | idle:p");
    an->add_option("--tol", tol, "capacity solver tolerance");

    CLI::App* sw = app.add_subcommand("sweep", "L and variance bound over a parameter grid");
    sw->fallthrough();
    sw->add_option("--family", family, "bsc or kary")->required();
    sw->add_option("--p-grid", p_grid, "crossover grid A:B:STEP");
    sw->add_option("--k-grid", k_grid, "alphabet grid A:B (kary)");
    sw->add_option("--out", out_path, "CSV output path (stdout when omitted)");
    sw->add_option("--tol", tol, "capacity solver tolerance");

    CLI::App* ge = app.add_subcommand("geodesic", "trace the output-space curve toward Q*");
    ge->fallthrough();
    ge->add_option("--channel", file, "channel JSON file");
    ge->add_option("--family", family, "built-in family spec");
    ge->add_option("--lambda-grid", lambda_grid, "curve parameter grid A:B:STEP");
    ge->add_option("--out", out_path, "CSV output path");
    ge->add_option("--tol", tol, "capacity solver tolerance");

    CLI::App* aw = app.add_subcommand("awgn", "Gaussian-channel power schedule and normalized rates");
    aw->fallthrough();
    aw->add_option("--sigma2", sigma2, "noise variance");
    aw->add_option("--delta", delta, "divergence budget");
    aw->add_option("--n", n_single, "single blocklength");
    aw->add_option("--n-grid", n_grid, "blocklengths, A:B:STEP or comma list");
    aw->add_option("--out", out_path, "CSV output path");

    CLI::App* si = app.add_subcommand("simulate", "random-codebook threshold-decoder trials");
    si->fallthrough();
    si->add_option("--channel", file, "channel JSON file");
    si->add_option("--family", family, "built-in family spec");
    si->add_flag("--awgn", awgn_flag, "simulate the Gaussian channel instead");
    si->add_option("--sigma2", sigma2, "noise variance (with --awgn)");
    si->add_option("--n", n_single, "single blocklength");
    si->add_option("--n-grid", n_grid, "blocklengths, A:B:STEP or comma list");
    si->add_option("--delta", delta, "divergence budget");
    si->add_option("--rate-factor", rate_factor, "log|M| = factor * L * sqrt(n delta)");
    si->add_option("--trials", trials, "Monte Carlo trials");
    si->add_option("--seed", seed, "master seed");
    si->add_option("--offset", offset, "decoder threshold offset");
    si->add_flag("--serial", serial, "disable trial-level parallelism");
    si->add_option("--bisect-rate", bisect_target,
                   "bisect the largest rate with error below this target");
    si->add_option("--out", out_path, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const Display disp{bits};
    try {
        if (app.got_subcommand(an)) return cmd_analyze(file, family, tol, disp);
        if (app.got_subcommand(sw))
            return cmd_sweep(family, p_grid, k_grid, out_path, tol, disp);
        if (app.got_subcommand(ge))
            return cmd_geodesic(file, family, lambda_grid, out_path, tol);
        if (app.got_subcommand(aw))
            return cmd_awgn(sigma2, delta, n_single, n_grid, out_path, disp);
        if (app.got_subcommand(si))
            return cmd_simulate(file, family, awgn_flag, sigma2, n_single, n_grid,
                                delta, rate_factor, trials, seed, offset, serial,
                                bisect_target >= 0.0
                                    ? std::optional<double>(bisect_target)
                                    : std::nullopt,
                                out_path, disp);
    } catch (const covert::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const covert::reduction_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const covert::convergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
