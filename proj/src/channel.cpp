#include "covert/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace covert {

namespace {

constexpr double kRowSumTol = 1e-6;      // accepted slack before renormalization
constexpr double kDuplicateRowTol = 1e-9;
constexpr double kSupportTol = 1e-12;    // Q0(y) below this counts as zero

double linf_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

bool is_distribution(const std::vector<double>& p, double sum_tol) {
    if (p.empty()) return false;
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= sum_tol;
}

Distribution make_distribution(std::vector<double> p, double sum_tol) {
    if (!is_distribution(p, sum_tol))
        throw parse_error("not a probability vector (negative entry or sum off by > tolerance)");
    return Distribution{std::move(p)};
}

void Channel::validate() const {
    const std::size_t nx = matrix.size();
    if (nx < 2)
        throw parse_error("channel has no non-off input");
    const std::size_t ny = matrix[0].size();
    if (ny == 0) throw parse_error("channel has no outputs");
    if (!input_labels.empty() && input_labels.size() != nx)
        throw parse_error("input label count does not match matrix rows");
    if (!output_labels.empty() && output_labels.size() != ny)
        throw parse_error("output label count does not match matrix columns");
    if (off_index >= nx) throw parse_error("off index out of range");
    for (const auto& r : matrix) {
        if (r.size() != ny) throw parse_error("ragged channel matrix");
        if (!is_distribution(r)) throw parse_error("channel row is not a distribution");
    }
    for (std::size_t a = 0; a < nx; ++a)
        for (std::size_t b = a + 1; b < nx; ++b)
            if (linf_diff(matrix[a], matrix[b]) < kDuplicateRowTol)
                throw parse_error("duplicate channel rows (inputs " + std::to_string(a) +
                                  " and " + std::to_string(b) + ")");
}

std::vector<std::size_t> ReducedChannel::non_off_inputs() const {
    std::vector<std::size_t> xs;
    for (std::size_t x = 0; x < ch.num_inputs(); ++x)
        if (x != ch.off_index) xs.push_back(x);
    return xs;
}

Channel parse_channel(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("channel file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("matrix") || !j.contains("off"))
        throw parse_error("channel file must be an object with 'matrix' and 'off'");

    Channel ch;
    if (j.contains("inputs")) {
        for (const auto& v : j["inputs"]) ch.input_labels.push_back(v.get<std::string>());
        for (std::size_t a = 0; a < ch.input_labels.size(); ++a)
            for (std::size_t b = a + 1; b < ch.input_labels.size(); ++b)
                if (ch.input_labels[a] == ch.input_labels[b])
                    throw parse_error("duplicate input label '" + ch.input_labels[a] + "'");
    }
    if (j.contains("outputs"))
        for (const auto& v : j["outputs"]) ch.output_labels.push_back(v.get<std::string>());

    if (!j["matrix"].is_array() || j["matrix"].empty())
        throw parse_error("'matrix' must be a non-empty array of rows");
    for (const auto& row : j["matrix"]) {
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) throw parse_error("matrix entry is not a number");
            r.push_back(v.get<double>());
        }
        double s = 0.0;
        for (double v : r) {
            if (!(v >= 0.0)) throw parse_error("negative matrix entry");
            s += v;
        }
        if (std::abs(s - 1.0) > kRowSumTol)
            throw parse_error("matrix row sums to " + std::to_string(s) + ", not 1");
        // renormalize sloppy rows, but leave rows that already sum to 1 up to
        // rounding untouched so serialize/parse round-trips bit-for-bit
        if (std::abs(s - 1.0) > 1e-12)
            for (double& v : r) v /= s;
        ch.matrix.push_back(std::move(r));
    }

    const auto& off = j["off"];
    if (off.is_number_integer()) {
        long long idx = off.get<long long>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= ch.matrix.size())
            throw parse_error("unknown off symbol (index out of range)");
        ch.off_index = static_cast<std::size_t>(idx);
    } else if (off.is_string()) {
        const std::string name = off.get<std::string>();
        auto it = std::find(ch.input_labels.begin(), ch.input_labels.end(), name);
        if (it != ch.input_labels.end()) {
            ch.off_index = static_cast<std::size_t>(it - ch.input_labels.begin());
        } else {
            // a purely numeric string is accepted as an index
            try {
                std::size_t pos = 0;
                long long idx = std::stoll(name, &pos);
                if (pos != name.size() || idx < 0 ||
                    static_cast<std::size_t>(idx) >= ch.matrix.size())
                    throw std::invalid_argument("");
                ch.off_index = static_cast<std::size_t>(idx);
            } catch (...) {
                throw parse_error("unknown off symbol '" + name + "'");
            }
        }
    } else {
        throw parse_error("'off' must be an input label or an integer index");
    }

    ch.validate();
    return ch;
}

Channel parse_channel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open channel file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_channel(ss.str());
}

std::string serialize_channel(const Channel& ch) {
    nlohmann::json j;
    if (!ch.input_labels.empty()) j["inputs"] = ch.input_labels;
    if (!ch.output_labels.empty()) j["outputs"] = ch.output_labels;
    j["off"] = ch.off_index;
    j["matrix"] = ch.matrix;  // nlohmann prints shortest round-trip doubles
    return j.dump(2);
}

ReducedChannel reduce(const Channel& ch) {
    ch.validate();
    const auto& q0 = ch.off_row();
    const std::size_t ny = ch.num_outputs();

    std::vector<std::size_t> keep_y;
    for (std::size_t y = 0; y < ny; ++y)
        if (q0[y] >= kSupportTol) keep_y.push_back(y);
    if (keep_y.empty()) throw reduction_error("off row has empty support");

    // keep inputs whose mass escapes supp(Q0) by less than the support tolerance
    std::vector<std::size_t> keep_x;
    for (std::size_t x = 0; x < ch.num_inputs(); ++x) {
        double escaped = 0.0;
        for (std::size_t y = 0; y < ny; ++y)
            if (q0[y] < kSupportTol) escaped += ch.matrix[x][y];
        if (escaped < kSupportTol || x == ch.off_index) keep_x.push_back(x);
    }
    if (keep_x.size() < 2)
        throw reduction_error(
            "no nontrivial covert communication possible: every non-off input "
            "is detectable with certainty (support escapes the off output)");

    ReducedChannel r;
    r.original_input = keep_x;
    r.original_output = keep_y;
    for (std::size_t xi = 0; xi < keep_x.size(); ++xi) {
        const std::size_t x = keep_x[xi];
        std::vector<double> row;
        row.reserve(keep_y.size());
        for (std::size_t y : keep_y) row.push_back(ch.matrix[x][y]);
        r.ch.matrix.push_back(std::move(row));
        if (!ch.input_labels.empty()) r.ch.input_labels.push_back(ch.input_labels[x]);
        if (x == ch.off_index) r.ch.off_index = xi;
    }
    if (!ch.output_labels.empty())
        for (std::size_t y : keep_y) r.ch.output_labels.push_back(ch.output_labels[y]);
    r.ch.validate();
    return r;
}

Channel make_bsc(double p) {
    if (!(p > 0.0 && p < 1.0) || std::abs(p - 0.5) < 1e-9)
        throw parse_error("BSC crossover must lie in (0,1) away from 1/2");
    Channel ch;
    ch.input_labels = {"0", "1"};
    ch.output_labels = {"0", "1"};
    ch.matrix = {{1.0 - p, p}, {p, 1.0 - p}};
    ch.off_index = 0;
    ch.validate();
    return ch;
}

Channel make_kary_uniform_error(int k, double p) {
    if (k < 2) throw parse_error("k-ary channel needs k >= 2");
    if (!(p > 0.0 && p < 1.0)) throw parse_error("error probability must lie in (0,1)");
    Channel ch;
    const double off_diag = p / (k - 1);
    if (std::abs((1.0 - p) - off_diag) < 1e-9)
        throw parse_error("degenerate k-ary channel: rows coincide");
    for (int x = 0; x < k; ++x) {
        ch.input_labels.push_back(std::to_string(x));
        ch.output_labels.push_back(std::to_string(x));
        std::vector<double> row(k, off_diag);
        row[x] = 1.0 - p;
        ch.matrix.push_back(std::move(row));
    }
    ch.off_index = 0;
    ch.validate();
    return ch;
}

Channel make_binary_with_idle(double p) {
    if (!(p > 0.0 && p < 1.0) || std::abs(p - 0.5) < 1e-9)
        throw parse_error("crossover must lie in (0,1) away from 1/2");
    Channel ch;
    ch.input_labels = {"0", "-1", "+1"};
    ch.output_labels = {"-1", "+1"};
    ch.matrix = {{0.5, 0.5}, {1.0 - p, p}, {p, 1.0 - p}};
    ch.off_index = 0;
    ch.validate();
    return ch;
}

}  // namespace covert
