#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace covert {

// Thrown on malformed channel files / invalid distributions.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when support reduction leaves no usable input.
struct reduction_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an iterative solver fails to reach its certified tolerance.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Probability vector. Entries >= 0, sum within 1e-9 of 1.
struct Distribution {
    std::vector<double> p;

    std::size_t size() const { return p.size(); }
    double operator[](std::size_t i) const { return p[i]; }
    double& operator[](std::size_t i) { return p[i]; }
};

// Validates and returns d; throws parse_error otherwise.
Distribution make_distribution(std::vector<double> p, double sum_tol = 1e-9);

bool is_distribution(const std::vector<double>& p, double sum_tol = 1e-9);

// Finite input/output channel. Row x of `matrix` is W(.|x).
// Invariants enforced by validate(): every row a distribution (after
// renormalization at parse time), no two rows closer than 1e-9 in L-inf,
// off_index in range, >= 2 inputs.
struct Channel {
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;
    std::vector<std::vector<double>> matrix;   // |X| rows, |Y| cols
    std::size_t off_index = 0;

    std::size_t num_inputs() const { return matrix.size(); }
    std::size_t num_outputs() const { return matrix.empty() ? 0 : matrix[0].size(); }
    const std::vector<double>& row(std::size_t x) const { return matrix[x]; }
    const std::vector<double>& off_row() const { return matrix[off_index]; }

    void validate() const;
};

// Channel restricted to supp(Q0) with escaping inputs dropped.
// off_index refers to the retained input list; original_input/original_output
// map retained indices back to the parsed channel.
struct ReducedChannel {
    Channel ch;
    std::vector<std::size_t> original_input;
    std::vector<std::size_t> original_output;

    std::size_t num_inputs() const { return ch.num_inputs(); }
    std::size_t num_outputs() const { return ch.num_outputs(); }
    const std::vector<double>& row(std::size_t x) const { return ch.matrix[x]; }
    const std::vector<double>& q0() const { return ch.off_row(); }
    std::size_t off() const { return ch.off_index; }

    // Indices of inputs other than off, in retained order.
    std::vector<std::size_t> non_off_inputs() const;
};

// Parses the JSON channel file format:
//   {"inputs": [...], "outputs": [...], "off": <label or index>, "matrix": [[...], ...]}
// Rows within 1e-6 of stochastic are renormalized; rows already stochastic up
// to rounding are kept bit-for-bit.
Channel parse_channel(const std::string& text);
Channel parse_channel_file(const std::string& path);

// Full-precision JSON round-trip (parse(serialize(ch)) == ch bitwise).
std::string serialize_channel(const Channel& ch);

// Drops outputs with Q0(y) < 1e-12 and inputs whose rows put mass on dropped
// outputs. Throws reduction_error when no non-off input survives.
ReducedChannel reduce(const Channel& ch);

// Built-in families.
Channel make_bsc(double p);                       // inputs {0,1}, off 0
Channel make_kary_uniform_error(int k, double p); // k inputs/outputs, off 0
Channel make_binary_with_idle(double p);          // inputs {0,-1,+1}, off 0, uniform off row

}  // namespace covert
