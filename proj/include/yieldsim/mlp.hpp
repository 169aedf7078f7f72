#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace yieldsim {

// Layer plan for a small fully connected net: rectifier hidden layers,
// linear output, or tanh scaled to [-output_scale, output_scale] when
// bounded_output is set (policy heads need informative gradients at the
// action bounds, so clipping is not used).
struct MlpSpec {
    int input = 1;
    std::vector<int> hidden = {64, 64, 64};
    int output = 1;
    bool bounded_output = false;
    double output_scale = 1.0;

    bool operator==(const MlpSpec&) const = default;
};

class Mlp {
public:
    Mlp() = default;
    explicit Mlp(const MlpSpec& spec);              // zero parameters
    Mlp(const MlpSpec& spec, std::mt19937_64& rng); // Xavier-uniform weights

    const MlpSpec& spec() const { return spec_; }
    int input_dim() const { return spec_.input; }
    int output_dim() const { return spec_.output; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::vector<double> forward(const std::vector<double>& x) const;

    // Activations retained for one backward pass.
    struct Workspace {
        std::vector<std::vector<double>> inputs;  // inputs[l] feeds layer l
        std::vector<std::vector<double>> pre;     // preactivations per layer
    };
    std::vector<double> forward(const std::vector<double>& x, Workspace& ws) const;

    // Adds dLoss/dParams into grad (same length as params()) and returns
    // dLoss/dInput, given dLoss/dOutput. Requires the workspace of the
    // matching forward call.
    std::vector<double> backward(const Workspace& ws, const std::vector<double>& upstream,
                                 std::vector<double>& grad) const;

private:
    std::vector<int> layer_sizes() const;  // input, hidden..., output

    MlpSpec spec_;
    std::vector<double> params_;  // per layer: row-major weights, then biases
};

// target <- tau * online + (1 - tau) * target, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);

// Worst guarded relative error between analytic and central-difference
// gradients over `points` random nets and inputs, probing `coords_per_point`
// random parameter coordinates plus every input coordinate each time.
// Guarded: |analytic - fd| / max(1, |analytic|, |fd|).
double max_gradient_rel_error(const MlpSpec& spec, std::mt19937_64& rng, int points,
                              int coords_per_point);

// Adam with the usual defaults (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam {
public:
    Adam() = default;
    explicit Adam(std::size_t param_count) : m_(param_count, 0.0), v_(param_count, 0.0) {}
    void step(std::vector<double>& params, const std::vector<double>& grad, double lr);

private:
    std::vector<double> m_, v_;
    long long t_ = 0;
};

}  // namespace yieldsim
