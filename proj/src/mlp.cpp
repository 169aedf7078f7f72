#include "yieldsim/mlp.hpp"

#include <cmath>
#include <string>

#include "yieldsim/errors.hpp"

namespace yieldsim {

namespace {

std::size_t param_count(const std::vector<int>& sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        n += static_cast<std::size_t>(sizes[l]) * static_cast<std::size_t>(sizes[l + 1]) +
             static_cast<std::size_t>(sizes[l + 1]);
    }
    return n;
}

void check_spec(const MlpSpec& spec) {
    if (spec.input < 1 || spec.output < 1) throw config_error("mlp: dimensions must be >= 1");
    for (int h : spec.hidden)
        if (h < 1) throw config_error("mlp: hidden sizes must be >= 1");
    if (spec.bounded_output && spec.output_scale <= 0)
        throw config_error("mlp: output_scale must be > 0");
}

}  // namespace

std::vector<int> Mlp::layer_sizes() const {
    std::vector<int> sizes;
    sizes.push_back(spec_.input);
    sizes.insert(sizes.end(), spec_.hidden.begin(), spec_.hidden.end());
    sizes.push_back(spec_.output);
    return sizes;
}

Mlp::Mlp(const MlpSpec& spec) : spec_(spec) {
    check_spec(spec);
    params_.assign(param_count(layer_sizes()), 0.0);
}

Mlp::Mlp(const MlpSpec& spec, std::mt19937_64& rng) : Mlp(spec) {
    const auto sizes = layer_sizes();
    std::size_t at = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l], fan_out = sizes[l + 1];
        // Fan-based uniform limits on hidden layers; a near-zero output layer
        // so fresh policies start neutral and fresh value heads start flat.
        const bool last = l + 2 == sizes.size();
        const double limit =
            last ? 3e-3 : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (int k = 0; k < fan_in * fan_out; ++k) params_[at++] = u(rng);
        at += static_cast<std::size_t>(fan_out);  // biases stay 0
    }
}

std::vector<double> Mlp::forward(const std::vector<double>& x) const {
    Workspace ws;
    return forward(x, ws);
}

std::vector<double> Mlp::forward(const std::vector<double>& x, Workspace& ws) const {
    if (static_cast<int>(x.size()) != spec_.input)
        throw config_error("mlp: expected input of size " + std::to_string(spec_.input) +
                           ", got " + std::to_string(x.size()));
    const auto sizes = layer_sizes();
    const std::size_t layers = sizes.size() - 1;
    ws.inputs.assign(layers, {});
    ws.pre.assign(layers, {});

    std::vector<double> h = x;
    std::size_t at = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = sizes[l], out = sizes[l + 1];
        ws.inputs[l] = h;
        std::vector<double> pre(static_cast<std::size_t>(out));
        const double* w = params_.data() + at;
        const double* b = w + static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
        for (int o = 0; o < out; ++o) {
            double acc = b[o];
            const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(in);
            for (int i = 0; i < in; ++i) acc += row[i] * h[static_cast<std::size_t>(i)];
            pre[static_cast<std::size_t>(o)] = acc;
        }
        at += static_cast<std::size_t>(in) * static_cast<std::size_t>(out) +
              static_cast<std::size_t>(out);
        ws.pre[l] = pre;

        const bool last = l + 1 == layers;
        h.resize(pre.size());
        if (!last) {
            for (std::size_t k = 0; k < pre.size(); ++k) h[k] = pre[k] > 0.0 ? pre[k] : 0.0;
        } else if (spec_.bounded_output) {
            for (std::size_t k = 0; k < pre.size(); ++k)
                h[k] = spec_.output_scale * std::tanh(pre[k]);
        } else {
            h = pre;
        }
    }
    return h;
}

std::vector<double> Mlp::backward(const Workspace& ws, const std::vector<double>& upstream,
                                  std::vector<double>& grad) const {
    if (grad.size() != params_.size()) throw config_error("mlp: gradient buffer size mismatch");
    if (static_cast<int>(upstream.size()) != spec_.output)
        throw config_error("mlp: upstream gradient size mismatch");
    const auto sizes = layer_sizes();
    const std::size_t layers = sizes.size() - 1;
    if (ws.pre.size() != layers) throw state_error("mlp: workspace does not match forward pass");

    // dLoss/dPre of the output layer.
    std::vector<double> delta = upstream;
    if (spec_.bounded_output) {
        for (std::size_t k = 0; k < delta.size(); ++k) {
            const double th = std::tanh(ws.pre[layers - 1][k]);
            delta[k] *= spec_.output_scale * (1.0 - th * th);
        }
    }

    std::size_t at = params_.size();
    for (std::size_t l = layers; l-- > 0;) {
        const int in = sizes[l], out = sizes[l + 1];
        at -= static_cast<std::size_t>(in) * static_cast<std::size_t>(out) +
              static_cast<std::size_t>(out);
        const double* w = params_.data() + at;
        double* gw = grad.data() + at;
        double* gb = gw + static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
        const auto& input = ws.inputs[l];

        std::vector<double> dinput(static_cast<std::size_t>(in), 0.0);
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            gb[o] += d;
            const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(in);
            double* grow = gw + static_cast<std::size_t>(o) * static_cast<std::size_t>(in);
            for (int i = 0; i < in; ++i) {
                grow[i] += d * input[static_cast<std::size_t>(i)];
                dinput[static_cast<std::size_t>(i)] += d * row[i];
            }
        }
        if (l > 0) {
            // Through the rectifier of the previous layer.
            delta.assign(dinput.size(), 0.0);
            for (std::size_t k = 0; k < dinput.size(); ++k)
                delta[k] = ws.pre[l - 1][k] > 0.0 ? dinput[k] : 0.0;
        } else {
            return dinput;
        }
    }
    return {};
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
    if (target.spec() != online.spec()) throw config_error("soft_update: shape mismatch");
    if (tau < 0.0 || tau > 1.0) throw config_error("soft_update: tau must be in [0, 1]");
    auto& t = target.params();
    const auto& o = online.params();
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = tau * o[k] + (1.0 - tau) * t[k];
}

double max_gradient_rel_error(const MlpSpec& spec, std::mt19937_64& rng, int points,
                              int coords_per_point) {
    if (points < 1 || coords_per_point < 1)
        throw config_error("gradient check: points and coords_per_point must be >= 1");
    const double h = 1e-5;
    auto rel = [](double a, double f) {
        double denom = 1.0;
        if (std::abs(a) > denom) denom = std::abs(a);
        if (std::abs(f) > denom) denom = std::abs(f);
        return std::abs(a - f) / denom;
    };
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int p = 0; p < points; ++p) {
        Mlp net(spec, rng);
        std::vector<double> x(static_cast<std::size_t>(spec.input));
        for (auto& v : x) v = u(rng);
        std::vector<double> upstream(static_cast<std::size_t>(spec.output));
        for (auto& v : upstream) v = u(rng) < 0.0 ? -1.0 : 1.0;

        auto loss = [&](const std::vector<double>& input) {
            const auto out = net.forward(input);
            double acc = 0.0;
            for (std::size_t k = 0; k < out.size(); ++k) acc += upstream[k] * out[k];
            return acc;
        };

        Mlp::Workspace ws;
        net.forward(x, ws);
        std::vector<double> grad(net.params().size(), 0.0);
        const auto dinput = net.backward(ws, upstream, grad);

        std::uniform_int_distribution<std::size_t> pick(0, net.params().size() - 1);
        for (int c = 0; c < coords_per_point; ++c) {
            const std::size_t k = pick(rng);
            const double keep = net.params()[k];
            net.params()[k] = keep + h;
            const double up = loss(x);
            net.params()[k] = keep - h;
            const double dn = loss(x);
            net.params()[k] = keep;
            worst = std::max(worst, rel(grad[k], (up - dn) / (2.0 * h)));
        }
        for (int i = 0; i < spec.input; ++i) {
            auto shifted = x;
            shifted[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + h;
            const double up = loss(shifted);
            shifted[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - h;
            const double dn = loss(shifted);
            worst = std::max(
                worst, rel(dinput[static_cast<std::size_t>(i)], (up - dn) / (2.0 * h)));
        }
    }
    return worst;
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    if (m_.size() != params.size() || grad.size() != params.size())
        throw config_error("adam: size mismatch");
    ++t_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = b1 * m_[k] + (1.0 - b1) * grad[k];
        v_[k] = b2 * v_[k] + (1.0 - b2) * grad[k] * grad[k];
        params[k] -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps);
    }
}

}  // namespace yieldsim
