#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fano/search.hpp"

namespace fano {

/// f(x) = w2 . leaky(W1 (x / scale) + b1) + b2, one hidden layer.
/// Parameters live in one flat vector: W1 (hidden x inputs, row-major), b1, w2, b2.
class ValueNetwork {
public:
    ValueNetwork() = default;
    ValueNetwork(std::size_t inputs, std::size_t hidden, double slope, double input_scale);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
    void init_uniform(std::mt19937_64& rng, bool zero_output_layer = false);

    /// x is already encoded (divided by the input scale).
    double forward(std::span<const double> x) const;
    double forward(const WeightVector& p) const;

    /// f(x) and df/dtheta at x (grad resized to parameter_count()).
    double gradient(std::span<const double> x, std::vector<double>& grad) const;

    std::vector<double> encode(const WeightVector& p) const;

    std::size_t inputs() const { return inputs_; }
    std::size_t hidden() const { return hidden_; }
    double slope() const { return slope_; }
    double input_scale() const { return scale_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    /// FNV-1a over the parameter bytes.
    std::uint64_t fingerprint() const;

private:
    std::size_t inputs_ = 0;
    std::size_t hidden_ = 0;
    double slope_ = 0.01;
    double scale_ = 1.0;
    std::vector<double> params_;
};

class Adam {
public:
    explicit Adam(std::size_t n, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);
    void step(std::vector<double>& params, std::span<const double> grad);
    std::uint64_t steps() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<double> m_, v_;
    std::uint64_t t_ = 0;
};

/// r_reward for a reward point, -sqrt(s_reward) otherwise.
double reward_value(bool reward, std::uint64_t s_reward, double r_reward);

struct TdSample {
    WeightVector point;
    double reward;
};

/// One TD step. Targets t(n) = r(n) + gamma f_target(n) are constants;
/// L = (1/2|N|) sum (f(p) - t(n))^2. Applies one optimizer step to `net` and
/// returns the loss before the step. `target` is not modified.
double td_update(ValueNetwork& net, const ValueNetwork& target, const WeightVector& p,
                 std::span<const TdSample> samples, double gamma, Adam& optimizer);

/// Loss and gradient of the TD objective above, without stepping.
double td_loss(const ValueNetwork& net, const ValueNetwork& target, const WeightVector& p,
               std::span<const TdSample> samples, double gamma, std::vector<double>* grad);

/// f(n) + sigma * N(0, 1) drawn from `rng`.
double priority_value(const ValueNetwork& net, const WeightVector& n, double sigma,
                      std::mt19937_64& rng);

enum class SiblingReward : std::uint8_t {
    reset_first,  // reset s_reward before computing rewards in the batch
    previous,     // non-reward siblings of a reward use the pre-reset s_reward
};

struct DynamicOptions {
    std::uint64_t s_max = 0;
    double gamma = 0.2;
    double sigma = 2.0;
    double r_reward = 1.0;
    double learning_rate = 1e-3;
    std::size_t hidden = 40;
    double slope = 0.01;
    double input_scale = 100.0;
    std::uint64_t rng_seed = 0;
    bool zero_output_init = false;
    bool frozen = false;  // skip training (network stays at its initial state)
    SiblingReward sibling_reward = SiblingReward::reset_first;
    std::int64_t fano_index = 1;
    std::string run_id;
    RecordSink on_record;
    ExpandHook on_expand;
};

struct Telemetry {
    std::uint64_t step;
    double loss;
    std::uint64_t s_reward;
    std::size_t queue_size;
};

using TelemetrySink = std::function<void(const Telemetry&)>;

/// The learned-heuristic search. All randomness (initialisation and priority noise)
/// comes from one mt19937_64 seeded with rng_seed.
SearchResult run_dynamic(const Oracle& oracle, const std::vector<WeightVector>& seeds,
                         const DynamicOptions& options, const TelemetrySink& telemetry = {},
                         ValueNetwork* final_network = nullptr);

}  // namespace fano
