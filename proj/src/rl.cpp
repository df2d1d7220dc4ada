#include "fano/rl.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace fano {

ValueNetwork::ValueNetwork(std::size_t inputs, std::size_t hidden, double slope,
                           double input_scale)
    : inputs_(inputs), hidden_(hidden), slope_(slope), scale_(input_scale),
      params_(hidden * inputs + hidden + hidden + 1, 0.0)
{
    if (inputs == 0 || hidden == 0)
        throw std::invalid_argument("ValueNetwork: empty layer");
    if (!(input_scale > 0))
        throw std::invalid_argument("ValueNetwork: input scale must be positive");
}

void ValueNetwork::init_uniform(std::mt19937_64& rng, bool zero_output_layer)
{
    const double b1 = 1.0 / std::sqrt(static_cast<double>(inputs_));
    const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    std::uniform_real_distribution<double> first(-b1, b1), second(-b2, b2);
    const std::size_t n1 = hidden_ * inputs_ + hidden_;
    for (std::size_t i = 0; i < n1; ++i)
        params_[i] = first(rng);
    for (std::size_t i = n1; i < params_.size(); ++i)
        params_[i] = zero_output_layer ? 0.0 : second(rng);
}

std::vector<double> ValueNetwork::encode(const WeightVector& p) const
{
    if (p.size() != inputs_)
        throw std::invalid_argument("ValueNetwork: input has " + std::to_string(p.size()) +
                                    " coordinates, expected " + std::to_string(inputs_));
    std::vector<double> x(inputs_);
    for (std::size_t i = 0; i < inputs_; ++i)
        x[i] = static_cast<double>(p[i]) / scale_;
    return x;
}

double ValueNetwork::forward(std::span<const double> x) const
{
    const double* W1 = params_.data();
    const double* b1 = W1 + hidden_ * inputs_;
    const double* w2 = b1 + hidden_;
    double y = w2[hidden_];
    for (std::size_t h = 0; h < hidden_; ++h) {
        double z = b1[h];
        for (std::size_t i = 0; i < inputs_; ++i)
            z += W1[h * inputs_ + i] * x[i];
        y += w2[h] * (z > 0 ? z : slope_ * z);
    }
    return y;
}

double ValueNetwork::forward(const WeightVector& p) const
{
    return forward(encode(p));
}

double ValueNetwork::gradient(std::span<const double> x, std::vector<double>& grad) const
{
    grad.assign(params_.size(), 0.0);
    const double* W1 = params_.data();
    const double* b1 = W1 + hidden_ * inputs_;
    const double* w2 = b1 + hidden_;
    double* gW1 = grad.data();
    double* gb1 = gW1 + hidden_ * inputs_;
    double* gw2 = gb1 + hidden_;
    double y = w2[hidden_];
    gw2[hidden_] = 1.0;
    for (std::size_t h = 0; h < hidden_; ++h) {
        double z = b1[h];
        for (std::size_t i = 0; i < inputs_; ++i)
            z += W1[h * inputs_ + i] * x[i];
        const double a = z > 0 ? z : slope_ * z;
        const double da = z > 0 ? 1.0 : slope_;
        y += w2[h] * a;
        gw2[h] = a;
        gb1[h] = w2[h] * da;
        for (std::size_t i = 0; i < inputs_; ++i)
            gW1[h * inputs_ + i] = gb1[h] * x[i];
    }
    return y;
}

std::uint64_t ValueNetwork::fingerprint() const
{
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : params_) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (auto b : bytes) {
            h ^= b;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0)
{
}

void Adam::step(std::vector<double>& params, std::span<const double> grad)
{
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

double reward_value(bool reward, std::uint64_t s_reward, double r_reward)
{
    return reward ? r_reward : -std::sqrt(static_cast<double>(s_reward));
}

double td_loss(const ValueNetwork& net, const ValueNetwork& target, const WeightVector& p,
               std::span<const TdSample> samples, double gamma, std::vector<double>* grad)
{
    if (samples.empty()) {
        if (grad)
            grad->assign(net.parameter_count(), 0.0);
        return 0.0;
    }
    const auto x = net.encode(p);
    const double fp = grad ? net.gradient(x, *grad) : net.forward(x);
    double loss = 0.0, mean_delta = 0.0;
    for (const auto& s : samples) {
        const double t = s.reward + gamma * target.forward(s.point);
        const double delta = fp - t;
        loss += delta * delta;
        mean_delta += delta;
    }
    const double n = static_cast<double>(samples.size());
    loss /= 2.0 * n;
    mean_delta /= n;
    // dL/dtheta = mean(delta) * df(p)/dtheta; the targets carry no gradient
    if (grad)
        for (auto& g : *grad)
            g *= mean_delta;
    return loss;
}

double td_update(ValueNetwork& net, const ValueNetwork& target, const WeightVector& p,
                 std::span<const TdSample> samples, double gamma, Adam& optimizer)
{
    thread_local std::vector<double> grad;
    const double loss = td_loss(net, target, p, samples, gamma, &grad);
    if (!samples.empty())
        optimizer.step(net.parameters(), grad);
    return loss;
}

double priority_value(const ValueNetwork& net, const WeightVector& n, double sigma,
                      std::mt19937_64& rng)
{
    std::normal_distribution<double> noise(0.0, 1.0);
    const double eps = noise(rng);
    return net.forward(n) + sigma * eps;
}

SearchResult run_dynamic(const Oracle& oracle, const std::vector<WeightVector>& seeds,
                         const DynamicOptions& options, const TelemetrySink& telemetry,
                         ValueNetwork* final_network)
{
    SearchResult result;
    if (seeds.empty())
        throw std::invalid_argument("run_dynamic: no seeds");
    const std::size_t m = seeds.front().size();

    std::mt19937_64 rng(options.rng_seed);
    ValueNetwork net(m, options.hidden, options.slope, options.input_scale);
    net.init_uniform(rng, options.zero_output_init);
    ValueNetwork target = net;
    Adam adam(net.parameter_count(), options.learning_rate);

    PointSet enqueued(seeds.begin(), seeds.end());
    PriorityQueue queue;
    std::uint64_t s = 0, s_reward = 0;
    std::size_t next_seed = 0;
    std::vector<TdSample> batch;
    std::vector<Verdict> verdicts;

    while (s < options.s_max) {
        WeightVector p;
        if (next_seed < seeds.size()) {
            p = seeds[next_seed++];
        } else if (!queue.empty()) {
            p = queue.pop().point;
        } else {
            result.exhausted = true;
            break;
        }
        ++s;
        ++s_reward;
        if (options.on_expand)
            options.on_expand(s, p);

        batch.clear();
        verdicts.clear();
        bool any_reward = false;
        for (const auto& n : neighbors(p)) {
            if (!enqueued.insert(n).second)
                continue;
            const auto v = oracle(n);
            any_reward = any_reward || is_reward(v);
            batch.push_back({n, 0.0});
            verdicts.push_back(v);
        }
        const auto before = s_reward;
        if (any_reward)
            s_reward = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const bool r = is_reward(verdicts[i]);
            const auto count =
                options.sibling_reward == SiblingReward::previous ? before : s_reward;
            batch[i].reward = reward_value(r, count, options.r_reward);
        }

        double loss = 0.0;
        if (!options.frozen) {
            target = net;
            loss = td_update(net, target, p, batch, options.gamma, adam);
        }

        for (std::size_t i = 0; i < batch.size(); ++i) {
            const double v = priority_value(net, batch[i].point, options.sigma, rng);
            queue.push(batch[i].point, v);
            if (is_reward(verdicts[i])) {
                SearchRecord rec;
                rec.weights = batch[i].point;
                rec.degree = rec.weights.sum() - options.fano_index;
                rec.verdict = verdicts[i];
                rec.step = s;
                rec.priority = v;
                rec.run_id = options.run_id;
                rec.engine = "dynamic";
                result.records.push_back(rec);
                if (options.on_record)
                    options.on_record(result.records.back());
            }
        }
        if (telemetry)
            telemetry({s, loss, s_reward, queue.size()});
    }
    result.steps = s;
    if (final_network)
        *final_network = net;
    return result;
}

}  // namespace fano
