#include "specfp/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "specfp/errors.hpp"

namespace specfp {

Tensor Tensor::zeros(std::vector<int> shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(std::vector<int> shape, double value) {
    std::size_t n = 1;
    for (int d : shape)
        n *= static_cast<std::size_t>(d);
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(n, value);
    return t;
}

void TrainConfig::validate() const {
    if (batch_size < 1)
        throw ConfigError("train config: batch_size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("train config: learning_rate must be finite and >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("train config: Adam betas must lie in [0,1)");
    if (!(adam_eps > 0.0))
        throw ConfigError("train config: adam_eps must be > 0");
    if (max_epochs < 1)
        throw ConfigError("train config: max_epochs must be >= 1");
    if (patience < 1)
        throw ConfigError("train config: patience must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw ConfigError("train config: dropout must lie in [0,1)");
    if (hidden < 1)
        throw ConfigError("train config: hidden width must be >= 1");
}

void SpotTable::validate() const {
    std::set<std::string> ids;
    for (const Spot& s : spots) {
        if (s.id.empty())
            throw ValidationError("spot table: empty spot id");
        if (!ids.insert(s.id).second)
            throw ValidationError("spot table: duplicate spot id '" + s.id + "'");
        if (!std::isfinite(s.x) || !std::isfinite(s.y))
            throw ValidationError("spot table: non-finite coordinates for '" + s.id + "'");
    }
}

int SpotTable::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < spots.size(); ++i)
        if (spots[i].id == id)
            return static_cast<int>(i);
    return -1;
}

int conv_out_len(int input_len, int kernel, int stride) {
    if (input_len < kernel)
        throw ShapeError("input length " + std::to_string(input_len) +
                         " is shorter than the convolution kernel; the two-convolution stack "
                         "needs at least " +
                         std::to_string(kMinConvInput) + " inputs");
    return (input_len - kernel) / stride + 1;
}

namespace {

Tensor he_normal(std::vector<int> shape, int fan_in, RngStream& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : t.data)
        v = stddev * rng.normal();
    return t;
}

BatchNormLayer make_bn(int channels) {
    BatchNormLayer bn;
    bn.channels = channels;
    bn.gamma = Tensor::full({channels}, 1.0);
    bn.beta = Tensor::zeros({channels});
    bn.running_mean = Tensor::zeros({channels});
    bn.running_var = Tensor::full({channels}, 1.0);
    return bn;
}

} // namespace

NetworkParams init_params(int input_len, int num_spots, const TrainConfig& cfg, RngStream& rng) {
    cfg.validate();
    if (input_len < 1)
        throw ShapeError("init: input length must be >= 1");
    if (num_spots < 2)
        throw ConfigError("init: the location head needs at least 2 candidate spots");

    NetworkParams p;
    p.input_len = input_len;
    p.num_spots = num_spots;
    p.hidden = cfg.hidden;
    p.dropout = cfg.dropout;
    p.order = cfg.layer_order;
    p.loss = cfg.loss;
    p.arch = input_len >= kMinConvInput ? Arch::conv : Arch::dense;

    int flat = input_len;
    if (p.arch == Arch::conv) {
        p.conv1 = ConvLayer{1, 32, 3, 2, he_normal({32, 1, 3}, 1 * 3, rng), Tensor::zeros({32})};
        p.len1 = conv_out_len(input_len, 3, 2);
        p.bn1 = make_bn(32);
        p.conv2 =
            ConvLayer{32, 64, 3, 2, he_normal({64, 32, 3}, 32 * 3, rng), Tensor::zeros({64})};
        p.len2 = conv_out_len(p.len1, 3, 2);
        p.bn2 = make_bn(64);
        flat = 64 * p.len2;
    }
    p.fc1 = DenseLayer{flat, cfg.hidden, he_normal({cfg.hidden, flat}, flat, rng),
                       Tensor::zeros({cfg.hidden})};
    p.fc2 = DenseLayer{cfg.hidden, num_spots, he_normal({num_spots, cfg.hidden}, cfg.hidden, rng),
                       Tensor::zeros({num_spots})};
    return p;
}

Gradients zero_gradients(const NetworkParams& p) {
    Gradients g;
    if (p.arch == Arch::conv) {
        g.conv1_w = Tensor::zeros(p.conv1.w.shape);
        g.conv1_b = Tensor::zeros(p.conv1.b.shape);
        g.bn1_gamma = Tensor::zeros(p.bn1.gamma.shape);
        g.bn1_beta = Tensor::zeros(p.bn1.beta.shape);
        g.conv2_w = Tensor::zeros(p.conv2.w.shape);
        g.conv2_b = Tensor::zeros(p.conv2.b.shape);
        g.bn2_gamma = Tensor::zeros(p.bn2.gamma.shape);
        g.bn2_beta = Tensor::zeros(p.bn2.beta.shape);
    }
    g.fc1_w = Tensor::zeros(p.fc1.w.shape);
    g.fc1_b = Tensor::zeros(p.fc1.b.shape);
    g.fc2_w = Tensor::zeros(p.fc2.w.shape);
    g.fc2_b = Tensor::zeros(p.fc2.b.shape);
    return g;
}

std::vector<TensorRef> trainable_tensors(NetworkParams& p, Gradients& g) {
    std::vector<TensorRef> refs;
    if (p.arch == Arch::conv) {
        refs.push_back({"conv1.w", &p.conv1.w, &g.conv1_w});
        refs.push_back({"conv1.b", &p.conv1.b, &g.conv1_b});
        refs.push_back({"bn1.gamma", &p.bn1.gamma, &g.bn1_gamma});
        refs.push_back({"bn1.beta", &p.bn1.beta, &g.bn1_beta});
        refs.push_back({"conv2.w", &p.conv2.w, &g.conv2_w});
        refs.push_back({"conv2.b", &p.conv2.b, &g.conv2_b});
        refs.push_back({"bn2.gamma", &p.bn2.gamma, &g.bn2_gamma});
        refs.push_back({"bn2.beta", &p.bn2.beta, &g.bn2_beta});
    }
    refs.push_back({"fc1.w", &p.fc1.w, &g.fc1_w});
    refs.push_back({"fc1.b", &p.fc1.b, &g.fc1_b});
    refs.push_back({"fc2.w", &p.fc2.w, &g.fc2_w});
    refs.push_back({"fc2.b", &p.fc2.b, &g.fc2_b});
    return refs;
}

namespace {

// Flattened [batch][channel][time] indexing.
inline std::size_t idx3(int b, int c, int t, int C, int T) {
    return (static_cast<std::size_t>(b) * C + c) * T + t;
}

void conv_forward(const ConvLayer& cl, const std::vector<double>& in, int B, int Tin, int Tout,
                  std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(B) * cl.out_ch * Tout, 0.0);
    for (int b = 0; b < B; ++b)
        for (int f = 0; f < cl.out_ch; ++f)
            for (int t = 0; t < Tout; ++t) {
                double acc = cl.b.data[static_cast<std::size_t>(f)];
                for (int c = 0; c < cl.in_ch; ++c) {
                    const double* wrow = &cl.w.data[(static_cast<std::size_t>(f) * cl.in_ch + c) *
                                                    cl.kernel];
                    const double* irow = &in[idx3(b, c, t * cl.stride, cl.in_ch, Tin)];
                    for (int k = 0; k < cl.kernel; ++k)
                        acc += wrow[k] * irow[k];
                }
                out[idx3(b, f, t, cl.out_ch, Tout)] = acc;
            }
}

void conv_backward(const ConvLayer& cl, const std::vector<double>& in, int B, int Tin, int Tout,
                   const std::vector<double>& dout, Tensor& dw, Tensor& db,
                   std::vector<double>* din) {
    if (din)
        din->assign(in.size(), 0.0);
    for (int b = 0; b < B; ++b)
        for (int f = 0; f < cl.out_ch; ++f)
            for (int t = 0; t < Tout; ++t) {
                const double g = dout[idx3(b, f, t, cl.out_ch, Tout)];
                db.data[static_cast<std::size_t>(f)] += g;
                for (int c = 0; c < cl.in_ch; ++c) {
                    double* wgrad = &dw.data[(static_cast<std::size_t>(f) * cl.in_ch + c) *
                                             cl.kernel];
                    const double* wrow = &cl.w.data[(static_cast<std::size_t>(f) * cl.in_ch + c) *
                                                    cl.kernel];
                    const std::size_t base = idx3(b, c, t * cl.stride, cl.in_ch, Tin);
                    for (int k = 0; k < cl.kernel; ++k) {
                        wgrad[k] += g * in[base + k];
                        if (din)
                            (*din)[base + k] += g * wrow[k];
                    }
                }
            }
}

void dense_forward(const DenseLayer& dl, const std::vector<double>& in, int B,
                   std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(B) * dl.out, 0.0);
    for (int b = 0; b < B; ++b)
        for (int o = 0; o < dl.out; ++o) {
            double acc = dl.b.data[static_cast<std::size_t>(o)];
            const double* wrow = &dl.w.data[static_cast<std::size_t>(o) * dl.in];
            const double* irow = &in[static_cast<std::size_t>(b) * dl.in];
            for (int i = 0; i < dl.in; ++i)
                acc += wrow[i] * irow[i];
            out[static_cast<std::size_t>(b) * dl.out + o] = acc;
        }
}

void dense_backward(const DenseLayer& dl, const std::vector<double>& in, int B,
                    const std::vector<double>& dout, Tensor& dw, Tensor& db,
                    std::vector<double>& din) {
    din.assign(in.size(), 0.0);
    for (int b = 0; b < B; ++b) {
        const double* irow = &in[static_cast<std::size_t>(b) * dl.in];
        double* drow = &din[static_cast<std::size_t>(b) * dl.in];
        for (int o = 0; o < dl.out; ++o) {
            const double g = dout[static_cast<std::size_t>(b) * dl.out + o];
            db.data[static_cast<std::size_t>(o)] += g;
            double* wgrad = &dw.data[static_cast<std::size_t>(o) * dl.in];
            const double* wrow = &dl.w.data[static_cast<std::size_t>(o) * dl.in];
            for (int i = 0; i < dl.in; ++i) {
                wgrad[i] += g * irow[i];
                drow[i] += g * wrow[i];
            }
        }
    }
}

void relu(const std::vector<double>& in, std::vector<double>& out) {
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

// din = dout gated by the sign of the pre-activation.
void relu_backward(const std::vector<double>& pre, const std::vector<double>& dout,
                   std::vector<double>& din) {
    din.resize(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i)
        din[i] = pre[i] > 0.0 ? dout[i] : 0.0;
}

void bn_forward_train(const BatchNormLayer& bn, const std::vector<double>& in, int B, int T,
                      std::vector<double>& out, std::vector<double>& mean,
                      std::vector<double>& var) {
    const int C = bn.channels;
    const double m = static_cast<double>(B) * T;
    mean.assign(static_cast<std::size_t>(C), 0.0);
    var.assign(static_cast<std::size_t>(C), 0.0);
    out.resize(in.size());
    for (int c = 0; c < C; ++c) {
        double sum = 0.0;
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t)
                sum += in[idx3(b, c, t, C, T)];
        const double mu = sum / m;
        double sq = 0.0;
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t) {
                const double d = in[idx3(b, c, t, C, T)] - mu;
                sq += d * d;
            }
        const double v = sq / m;
        mean[static_cast<std::size_t>(c)] = mu;
        var[static_cast<std::size_t>(c)] = v;
        const double inv = 1.0 / std::sqrt(v + bn.eps);
        const double g = bn.gamma.data[static_cast<std::size_t>(c)];
        const double sh = bn.beta.data[static_cast<std::size_t>(c)];
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t) {
                const std::size_t i = idx3(b, c, t, C, T);
                out[i] = g * (in[i] - mu) * inv + sh;
            }
    }
}

void bn_forward_eval(const BatchNormLayer& bn, const std::vector<double>& in, int B, int T,
                     std::vector<double>& out) {
    const int C = bn.channels;
    out.resize(in.size());
    for (int c = 0; c < C; ++c) {
        const double mu = bn.running_mean.data[static_cast<std::size_t>(c)];
        const double inv = 1.0 / std::sqrt(bn.running_var.data[static_cast<std::size_t>(c)] +
                                           bn.eps);
        const double g = bn.gamma.data[static_cast<std::size_t>(c)];
        const double sh = bn.beta.data[static_cast<std::size_t>(c)];
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t) {
                const std::size_t i = idx3(b, c, t, C, T);
                out[i] = g * (in[i] - mu) * inv + sh;
            }
    }
}

// Batch-statistics path: mean and variance are functions of the input.
void bn_backward(const BatchNormLayer& bn, const std::vector<double>& in,
                 const std::vector<double>& mean, const std::vector<double>& var,
                 const std::vector<double>& dout, int B, int T, std::vector<double>& din,
                 Tensor& dgamma, Tensor& dbeta) {
    const int C = bn.channels;
    const double m = static_cast<double>(B) * T;
    din.resize(in.size());
    for (int c = 0; c < C; ++c) {
        const double mu = mean[static_cast<std::size_t>(c)];
        const double inv = 1.0 / std::sqrt(var[static_cast<std::size_t>(c)] + bn.eps);
        const double g = bn.gamma.data[static_cast<std::size_t>(c)];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t) {
                const std::size_t i = idx3(b, c, t, C, T);
                const double xhat = (in[i] - mu) * inv;
                sum_dy += dout[i];
                sum_dy_xhat += dout[i] * xhat;
            }
        dgamma.data[static_cast<std::size_t>(c)] += sum_dy_xhat;
        dbeta.data[static_cast<std::size_t>(c)] += sum_dy;
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t) {
                const std::size_t i = idx3(b, c, t, C, T);
                const double xhat = (in[i] - mu) * inv;
                din[i] = g * inv * (dout[i] - sum_dy / m - xhat * sum_dy_xhat / m);
            }
    }
}

struct Cache {
    int B = 0;
    std::vector<double> x; // B x input_len
    // conv blocks (conv arch only)
    std::vector<double> a1, s1, y1; // conv out, after first op, block output
    std::vector<double> a2, s2, y2;
    std::vector<double> mean1, var1, mean2, var2;
    // dense head
    std::vector<double> h1, rh, dmask, dval;
    std::vector<double> z, w;   // logits, softmax
    std::vector<double> px, py; // predicted coordinates
};

void check_spots(const NetworkParams& p, const SpotTable& spots) {
    if (static_cast<int>(spots.size()) != p.num_spots)
        throw ShapeError("spot table has " + std::to_string(spots.size()) +
                         " entries but the head was built for " + std::to_string(p.num_spots));
}

void forward_batch(const NetworkParams& p, const SpotTable& spots, std::vector<double> inputs,
                   int B, RunMode mode, double dropout_rate, RngStream* rng, Cache& c) {
    check_spots(p, spots);
    c.B = B;
    c.x = std::move(inputs);

    const std::vector<double>* flat = &c.x;
    if (p.arch == Arch::conv) {
        if (p.input_len < kMinConvInput)
            throw ShapeError("input length " + std::to_string(p.input_len) +
                             " is below the two-convolution minimum of " +
                             std::to_string(kMinConvInput));
        conv_forward(p.conv1, c.x, B, p.input_len, p.len1, c.a1);
        if (p.order == LayerOrder::relu_then_bn) {
            relu(c.a1, c.s1);
            if (mode == RunMode::train)
                bn_forward_train(p.bn1, c.s1, B, p.len1, c.y1, c.mean1, c.var1);
            else
                bn_forward_eval(p.bn1, c.s1, B, p.len1, c.y1);
        } else {
            if (mode == RunMode::train)
                bn_forward_train(p.bn1, c.a1, B, p.len1, c.s1, c.mean1, c.var1);
            else
                bn_forward_eval(p.bn1, c.a1, B, p.len1, c.s1);
            relu(c.s1, c.y1);
        }
        conv_forward(p.conv2, c.y1, B, p.len1, p.len2, c.a2);
        if (p.order == LayerOrder::relu_then_bn) {
            relu(c.a2, c.s2);
            if (mode == RunMode::train)
                bn_forward_train(p.bn2, c.s2, B, p.len2, c.y2, c.mean2, c.var2);
            else
                bn_forward_eval(p.bn2, c.s2, B, p.len2, c.y2);
        } else {
            if (mode == RunMode::train)
                bn_forward_train(p.bn2, c.a2, B, p.len2, c.s2, c.mean2, c.var2);
            else
                bn_forward_eval(p.bn2, c.a2, B, p.len2, c.s2);
            relu(c.s2, c.y2);
        }
        flat = &c.y2;
    }

    dense_forward(p.fc1, *flat, B, c.h1);
    relu(c.h1, c.rh);

    const bool use_dropout = mode == RunMode::train && dropout_rate > 0.0;
    if (use_dropout) {
        if (!rng)
            throw ConfigError("train-mode forward with dropout needs an rng stream");
        c.dmask.resize(c.rh.size());
        const double keep_scale = 1.0 / (1.0 - dropout_rate);
        for (double& mask : c.dmask)
            mask = rng->next_double() < dropout_rate ? 0.0 : keep_scale;
        c.dval.resize(c.rh.size());
        for (std::size_t i = 0; i < c.rh.size(); ++i)
            c.dval[i] = c.rh[i] * c.dmask[i];
    } else {
        c.dmask.clear();
        c.dval = c.rh;
    }

    dense_forward(p.fc2, c.dval, B, c.z);

    const int K = p.num_spots;
    c.w.resize(c.z.size());
    c.px.assign(static_cast<std::size_t>(B), 0.0);
    c.py.assign(static_cast<std::size_t>(B), 0.0);
    for (int b = 0; b < B; ++b) {
        const double* zrow = &c.z[static_cast<std::size_t>(b) * K];
        double* wrow = &c.w[static_cast<std::size_t>(b) * K];
        double zmax = zrow[0];
        for (int k = 1; k < K; ++k)
            zmax = std::max(zmax, zrow[k]);
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            wrow[k] = std::exp(zrow[k] - zmax);
            sum += wrow[k];
        }
        for (int k = 0; k < K; ++k) {
            wrow[k] /= sum;
            c.px[static_cast<std::size_t>(b)] += wrow[k] * spots.spots[static_cast<std::size_t>(k)].x;
            c.py[static_cast<std::size_t>(b)] += wrow[k] * spots.spots[static_cast<std::size_t>(k)].y;
        }
    }
}

std::vector<double> gather_inputs(const NetworkParams& p, std::span<const TrainSample> batch) {
    if (batch.empty())
        throw ConfigError("empty batch");
    std::vector<double> inputs;
    inputs.reserve(batch.size() * static_cast<std::size_t>(p.input_len));
    for (const TrainSample& s : batch) {
        if (static_cast<int>(s.input.size()) != p.input_len)
            throw ShapeError("sample input length " + std::to_string(s.input.size()) +
                             " differs from the network input length " +
                             std::to_string(p.input_len));
        inputs.insert(inputs.end(), s.input.begin(), s.input.end());
    }
    return inputs;
}

double loss_from_cache(const NetworkParams& p, const Cache& c,
                       std::span<const TrainSample> batch) {
    const int B = c.B;
    const int K = p.num_spots;
    double loss = 0.0;
    if (p.loss == LossKind::squared_error) {
        for (int b = 0; b < B; ++b) {
            const double dx = c.px[static_cast<std::size_t>(b)] - batch[static_cast<std::size_t>(b)].x;
            const double dy = c.py[static_cast<std::size_t>(b)] - batch[static_cast<std::size_t>(b)].y;
            loss += dx * dx + dy * dy;
        }
    } else {
        for (int b = 0; b < B; ++b) {
            const int idx = batch[static_cast<std::size_t>(b)].spot_index;
            if (idx < 0 || idx >= K)
                throw ConfigError("cross-entropy loss needs a valid spot index per sample");
            // log(softmax) from the logits, numerically stable.
            const double* zrow = &c.z[static_cast<std::size_t>(b) * K];
            double zmax = zrow[0];
            for (int k = 1; k < K; ++k)
                zmax = std::max(zmax, zrow[k]);
            double sum = 0.0;
            for (int k = 0; k < K; ++k)
                sum += std::exp(zrow[k] - zmax);
            loss -= zrow[idx] - zmax - std::log(sum);
        }
    }
    return loss / static_cast<double>(B);
}

double run_loss(const NetworkParams& p, const SpotTable& spots, std::span<const TrainSample> batch,
                RunMode bn_mode, double dropout_rate, RngStream* rng) {
    Cache c;
    forward_batch(p, spots, gather_inputs(p, batch), static_cast<int>(batch.size()), bn_mode,
                  dropout_rate, rng, c);
    return loss_from_cache(p, c, batch);
}

} // namespace

ForwardResult forward(const NetworkParams& p, const SpotTable& spots,
                      const std::vector<double>& input, RunMode mode, RngStream& rng) {
    if (static_cast<int>(input.size()) != p.input_len)
        throw ShapeError("input length " + std::to_string(input.size()) +
                         " differs from the network input length " + std::to_string(p.input_len));
    Cache c;
    forward_batch(p, spots, input, 1, mode, mode == RunMode::train ? p.dropout : 0.0, &rng, c);
    ForwardResult res;
    res.weights = c.w;
    res.x = c.px[0];
    res.y = c.py[0];
    res.top_spot = static_cast<int>(std::max_element(res.weights.begin(), res.weights.end()) -
                                    res.weights.begin());
    return res;
}

LossGrad loss_and_grad(const NetworkParams& p, const SpotTable& spots,
                       std::span<const TrainSample> batch, RngStream& rng) {
    const int B = static_cast<int>(batch.size());
    const int K = p.num_spots;
    Cache c;
    forward_batch(p, spots, gather_inputs(p, batch), B, RunMode::train, p.dropout, &rng, c);

    LossGrad out;
    out.loss = loss_from_cache(p, c, batch);
    out.grads = zero_gradients(p);
    if (p.arch == Arch::conv) {
        out.bn_stats.mean1 = c.mean1;
        out.bn_stats.var1 = c.var1;
        out.bn_stats.mean2 = c.mean2;
        out.bn_stats.var2 = c.var2;
    }

    // Head: loss -> logits.
    std::vector<double> dz(c.z.size(), 0.0);
    if (p.loss == LossKind::squared_error) {
        for (int b = 0; b < B; ++b) {
            const double gx =
                2.0 / B * (c.px[static_cast<std::size_t>(b)] - batch[static_cast<std::size_t>(b)].x);
            const double gy =
                2.0 / B * (c.py[static_cast<std::size_t>(b)] - batch[static_cast<std::size_t>(b)].y);
            const double* wrow = &c.w[static_cast<std::size_t>(b) * K];
            double* dzrow = &dz[static_cast<std::size_t>(b) * K];
            double inner = 0.0; // sum_j dL/dw_j * w_j for the softmax Jacobian
            std::vector<double> dw(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k) {
                dw[static_cast<std::size_t>(k)] = gx * spots.spots[static_cast<std::size_t>(k)].x +
                                                  gy * spots.spots[static_cast<std::size_t>(k)].y;
                inner += dw[static_cast<std::size_t>(k)] * wrow[k];
            }
            for (int k = 0; k < K; ++k)
                dzrow[k] = wrow[k] * (dw[static_cast<std::size_t>(k)] - inner);
        }
    } else {
        for (int b = 0; b < B; ++b) {
            const int idx = batch[static_cast<std::size_t>(b)].spot_index;
            const double* wrow = &c.w[static_cast<std::size_t>(b) * K];
            double* dzrow = &dz[static_cast<std::size_t>(b) * K];
            for (int k = 0; k < K; ++k)
                dzrow[k] = (wrow[k] - (k == idx ? 1.0 : 0.0)) / B;
        }
    }

    std::vector<double> d_dval;
    dense_backward(p.fc2, c.dval, B, dz, out.grads.fc2_w, out.grads.fc2_b, d_dval);

    std::vector<double> d_rh;
    if (!c.dmask.empty()) {
        d_rh.resize(d_dval.size());
        for (std::size_t i = 0; i < d_dval.size(); ++i)
            d_rh[i] = d_dval[i] * c.dmask[i];
    } else {
        d_rh = std::move(d_dval);
    }

    std::vector<double> d_h1;
    relu_backward(c.h1, d_rh, d_h1);

    const std::vector<double>& flat = p.arch == Arch::conv ? c.y2 : c.x;
    std::vector<double> d_flat;
    dense_backward(p.fc1, flat, B, d_h1, out.grads.fc1_w, out.grads.fc1_b, d_flat);

    if (p.arch == Arch::conv) {
        std::vector<double> d_y1, tmp;
        {
            std::vector<double> d_a2;
            if (p.order == LayerOrder::relu_then_bn) {
                bn_backward(p.bn2, c.s2, c.mean2, c.var2, d_flat, B, p.len2, tmp,
                            out.grads.bn2_gamma, out.grads.bn2_beta);
                relu_backward(c.a2, tmp, d_a2);
            } else {
                relu_backward(c.s2, d_flat, tmp);
                bn_backward(p.bn2, c.a2, c.mean2, c.var2, tmp, B, p.len2, d_a2,
                            out.grads.bn2_gamma, out.grads.bn2_beta);
            }
            conv_backward(p.conv2, c.y1, B, p.len1, p.len2, d_a2, out.grads.conv2_w,
                          out.grads.conv2_b, &d_y1);
        }
        std::vector<double> d_a1;
        if (p.order == LayerOrder::relu_then_bn) {
            bn_backward(p.bn1, c.s1, c.mean1, c.var1, d_y1, B, p.len1, tmp, out.grads.bn1_gamma,
                        out.grads.bn1_beta);
            relu_backward(c.a1, tmp, d_a1);
        } else {
            relu_backward(c.s1, d_y1, tmp);
            bn_backward(p.bn1, c.a1, c.mean1, c.var1, tmp, B, p.len1, d_a1, out.grads.bn1_gamma,
                        out.grads.bn1_beta);
        }
        conv_backward(p.conv1, c.x, B, p.input_len, p.len1, d_a1, out.grads.conv1_w,
                      out.grads.conv1_b, nullptr);
    }

    return out;
}

double training_loss(const NetworkParams& p, const SpotTable& spots,
                     std::span<const TrainSample> batch, RngStream& rng) {
    return run_loss(p, spots, batch, RunMode::train, p.dropout, &rng);
}

double validation_loss(const NetworkParams& p, const SpotTable& spots,
                       std::span<const TrainSample> batch) {
    return run_loss(p, spots, batch, RunMode::train, 0.0, nullptr);
}

double eval_loss(const NetworkParams& p, const SpotTable& spots,
                 std::span<const TrainSample> batch) {
    return run_loss(p, spots, batch, RunMode::eval, 0.0, nullptr);
}

void update_running_stats(NetworkParams& p, const BnBatchStats& stats) {
    if (p.arch != Arch::conv)
        return;
    auto blend = [](Tensor& running, const std::vector<double>& batch, double momentum) {
        for (std::size_t i = 0; i < running.data.size(); ++i)
            running.data[i] = (1.0 - momentum) * running.data[i] + momentum * batch[i];
    };
    blend(p.bn1.running_mean, stats.mean1, p.bn1.momentum);
    blend(p.bn1.running_var, stats.var1, p.bn1.momentum);
    blend(p.bn2.running_mean, stats.mean2, p.bn2.momentum);
    blend(p.bn2.running_var, stats.var2, p.bn2.momentum);
}

TrainResult train(const TrainConfig& cfg, std::span<const TrainSample> train_set,
                  std::span<const TrainSample> val_set, const SpotTable& spots) {
    cfg.validate();
    spots.validate();
    if (train_set.empty() || val_set.empty())
        throw ConfigError("train: training and validation sets must be non-empty");
    const int L = static_cast<int>(train_set[0].input.size());
    for (const TrainSample& s : train_set)
        if (static_cast<int>(s.input.size()) != L)
            throw ShapeError("train: inconsistent input lengths in the training set");
    for (const TrainSample& s : val_set)
        if (static_cast<int>(s.input.size()) != L)
            throw ShapeError("train: inconsistent input lengths in the validation set");

    const RngStream root(cfg.seed);
    RngStream init_rng = root.fork("init");
    NetworkParams params = init_params(L, static_cast<int>(spots.size()), cfg, init_rng);

    Gradients adam_m = zero_gradients(params);
    Gradients adam_v = zero_gradients(params);
    long step = 0;

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    NetworkParams best = params;
    int best_epoch = 0;
    int stall = 0;

    const RngStream shuffle_root = root.fork("shuffle");
    const RngStream dropout_root = root.fork("dropout");

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        RngStream shuffle_rng = shuffle_root.fork(static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::vector<TrainSample> batch;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.assign(end - start, TrainSample{});
            for (std::size_t i = start; i < end; ++i)
                batch[i - start] = train_set[order[i]];

            RngStream step_rng = dropout_root.fork(static_cast<std::uint64_t>(step));
            LossGrad lg = loss_and_grad(params, spots, batch, step_rng);
            if (!std::isfinite(lg.loss))
                throw TrainingError(epoch, "training loss is not finite");
            epoch_loss += lg.loss * static_cast<double>(batch.size());

            update_running_stats(params, lg.bn_stats);

            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            Gradients& grads = lg.grads;
            auto params_refs = trainable_tensors(params, grads);
            auto m_refs = trainable_tensors(params, adam_m);
            auto v_refs = trainable_tensors(params, adam_v);
            for (std::size_t ti = 0; ti < params_refs.size(); ++ti) {
                Tensor& theta = *params_refs[ti].param;
                Tensor& g = *params_refs[ti].grad;
                Tensor& m = *m_refs[ti].grad;
                Tensor& v = *v_refs[ti].grad;
                for (std::size_t i = 0; i < theta.data.size(); ++i) {
                    m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
                    v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
                    theta.data[i] -= cfg.learning_rate * (m.data[i] / bc1) /
                                     (std::sqrt(v.data[i] / bc2) + cfg.adam_eps);
                }
            }
        }
        epoch_loss /= static_cast<double>(train_set.size());

        const double val = validation_loss(params, spots, val_set);
        if (!std::isfinite(val))
            throw TrainingError(epoch, "validation loss is not finite");
        result.history.push_back(EpochStats{epoch, epoch_loss, val});

        if (val < result.best_val_loss) {
            result.best_val_loss = val;
            best = params;
            best_epoch = epoch;
            stall = 0;
        } else if (++stall >= cfg.patience) {
            break;
        }
    }

    result.params = std::move(best);
    result.best_epoch = best_epoch;
    return result;
}

} // namespace specfp
