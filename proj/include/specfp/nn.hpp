#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specfp/rng.hpp"
#include "specfp/scene.hpp"

namespace specfp {

/// Dense row-major tensor of doubles.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, double value);
    std::size_t size() const { return data.size(); }
};

/// 1D convolution, valid padding. Weights [out_ch][in_ch][kernel].
struct ConvLayer {
    int in_ch = 0, out_ch = 0, kernel = 0, stride = 0;
    Tensor w, b;
};

/// Per-channel batch normalization over (batch x time).
struct BatchNormLayer {
    int channels = 0;
    double eps = 1e-5;
    double momentum = 0.1; // running := (1-momentum)*running + momentum*batch
    Tensor gamma, beta, running_mean, running_var;
};

/// Fully connected layer. Weights [out][in].
struct DenseLayer {
    int in = 0, out = 0;
    Tensor w, b;
};

/// conv: two conv/ReLU/BN blocks then two dense layers. dense: the fallback
/// for inputs too short for two stride-2 convolutions (length < 7).
enum class Arch { conv, dense };

enum class LayerOrder { relu_then_bn, bn_then_relu };

/// squared_error regresses the weighted spot coordinates; cross_entropy
/// classifies the spot id through the same softmax head.
enum class LossKind { squared_error, cross_entropy };

struct TrainConfig {
    int batch_size = 32;
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int max_epochs = 300;
    int patience = 20;
    std::uint64_t seed = 0;
    double dropout = 0.5;
    int hidden = 128;
    LayerOrder layer_order = LayerOrder::relu_then_bn;
    LossKind loss = LossKind::squared_error;

    void validate() const;
};

/// The ordered candidate locations the softmax head weighs.
struct SpotTable {
    std::vector<Spot> spots;

    void validate() const;
    int index_of(const std::string& id) const; // -1 when absent
    std::size_t size() const { return spots.size(); }
};

struct NetworkParams {
    Arch arch = Arch::conv;
    int input_len = 0;
    int num_spots = 0;
    int hidden = 0;
    double dropout = 0.5;
    LayerOrder order = LayerOrder::relu_then_bn;
    LossKind loss = LossKind::squared_error;
    int len1 = 0, len2 = 0; // conv block output lengths (conv arch only)

    ConvLayer conv1, conv2;
    BatchNormLayer bn1, bn2;
    DenseLayer fc1, fc2;
};

/// Output length of a valid 1D convolution; throws ShapeError when the input
/// is shorter than the kernel, naming the minimum input length of the stack.
int conv_out_len(int input_len, int kernel, int stride);

/// Minimum input length the two-convolution stack accepts.
inline constexpr int kMinConvInput = 7;

/// He-initialized parameters. Falls back to the dense architecture when
/// input_len < kMinConvInput. Requires num_spots >= 2.
NetworkParams init_params(int input_len, int num_spots, const TrainConfig& cfg, RngStream& rng);

enum class RunMode { train, eval };

struct ForwardResult {
    std::vector<double> weights; // softmax over spots, sums to 1
    double x = 0.0;
    double y = 0.0;
    int top_spot = 0; // argmax weight
};

/// Single-sample forward pass. Train mode uses the sample's own batch
/// statistics and draws a dropout mask from `rng`; eval mode uses running
/// statistics and no dropout (deterministic).
ForwardResult forward(const NetworkParams& p, const SpotTable& spots,
                      const std::vector<double>& input, RunMode mode, RngStream& rng);

/// One labeled training sample: assembled input plus target coordinates.
/// spot_index is required only by the cross-entropy loss.
struct TrainSample {
    std::vector<double> input;
    double x = 0.0;
    double y = 0.0;
    int spot_index = -1;
};

/// Gradients for every trainable tensor (batch-norm running stats excluded).
struct Gradients {
    Tensor conv1_w, conv1_b, bn1_gamma, bn1_beta;
    Tensor conv2_w, conv2_b, bn2_gamma, bn2_beta;
    Tensor fc1_w, fc1_b, fc2_w, fc2_b;
};

Gradients zero_gradients(const NetworkParams& p);

struct TensorRef {
    std::string name;
    Tensor* param = nullptr;
    Tensor* grad = nullptr;
};

/// Trainable tensors in canonical update order, paired with their gradients.
std::vector<TensorRef> trainable_tensors(NetworkParams& p, Gradients& g);

/// Batch statistics observed by a train-mode forward pass, for running-stat
/// updates. Empty for the dense architecture.
struct BnBatchStats {
    std::vector<double> mean1, var1, mean2, var2;
};

struct LossGrad {
    double loss = 0.0;
    Gradients grads;
    BnBatchStats bn_stats;
};

/// Mean loss over the batch and its gradient w.r.t. every trainable tensor,
/// via reverse-mode differentiation through the whole stack (batch-statistics
/// path for batch norm). Dropout masks are drawn from `rng`.
LossGrad loss_and_grad(const NetworkParams& p, const SpotTable& spots,
                       std::span<const TrainSample> batch, RngStream& rng);

/// Loss along the exact same path as loss_and_grad (train-mode batch norm),
/// without gradients. This is what central finite differences must match.
double training_loss(const NetworkParams& p, const SpotTable& spots,
                     std::span<const TrainSample> batch, RngStream& rng);

/// Loss with train-mode batch norm over the whole set but dropout disabled:
/// the early-stopping criterion. Depends only on trainable parameters, so a
/// zero learning rate yields a flat history.
double validation_loss(const NetworkParams& p, const SpotTable& spots,
                       std::span<const TrainSample> batch);

/// Loss with eval-mode batch norm (running stats, no dropout).
double eval_loss(const NetworkParams& p, const SpotTable& spots,
                 std::span<const TrainSample> batch);

void update_running_stats(NetworkParams& p, const BnBatchStats& stats);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    NetworkParams params; // best-validation snapshot
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_val_loss = 0.0;
};

/// Adam training with shuffled mini-batches and early stopping on the
/// validation loss. Bit-reproducible for a fixed config.
TrainResult train(const TrainConfig& cfg, std::span<const TrainSample> train_set,
                  std::span<const TrainSample> val_set, const SpotTable& spots);

} // namespace specfp
