// Copyright 2026 The topodecode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOPODECODE_NN_H
#define TOPODECODE_NN_H

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "topodecode/codes.h"
#include "topodecode/dataset.h"

namespace topodecode {

/// Batch-first dense tensor of doubles.
struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<size_t> shape, double fill = 0.0);
    size_t numel() const {
        return data.size();
    }
    size_t dim(size_t i) const {
        return shape.at(i);
    }
    double &operator[](size_t i) {
        return data[i];
    }
    double operator[](size_t i) const {
        return data[i];
    }
};

size_t shape_numel(const std::vector<size_t> &shape);

enum class LayerKind { dense, conv2d, relu, sigmoid, batchnorm, flatten, split, concat };

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    size_t in = 0, out = 0;                 // dense
    size_t kh = 0, kw = 0;                  // conv2d
    size_t in_ch = 0, out_ch = 0;           // conv2d
    size_t stride_v = 1, stride_h = 1;      // conv2d
    bool same_padding = false;              // conv2d; valid when false
    size_t dim = 0;                         // batchnorm features or channels

    static LayerSpec Dense(size_t in, size_t out);
    static LayerSpec Conv2D(size_t kh, size_t kw, size_t in_ch, size_t out_ch, size_t stride_v = 1,
                            size_t stride_h = 1, bool same_padding = false);
    static LayerSpec ReLU();
    static LayerSpec Sigmoid();
    static LayerSpec BatchNorm(size_t dim);
    static LayerSpec Flatten();
    // [B, 2, H, W] -> [2B, 1, H, W]: both grids go through the same filters.
    static LayerSpec Split();
    // [2B, F] -> [B, 2F]: undoes Split after the shared layers.
    static LayerSpec Concat();
};

nlohmann::json spec_to_json(const LayerSpec &s);
LayerSpec spec_from_json(const nlohmann::json &j);

class Network {
   public:
    Network() = default;
    Network(std::vector<LayerSpec> specs, uint64_t seed);

    const std::vector<LayerSpec> &specs() const {
        return specs_;
    }
    // Trainable tensors of layer i (weights then bias, or gamma then beta).
    std::vector<Tensor> &params(size_t layer) {
        return params_[layer];
    }
    const std::vector<Tensor> &params(size_t layer) const {
        return params_[layer];
    }
    size_t num_layers() const {
        return specs_.size();
    }
    size_t num_parameters() const;
    uint64_t seed() const {
        return seed_;
    }

    /// Inference: batchnorm uses running statistics.
    Tensor forward(const Tensor &input) const;

    struct Gradients {
        std::vector<std::vector<Tensor>> params;
        double loss = 0;
    };
    /// Squared-L2 loss averaged over the batch, and its parameter gradients.
    /// With `training` set, batchnorm uses batch statistics; running
    /// statistics update only when `update_running` is also set.
    Gradients backward(const Tensor &input, const Tensor &target, bool training = true, bool update_running = false,
                       double weight_decay = 0.0);

    /// One Adam step (β1 = 0.9, β2 = 0.999, ε = 1e-8).
    void adam_step(const Gradients &g, double lr);
    size_t adam_steps() const {
        return adam_t_;
    }

    nlohmann::json metadata;

    void save(const std::string &path) const;
    static Network load(const std::string &path);

   private:
    friend struct NetworkAccess;
    std::vector<LayerSpec> specs_;
    std::vector<std::vector<Tensor>> params_;
    std::vector<std::vector<Tensor>> buffers_;  // batchnorm running mean / var
    std::vector<std::vector<Tensor>> adam_m_, adam_v_;
    size_t adam_t_ = 0;
    uint64_t seed_ = 0;
};

/// Supplies training batches: fills x and y for the listed sample indices.
struct BatchSource {
    size_t count = 0;
    std::function<void(const std::vector<size_t> &, Tensor &, Tensor &)> fill;
};

struct TrainConfig {
    size_t epochs = 10;
    size_t batch_size = 100;
    double lr_start = 1e-3;
    double lr_end = 1e-5;
    double weight_decay = 0.0;
    uint64_t seed = 1;
    bool verbose = false;
};

struct TrainResult {
    std::vector<double> loss_trace;  // mean training loss per epoch
};

/// Learning rate of epoch e: exponential interpolation from lr_start to lr_end.
double scheduled_lr(const TrainConfig &cfg, size_t epoch);
TrainResult train(Network &net, const BatchSource &source, const TrainConfig &cfg);

/// Max relative error between analytic and central-difference gradients over
/// `trials` sampled parameters, on a random input of `input_shape` (batch axis
/// included) drawn from `seed`.
double grad_check(Network &net, const std::vector<size_t> &input_shape, size_t trials, double eps, uint64_t seed,
                  bool training = false);

/// X-type and Z-type syndrome bits laid out on their stabilizer grids.
std::pair<Tensor, Tensor> reshape_syndrome(const StabilizerCode &code, const BitVec &s);

enum class ModelKind { mlp, cnn, none };
std::string model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string &name);

std::vector<LayerSpec> default_mlp(size_t inputs, size_t outputs, size_t d, bool batchnorm = false);
std::vector<LayerSpec> mlp(size_t inputs, size_t outputs, size_t hidden, size_t layers, bool batchnorm);
std::vector<LayerSpec> default_cnn(const StabilizerCode &code, size_t outputs, bool batchnorm = false);

/// Input shape (without the batch axis) a model kind expects for a code.
std::vector<size_t> input_shape(const StabilizerCode &code, ModelKind kind);
/// Writes the model input for syndrome s into `out` at batch slot `slot`.
void encode_syndrome(const StabilizerCode &code, ModelKind kind, const BitVec &s, Tensor &out, size_t slot);
BatchSource dataset_source(const StabilizerCode &code, ModelKind kind, const Dataset &ds);

}  // namespace topodecode

#endif
