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

#include "topodecode/nn.h"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>

#include "topodecode/noise.h"

namespace topodecode {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;

constexpr double kBnMomentum = 0.9;
constexpr double kBnEps = 1e-5;
constexpr char kMagic[4] = {'Q', 'N', 'N', '\0'};
constexpr uint32_t kCheckpointVersion = 1;

std::string shape_str(const std::vector<size_t> &s) {
    std::string r = "[";
    for (size_t i = 0; i < s.size(); i++) {
        r += (i ? "," : "") + std::to_string(s[i]);
    }
    return r + "]";
}

size_t conv_out(size_t h, size_t k, size_t stride, bool same) {
    if (same) {
        return (h + stride - 1) / stride;
    }
    if (h < k) {
        throw ContractViolation("conv2d kernel larger than input");
    }
    return (h - k) / stride + 1;
}

size_t conv_pad(size_t h, size_t out, size_t k, size_t stride, bool same) {
    if (!same) {
        return 0;
    }
    size_t need = (out - 1) * stride + k;
    return need > h ? (need - h) / 2 : 0;
}

struct ConvGeom {
    size_t b, c, h, w, ho, wo, pt, pl, k;
};

ConvGeom conv_geom(const LayerSpec &s, const Tensor &x) {
    if (x.shape.size() != 4 || x.shape[1] != s.in_ch) {
        throw ContractViolation("conv2d expects [B," + std::to_string(s.in_ch) + ",H,W], got " + shape_str(x.shape));
    }
    ConvGeom g{};
    g.b = x.shape[0];
    g.c = x.shape[1];
    g.h = x.shape[2];
    g.w = x.shape[3];
    g.ho = conv_out(g.h, s.kh, s.stride_v, s.same_padding);
    g.wo = conv_out(g.w, s.kw, s.stride_h, s.same_padding);
    g.pt = conv_pad(g.h, g.ho, s.kh, s.stride_v, s.same_padding);
    g.pl = conv_pad(g.w, g.wo, s.kw, s.stride_h, s.same_padding);
    g.k = g.c * s.kh * s.kw;
    return g;
}

// Column (b, oy, ox) holds the receptive field of that output cell.
Eigen::MatrixXd im2col(const LayerSpec &s, const ConvGeom &g, const Tensor &x) {
    size_t p = g.ho * g.wo;
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero((long)g.k, (long)(g.b * p));
    for (size_t b = 0; b < g.b; b++) {
        for (size_t oy = 0; oy < g.ho; oy++) {
            for (size_t ox = 0; ox < g.wo; ox++) {
                long col = (long)(b * p + oy * g.wo + ox);
                for (size_t c = 0; c < g.c; c++) {
                    for (size_t ky = 0; ky < s.kh; ky++) {
                        long iy = (long)(oy * s.stride_v + ky) - (long)g.pt;
                        if (iy < 0 || iy >= (long)g.h) {
                            continue;
                        }
                        for (size_t kx = 0; kx < s.kw; kx++) {
                            long ix = (long)(ox * s.stride_h + kx) - (long)g.pl;
                            if (ix < 0 || ix >= (long)g.w) {
                                continue;
                            }
                            cols((long)((c * s.kh + ky) * s.kw + kx), col) =
                                x.data[((b * g.c + c) * g.h + (size_t)iy) * g.w + (size_t)ix];
                        }
                    }
                }
            }
        }
    }
    return cols;
}

void col2im(const LayerSpec &s, const ConvGeom &g, const Eigen::MatrixXd &cols, Tensor &dx) {
    size_t p = g.ho * g.wo;
    for (size_t b = 0; b < g.b; b++) {
        for (size_t oy = 0; oy < g.ho; oy++) {
            for (size_t ox = 0; ox < g.wo; ox++) {
                long col = (long)(b * p + oy * g.wo + ox);
                for (size_t c = 0; c < g.c; c++) {
                    for (size_t ky = 0; ky < s.kh; ky++) {
                        long iy = (long)(oy * s.stride_v + ky) - (long)g.pt;
                        if (iy < 0 || iy >= (long)g.h) {
                            continue;
                        }
                        for (size_t kx = 0; kx < s.kw; kx++) {
                            long ix = (long)(ox * s.stride_h + kx) - (long)g.pl;
                            if (ix < 0 || ix >= (long)g.w) {
                                continue;
                            }
                            dx.data[((b * g.c + c) * g.h + (size_t)iy) * g.w + (size_t)ix] +=
                                cols((long)((c * s.kh + ky) * s.kw + kx), col);
                        }
                    }
                }
            }
        }
    }
}

// Batchnorm normalizes per feature ([B,F]) or per channel ([B,C,H,W]).
struct BnGeom {
    size_t b, c, sp;
};

BnGeom bn_geom(const LayerSpec &s, const Tensor &x) {
    BnGeom g{};
    if (x.shape.size() == 2) {
        g = {x.shape[0], x.shape[1], 1};
    } else if (x.shape.size() == 4) {
        g = {x.shape[0], x.shape[1], x.shape[2] * x.shape[3]};
    } else {
        throw ContractViolation("batchnorm expects rank 2 or 4 input, got " + shape_str(x.shape));
    }
    if (g.c != s.dim) {
        throw ContractViolation("batchnorm dim mismatch: " + shape_str(x.shape));
    }
    return g;
}

struct Cache {
    Eigen::MatrixXd cols;       // conv2d
    Tensor xhat;                // batchnorm
    std::vector<double> invstd;  // batchnorm
};

enum class Mode { inference, train, train_update };

// Runs one layer; fills `cache` when non-null.
Tensor layer_forward(const LayerSpec &s, const std::vector<Tensor> &params, std::vector<Tensor> *buffers,
                     const Tensor &x, Mode mode, Cache *cache) {
    switch (s.kind) {
        case LayerKind::dense: {
            if (x.shape.size() != 2 || x.shape[1] != s.in) {
                throw ContractViolation("dense expects [B," + std::to_string(s.in) + "], got " + shape_str(x.shape));
            }
            size_t b = x.shape[0];
            Tensor y({b, s.out});
            ConstRowMap xm(x.data.data(), (long)b, (long)s.in);
            ConstRowMap wm(params[0].data.data(), (long)s.out, (long)s.in);
            RowMap ym(y.data.data(), (long)b, (long)s.out);
            ym.noalias() = xm * wm.transpose();
            Eigen::Map<const Eigen::RowVectorXd> bias(params[1].data.data(), (long)s.out);
            ym.rowwise() += bias;
            return y;
        }
        case LayerKind::conv2d: {
            ConvGeom g = conv_geom(s, x);
            Eigen::MatrixXd cols = im2col(s, g, x);
            ConstRowMap wm(params[0].data.data(), (long)s.out_ch, (long)g.k);
            Eigen::MatrixXd out = wm * cols;
            size_t p = g.ho * g.wo;
            Tensor y({g.b, s.out_ch, g.ho, g.wo});
            for (size_t b = 0; b < g.b; b++) {
                for (size_t o = 0; o < s.out_ch; o++) {
                    double bias = params[1].data[o];
                    for (size_t q = 0; q < p; q++) {
                        y.data[(b * s.out_ch + o) * p + q] = out((long)o, (long)(b * p + q)) + bias;
                    }
                }
            }
            if (cache) {
                cache->cols = std::move(cols);
            }
            return y;
        }
        case LayerKind::relu: {
            Tensor y = x;
            for (double &v : y.data) {
                v = v > 0 ? v : 0;
            }
            return y;
        }
        case LayerKind::sigmoid: {
            Tensor y = x;
            for (double &v : y.data) {
                v = 1.0 / (1.0 + std::exp(-v));
            }
            return y;
        }
        case LayerKind::batchnorm: {
            BnGeom g = bn_geom(s, x);
            const std::vector<double> &gamma = params[0].data;
            const std::vector<double> &beta = params[1].data;
            std::vector<double> mean(g.c, 0), var(g.c, 0);
            if (mode == Mode::inference) {
                mean = (*buffers)[0].data;
                var = (*buffers)[1].data;
            } else {
                double cnt = (double)(g.b * g.sp);
                for (size_t b = 0; b < g.b; b++) {
                    for (size_t c = 0; c < g.c; c++) {
                        for (size_t q = 0; q < g.sp; q++) {
                            mean[c] += x.data[(b * g.c + c) * g.sp + q];
                        }
                    }
                }
                for (double &m : mean) {
                    m /= cnt;
                }
                for (size_t b = 0; b < g.b; b++) {
                    for (size_t c = 0; c < g.c; c++) {
                        for (size_t q = 0; q < g.sp; q++) {
                            double dv = x.data[(b * g.c + c) * g.sp + q] - mean[c];
                            var[c] += dv * dv;
                        }
                    }
                }
                for (double &v : var) {
                    v /= cnt;
                }
                if (mode == Mode::train_update) {
                    for (size_t c = 0; c < g.c; c++) {
                        (*buffers)[0].data[c] = kBnMomentum * (*buffers)[0].data[c] + (1 - kBnMomentum) * mean[c];
                        (*buffers)[1].data[c] = kBnMomentum * (*buffers)[1].data[c] + (1 - kBnMomentum) * var[c];
                    }
                }
            }
            std::vector<double> invstd(g.c);
            for (size_t c = 0; c < g.c; c++) {
                invstd[c] = 1.0 / std::sqrt(var[c] + kBnEps);
            }
            Tensor y(x.shape);
            Tensor xhat(x.shape);
            for (size_t b = 0; b < g.b; b++) {
                for (size_t c = 0; c < g.c; c++) {
                    for (size_t q = 0; q < g.sp; q++) {
                        size_t i = (b * g.c + c) * g.sp + q;
                        xhat.data[i] = (x.data[i] - mean[c]) * invstd[c];
                        y.data[i] = gamma[c] * xhat.data[i] + beta[c];
                    }
                }
            }
            if (cache) {
                cache->xhat = std::move(xhat);
                cache->invstd = std::move(invstd);
            }
            return y;
        }
        case LayerKind::flatten: {
            if (x.shape.empty()) {
                throw ContractViolation("flatten of a scalar");
            }
            Tensor y = x;
            y.shape = {x.shape[0], x.numel() / std::max<size_t>(1, x.shape[0])};
            return y;
        }
        case LayerKind::split: {
            if (x.shape.size() != 4 || x.shape[1] != 2) {
                throw ContractViolation("split expects [B,2,H,W], got " + shape_str(x.shape));
            }
            size_t b = x.shape[0], plane = x.shape[2] * x.shape[3];
            Tensor y({2 * b, 1, x.shape[2], x.shape[3]});
            for (size_t i = 0; i < b; i++) {
                for (size_t c = 0; c < 2; c++) {
                    std::copy_n(x.data.begin() + (long)((i * 2 + c) * plane), plane,
                                y.data.begin() + (long)((c * b + i) * plane));
                }
            }
            return y;
        }
        case LayerKind::concat: {
            if (x.shape.size() != 2 || x.shape[0] % 2) {
                throw ContractViolation("concat expects [2B,F], got " + shape_str(x.shape));
            }
            size_t b = x.shape[0] / 2, f = x.shape[1];
            Tensor y({b, 2 * f});
            for (size_t i = 0; i < b; i++) {
                for (size_t c = 0; c < 2; c++) {
                    std::copy_n(x.data.begin() + (long)((c * b + i) * f), f, y.data.begin() + (long)((i * 2 + c) * f));
                }
            }
            return y;
        }
    }
    throw ContractViolation("unknown layer kind");
}

// Returns dL/dx and accumulates parameter gradients into `grads`.
Tensor layer_backward(const LayerSpec &s, const std::vector<Tensor> &params, const std::vector<Tensor> &buffers,
                      const Tensor &x, const Tensor &y, const Tensor &dy, Mode mode, const Cache &cache,
                      std::vector<Tensor> &grads) {
    switch (s.kind) {
        case LayerKind::dense: {
            size_t b = x.shape[0];
            ConstRowMap xm(x.data.data(), (long)b, (long)s.in);
            ConstRowMap wm(params[0].data.data(), (long)s.out, (long)s.in);
            ConstRowMap dym(dy.data.data(), (long)b, (long)s.out);
            RowMap dw(grads[0].data.data(), (long)s.out, (long)s.in);
            dw.noalias() += dym.transpose() * xm;
            Eigen::Map<Eigen::RowVectorXd> db(grads[1].data.data(), (long)s.out);
            db += dym.colwise().sum();
            Tensor dx(x.shape);
            RowMap dxm(dx.data.data(), (long)b, (long)s.in);
            dxm.noalias() = dym * wm;
            return dx;
        }
        case LayerKind::conv2d: {
            ConvGeom g = conv_geom(s, x);
            size_t p = g.ho * g.wo;
            Eigen::MatrixXd dout((long)s.out_ch, (long)(g.b * p));
            for (size_t b = 0; b < g.b; b++) {
                for (size_t o = 0; o < s.out_ch; o++) {
                    for (size_t q = 0; q < p; q++) {
                        double v = dy.data[(b * s.out_ch + o) * p + q];
                        dout((long)o, (long)(b * p + q)) = v;
                        grads[1].data[o] += v;
                    }
                }
            }
            RowMap dw(grads[0].data.data(), (long)s.out_ch, (long)g.k);
            dw.noalias() += dout * cache.cols.transpose();
            ConstRowMap wm(params[0].data.data(), (long)s.out_ch, (long)g.k);
            Eigen::MatrixXd dcols = wm.transpose() * dout;
            Tensor dx(x.shape);
            col2im(s, g, dcols, dx);
            return dx;
        }
        case LayerKind::relu: {
            Tensor dx = dy;
            for (size_t i = 0; i < dx.numel(); i++) {
                if (x.data[i] <= 0) {
                    dx.data[i] = 0;
                }
            }
            return dx;
        }
        case LayerKind::sigmoid: {
            Tensor dx = dy;
            for (size_t i = 0; i < dx.numel(); i++) {
                dx.data[i] *= y.data[i] * (1 - y.data[i]);
            }
            return dx;
        }
        case LayerKind::batchnorm: {
            BnGeom g = bn_geom(s, x);
            const std::vector<double> &gamma = params[0].data;
            Tensor dx(x.shape);
            std::vector<double> sum_d(g.c, 0), sum_dx(g.c, 0);
            for (size_t b = 0; b < g.b; b++) {
                for (size_t c = 0; c < g.c; c++) {
                    for (size_t q = 0; q < g.sp; q++) {
                        size_t i = (b * g.c + c) * g.sp + q;
                        grads[0].data[c] += dy.data[i] * cache.xhat.data[i];
                        grads[1].data[c] += dy.data[i];
                        sum_d[c] += dy.data[i] * gamma[c];
                        sum_dx[c] += dy.data[i] * gamma[c] * cache.xhat.data[i];
                    }
                }
            }
            double cnt = (double)(g.b * g.sp);
            for (size_t b = 0; b < g.b; b++) {
                for (size_t c = 0; c < g.c; c++) {
                    for (size_t q = 0; q < g.sp; q++) {
                        size_t i = (b * g.c + c) * g.sp + q;
                        double dxhat = dy.data[i] * gamma[c];
                        if (mode == Mode::inference) {
                            dx.data[i] = dxhat / std::sqrt(buffers[1].data[c] + kBnEps);
                        } else {
                            dx.data[i] = cache.invstd[c] / cnt *
                                         (cnt * dxhat - sum_d[c] - cache.xhat.data[i] * sum_dx[c]);
                        }
                    }
                }
            }
            return dx;
        }
        case LayerKind::flatten: {
            Tensor dx = dy;
            dx.shape = x.shape;
            return dx;
        }
        case LayerKind::split: {
            size_t b = x.shape[0], plane = x.shape[2] * x.shape[3];
            Tensor dx(x.shape);
            for (size_t i = 0; i < b; i++) {
                for (size_t c = 0; c < 2; c++) {
                    std::copy_n(dy.data.begin() + (long)((c * b + i) * plane), plane,
                                dx.data.begin() + (long)((i * 2 + c) * plane));
                }
            }
            return dx;
        }
        case LayerKind::concat: {
            size_t b = x.shape[0] / 2, f = x.shape[1];
            Tensor dx(x.shape);
            for (size_t i = 0; i < b; i++) {
                for (size_t c = 0; c < 2; c++) {
                    std::copy_n(dy.data.begin() + (long)((i * 2 + c) * f), f,
                                dx.data.begin() + (long)((c * b + i) * f));
                }
            }
            return dx;
        }
    }
    throw ContractViolation("unknown layer kind");
}

std::vector<Tensor> param_shapes_for(const LayerSpec &s) {
    switch (s.kind) {
        case LayerKind::dense:
            return {Tensor({s.out, s.in}), Tensor({s.out})};
        case LayerKind::conv2d:
            return {Tensor({s.out_ch, s.in_ch * s.kh * s.kw}), Tensor({s.out_ch})};
        case LayerKind::batchnorm:
            return {Tensor({s.dim}, 1.0), Tensor({s.dim})};
        default:
            return {};
    }
}

bool has_weights(const LayerSpec &s) {
    return s.kind == LayerKind::dense || s.kind == LayerKind::conv2d;
}

void put_u32(std::ostream &out, uint32_t v) {
    for (int i = 0; i < 4; i++) {
        out.put((char)(v >> (8 * i)));
    }
}

void put_u64(std::ostream &out, uint64_t v) {
    for (int i = 0; i < 8; i++) {
        out.put((char)(v >> (8 * i)));
    }
}

uint64_t get_uint(std::istream &in, int bytes) {
    uint64_t v = 0;
    for (int i = 0; i < bytes; i++) {
        int c = in.get();
        if (c == EOF) {
            throw CorruptPayload("truncated checkpoint");
        }
        v |= (uint64_t)(unsigned char)c << (8 * i);
    }
    return v;
}

std::string layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::dense:
            return "dense";
        case LayerKind::conv2d:
            return "conv2d";
        case LayerKind::relu:
            return "relu";
        case LayerKind::sigmoid:
            return "sigmoid";
        case LayerKind::batchnorm:
            return "batchnorm";
        case LayerKind::flatten:
            return "flatten";
        case LayerKind::split:
            return "split";
        case LayerKind::concat:
            return "concat";
    }
    return "?";
}

LayerKind parse_layer_kind(const std::string &s) {
    for (LayerKind k : {LayerKind::dense, LayerKind::conv2d, LayerKind::relu, LayerKind::sigmoid, LayerKind::batchnorm,
                        LayerKind::flatten, LayerKind::split, LayerKind::concat}) {
        if (layer_kind_name(k) == s) {
            return k;
        }
    }
    throw ContractViolation("unknown layer kind: " + s);
}

}  // namespace

Tensor::Tensor(std::vector<size_t> shape_, double fill) : shape(std::move(shape_)), data(shape_numel(shape), fill) {
}

size_t shape_numel(const std::vector<size_t> &shape) {
    return std::accumulate(shape.begin(), shape.end(), (size_t)1, std::multiplies<>());
}

LayerSpec LayerSpec::Dense(size_t in, size_t out) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.in = in;
    s.out = out;
    return s;
}

LayerSpec LayerSpec::Conv2D(size_t kh, size_t kw, size_t in_ch, size_t out_ch, size_t stride_v, size_t stride_h,
                            bool same_padding) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.kh = kh;
    s.kw = kw;
    s.in_ch = in_ch;
    s.out_ch = out_ch;
    s.stride_v = stride_v;
    s.stride_h = stride_h;
    s.same_padding = same_padding;
    return s;
}

LayerSpec LayerSpec::ReLU() {
    LayerSpec s;
    s.kind = LayerKind::relu;
    return s;
}

LayerSpec LayerSpec::Sigmoid() {
    LayerSpec s;
    s.kind = LayerKind::sigmoid;
    return s;
}

LayerSpec LayerSpec::BatchNorm(size_t dim) {
    LayerSpec s;
    s.kind = LayerKind::batchnorm;
    s.dim = dim;
    return s;
}

LayerSpec LayerSpec::Flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
}

LayerSpec LayerSpec::Split() {
    LayerSpec s;
    s.kind = LayerKind::split;
    return s;
}

LayerSpec LayerSpec::Concat() {
    LayerSpec s;
    s.kind = LayerKind::concat;
    return s;
}

nlohmann::json spec_to_json(const LayerSpec &s) {
    nlohmann::json j{{"kind", layer_kind_name(s.kind)}};
    switch (s.kind) {
        case LayerKind::dense:
            j["in"] = s.in;
            j["out"] = s.out;
            break;
        case LayerKind::conv2d:
            j["kh"] = s.kh;
            j["kw"] = s.kw;
            j["in_ch"] = s.in_ch;
            j["out_ch"] = s.out_ch;
            j["stride_v"] = s.stride_v;
            j["stride_h"] = s.stride_h;
            j["padding"] = s.same_padding ? "same" : "valid";
            break;
        case LayerKind::batchnorm:
            j["dim"] = s.dim;
            break;
        default:
            break;
    }
    return j;
}

LayerSpec spec_from_json(const nlohmann::json &j) {
    LayerKind k = parse_layer_kind(j.at("kind").get<std::string>());
    switch (k) {
        case LayerKind::dense:
            return LayerSpec::Dense(j.at("in"), j.at("out"));
        case LayerKind::conv2d:
            return LayerSpec::Conv2D(j.at("kh"), j.at("kw"), j.at("in_ch"), j.at("out_ch"), j.value("stride_v", 1),
                                     j.value("stride_h", 1), j.value("padding", "valid") == "same");
        case LayerKind::relu:
            return LayerSpec::ReLU();
        case LayerKind::sigmoid:
            return LayerSpec::Sigmoid();
        case LayerKind::batchnorm:
            return LayerSpec::BatchNorm(j.at("dim"));
        case LayerKind::flatten:
            return LayerSpec::Flatten();
        case LayerKind::split:
            return LayerSpec::Split();
        case LayerKind::concat:
            return LayerSpec::Concat();
    }
    throw ContractViolation("unknown layer kind");
}

Network::Network(std::vector<LayerSpec> specs, uint64_t seed) : specs_(std::move(specs)), seed_(seed) {
    size_t L = specs_.size();
    params_.resize(L);
    buffers_.resize(L);
    for (size_t i = 0; i < L; i++) {
        const LayerSpec &s = specs_[i];
        params_[i] = param_shapes_for(s);
        if (s.kind == LayerKind::batchnorm) {
            buffers_[i] = {Tensor({s.dim}), Tensor({s.dim}, 1.0)};
        }
        if (!has_weights(s)) {
            continue;
        }
        // Xavier when the next non-normalizing layer is the sigmoid, He otherwise.
        bool before_sigmoid = false;
        for (size_t j = i + 1; j < L; j++) {
            if (specs_[j].kind == LayerKind::batchnorm) {
                continue;
            }
            before_sigmoid = specs_[j].kind == LayerKind::sigmoid;
            break;
        }
        double fan_in = (double)(s.kind == LayerKind::dense ? s.in : s.in_ch * s.kh * s.kw);
        double fan_out = (double)(s.kind == LayerKind::dense ? s.out : s.out_ch * s.kh * s.kw);
        double sd = before_sigmoid ? std::sqrt(2.0 / (fan_in + fan_out)) : std::sqrt(2.0 / fan_in);
        CounterRng rng(seed, i, 0x1417);
        for (double &w : params_[i][0].data) {
            w = sd * rng.normal();
        }
    }
    adam_m_ = params_;
    adam_v_ = params_;
    for (auto &layer : adam_m_) {
        for (auto &t : layer) {
            std::fill(t.data.begin(), t.data.end(), 0.0);
        }
    }
    adam_v_ = adam_m_;
}

size_t Network::num_parameters() const {
    size_t total = 0;
    for (const auto &layer : params_) {
        for (const auto &t : layer) {
            total += t.numel();
        }
    }
    return total;
}

Tensor Network::forward(const Tensor &input) const {
    if (input.data.size() != shape_numel(input.shape)) {
        throw ContractViolation("tensor data does not match its shape");
    }
    Tensor x = input;
    for (size_t i = 0; i < specs_.size(); i++) {
        // Inference mode only reads the running statistics.
        auto *buf = const_cast<std::vector<Tensor> *>(&buffers_[i]);
        x = layer_forward(specs_[i], params_[i], buf, x, Mode::inference, nullptr);
    }
    return x;
}

Network::Gradients Network::backward(const Tensor &input, const Tensor &target, bool training, bool update_running,
                                     double weight_decay) {
    if (input.data.size() != shape_numel(input.shape)) {
        throw ContractViolation("tensor data does not match its shape");
    }
    Mode mode = !training ? Mode::inference : update_running ? Mode::train_update : Mode::train;
    size_t L = specs_.size();
    std::vector<Tensor> acts(L + 1);
    std::vector<Cache> caches(L);
    acts[0] = input;
    for (size_t i = 0; i < L; i++) {
        acts[i + 1] = layer_forward(specs_[i], params_[i], &buffers_[i], acts[i], mode, &caches[i]);
    }
    const Tensor &y = acts[L];
    if (y.shape != target.shape) {
        throw ContractViolation("target shape " + shape_str(target.shape) + " does not match output " +
                                shape_str(y.shape));
    }
    size_t batch = y.shape.empty() ? 1 : y.shape[0];
    Gradients g;
    g.params.resize(L);
    for (size_t i = 0; i < L; i++) {
        g.params[i] = param_shapes_for(specs_[i]);
        for (auto &t : g.params[i]) {
            std::fill(t.data.begin(), t.data.end(), 0.0);
        }
    }
    Tensor dy(y.shape);
    double loss = 0;
    for (size_t i = 0; i < y.numel(); i++) {
        double r = y.data[i] - target.data[i];
        loss += r * r;
        dy.data[i] = 2 * r / (double)batch;
    }
    loss /= (double)batch;
    for (size_t i = L; i-- > 0;) {
        dy = layer_backward(specs_[i], params_[i], buffers_[i], acts[i], acts[i + 1], dy, mode, caches[i], g.params[i]);
    }
    if (weight_decay > 0) {
        for (size_t i = 0; i < L; i++) {
            if (!has_weights(specs_[i])) {
                continue;
            }
            const auto &w = params_[i][0].data;
            for (size_t j = 0; j < w.size(); j++) {
                loss += weight_decay * w[j] * w[j];
                g.params[i][0].data[j] += 2 * weight_decay * w[j];
            }
        }
    }
    g.loss = loss;
    return g;
}

void Network::adam_step(const Gradients &g, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    adam_t_++;
    double c1 = 1 - std::pow(b1, (double)adam_t_);
    double c2 = 1 - std::pow(b2, (double)adam_t_);
    for (size_t i = 0; i < params_.size(); i++) {
        for (size_t t = 0; t < params_[i].size(); t++) {
            auto &p = params_[i][t].data;
            auto &m = adam_m_[i][t].data;
            auto &v = adam_v_[i][t].data;
            const auto &gr = g.params.at(i).at(t).data;
            for (size_t j = 0; j < p.size(); j++) {
                m[j] = b1 * m[j] + (1 - b1) * gr[j];
                v[j] = b2 * v[j] + (1 - b2) * gr[j] * gr[j];
                p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
            }
        }
    }
}

void Network::save(const std::string &path) const {
    nlohmann::json j;
    j["format_version"] = kCheckpointVersion;
    j["seed"] = seed_;
    j["metadata"] = metadata;
    auto &specs = j["specs"] = nlohmann::json::array();
    for (const auto &s : specs_) {
        specs.push_back(spec_to_json(s));
    }
    std::string meta = j.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out.write(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u64(out, meta.size());
    out.write(meta.data(), (long)meta.size());
    // Parameters layer by layer, then batchnorm running statistics.
    for (const auto &layer : params_) {
        for (const auto &t : layer) {
            for (double v : t.data) {
                put_u64(out, std::bit_cast<uint64_t>(v));
            }
        }
    }
    for (const auto &layer : buffers_) {
        for (const auto &t : layer) {
            for (double v : t.data) {
                put_u64(out, std::bit_cast<uint64_t>(v));
            }
        }
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

Network Network::load(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw CorruptPayload("not a model checkpoint: " + path);
    }
    uint32_t version = (uint32_t)get_uint(in, 4);
    if (version != kCheckpointVersion) {
        throw VersionMismatch("checkpoint version " + std::to_string(version));
    }
    uint64_t meta_len = get_uint(in, 8);
    std::string meta(meta_len, '\0');
    in.read(meta.data(), (long)meta_len);
    if (!in) {
        throw CorruptPayload("truncated checkpoint header");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception &e) {
        throw CorruptPayload(std::string("bad checkpoint header: ") + e.what());
    }
    std::vector<LayerSpec> specs;
    for (const auto &s : j.at("specs")) {
        specs.push_back(spec_from_json(s));
    }
    Network net(specs, j.at("seed").get<uint64_t>());
    net.metadata = j.value("metadata", nlohmann::json::object());
    for (auto *group : {&net.params_, &net.buffers_}) {
        for (auto &layer : *group) {
            for (auto &t : layer) {
                for (double &v : t.data) {
                    v = std::bit_cast<double>(get_uint(in, 8));
                }
            }
        }
    }
    if (in.peek() != EOF) {
        throw CorruptPayload("trailing bytes in checkpoint");
    }
    return net;
}

double scheduled_lr(const TrainConfig &cfg, size_t epoch) {
    if (cfg.epochs <= 1 || cfg.lr_start <= 0 || cfg.lr_end <= 0) {
        return cfg.lr_start;
    }
    double f = (double)epoch / (double)(cfg.epochs - 1);
    return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, f);
}

TrainResult train(Network &net, const BatchSource &source, const TrainConfig &cfg) {
    if (source.count == 0 || cfg.batch_size == 0) {
        throw ContractViolation("train needs a nonempty dataset and batch_size >= 1");
    }
    TrainResult result;
    std::vector<size_t> order(source.count);
    std::iota(order.begin(), order.end(), 0);
    Tensor x, y;
    for (size_t epoch = 0; epoch < cfg.epochs; epoch++) {
        CounterRng rng(cfg.seed, epoch, 0x5f1e);
        for (size_t i = order.size(); i > 1; i--) {
            std::swap(order[i - 1], order[rng.below(i)]);
        }
        double lr = scheduled_lr(cfg, epoch);
        double total = 0;
        for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            size_t end = std::min(order.size(), begin + cfg.batch_size);
            std::vector<size_t> idx(order.begin() + (long)begin, order.begin() + (long)end);
            source.fill(idx, x, y);
            auto g = net.backward(x, y, true, true, cfg.weight_decay);
            net.adam_step(g, lr);
            total += g.loss * (double)idx.size();
        }
        result.loss_trace.push_back(total / (double)order.size());
        if (cfg.verbose) {
            std::cerr << "epoch " << epoch + 1 << "/" << cfg.epochs << " lr " << lr << " loss "
                      << result.loss_trace.back() << "\n";
        }
    }
    return result;
}

double grad_check(Network &net, const std::vector<size_t> &input_shape, size_t trials, double eps, uint64_t seed,
                  bool training) {
    if (!(eps > 0 && eps <= 1e-3)) {
        throw ContractViolation("grad_check eps must lie in (0, 1e-3]");
    }
    CounterRng rng(seed, 0, 0x9c);
    Tensor x(input_shape);
    for (double &v : x.data) {
        v = rng.normal();
    }
    Tensor out = net.forward(x);
    Tensor target(out.shape);
    for (double &v : target.data) {
        v = rng.uniform();
    }
    auto g = net.backward(x, target, training, false);
    auto loss_at = [&]() { return net.backward(x, target, training, false).loss; };

    std::vector<std::pair<size_t, size_t>> tensors;
    for (size_t i = 0; i < net.num_layers(); i++) {
        for (size_t t = 0; t < net.params(i).size(); t++) {
            tensors.emplace_back(i, t);
        }
    }
    if (tensors.empty()) {
        return 0;
    }
    double worst = 0;
    for (size_t trial = 0; trial < trials; trial++) {
        auto [li, ti] = tensors[rng.below(tensors.size())];
        Tensor &p = net.params(li)[ti];
        size_t j = rng.below(p.numel());
        double saved = p.data[j];
        p.data[j] = saved + eps;
        double up = loss_at();
        p.data[j] = saved - eps;
        double down = loss_at();
        p.data[j] = saved;
        double numeric = (up - down) / (2 * eps);
        double analytic = g.params[li][ti].data[j];
        double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
    return worst;
}

std::pair<Tensor, Tensor> reshape_syndrome(const StabilizerCode &code, const BitVec &s) {
    if (!is_surface(code.family)) {
        throw UnsupportedFamily("syndrome grids exist only for surface codes");
    }
    if (s.size() != code.num_checks()) {
        throw ContractViolation("syndrome length mismatch");
    }
    size_t rows = (size_t)code.grid_rows, cols = (size_t)code.grid_cols;
    std::pair<Tensor, Tensor> grids{Tensor({rows, cols}), Tensor({rows, cols})};
    for (size_t r = 0; r < code.stabilizers.size(); r++) {
        const Stabilizer &st = code.stabilizers[r];
        Tensor &grid = st.type == 'X' ? grids.first : grids.second;
        grid.data[(size_t)st.grid_row * cols + (size_t)st.grid_col] = s.get(r) ? 1.0 : 0.0;
    }
    return grids;
}

std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::mlp:
            return "mlp";
        case ModelKind::cnn:
            return "cnn";
        case ModelKind::none:
            return "none";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string &name) {
    for (ModelKind k : {ModelKind::mlp, ModelKind::cnn, ModelKind::none}) {
        if (model_kind_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown model kind: " + name);
}

std::vector<LayerSpec> mlp(size_t inputs, size_t outputs, size_t hidden, size_t layers, bool batchnorm) {
    std::vector<LayerSpec> specs;
    size_t width = inputs;
    for (size_t i = 0; i < layers; i++) {
        specs.push_back(LayerSpec::Dense(width, hidden));
        if (batchnorm) {
            specs.push_back(LayerSpec::BatchNorm(hidden));
        }
        specs.push_back(LayerSpec::ReLU());
        width = hidden;
    }
    specs.push_back(LayerSpec::Dense(width, outputs));
    specs.push_back(LayerSpec::Sigmoid());
    return specs;
}

std::vector<LayerSpec> default_mlp(size_t inputs, size_t outputs, size_t d, bool batchnorm) {
    return mlp(inputs, outputs, d <= 5 ? 256 : 512, 2, batchnorm);
}

std::vector<LayerSpec> default_cnn(const StabilizerCode &code, size_t outputs, bool batchnorm) {
    if (!is_surface(code.family)) {
        throw UnsupportedFamily("the CNN model needs a surface code");
    }
    struct Arch {
        size_t k[3][2];
        size_t neurons;
        size_t first_stride_h;
    };
    size_t d = code.d;
    bool rotated = code.family == Family::surface_rotated;
    Arch a{};
    if (d <= 3) {
        a = {{{2, 2}, {2, 2}, {2, 2}}, 500, 1};
    } else if (d <= 5) {
        a = {{{2, 2}, {3, 3}, {3, 3}}, 1000, 1};
    } else if (d <= 7) {
        a = rotated ? Arch{{{2, 2}, {3, 3}, {3, 4}}, 3000, 2} : Arch{{{2, 2}, {3, 3}, {4, 4}}, 3000, 1};
    } else if (d <= 9) {
        a = rotated ? Arch{{{2, 3}, {3, 4}, {4, 5}}, 5000, 2} : Arch{{{3, 3}, {4, 4}, {5, 5}}, 5000, 1};
    } else {
        a = rotated ? Arch{{{2, 4}, {3, 5}, {4, 6}}, 7000, 2} : Arch{{{4, 4}, {5, 5}, {6, 6}}, 7000, 1};
    }
    size_t ch[3] = {10 * d, 10 * d, 5 * d};
    std::vector<LayerSpec> specs{LayerSpec::Split()};
    size_t in_ch = 1;
    size_t h = (size_t)code.grid_rows, w = (size_t)code.grid_cols;
    for (int i = 0; i < 3; i++) {
        size_t sh = i == 0 ? a.first_stride_h : 1;
        specs.push_back(LayerSpec::Conv2D(a.k[i][0], a.k[i][1], in_ch, ch[i], 1, sh, true));
        if (batchnorm) {
            specs.push_back(LayerSpec::BatchNorm(ch[i]));
        }
        specs.push_back(LayerSpec::ReLU());
        w = conv_out(w, a.k[i][1], sh, true);
        in_ch = ch[i];
    }
    specs.push_back(LayerSpec::Flatten());
    specs.push_back(LayerSpec::Concat());
    size_t flat = 2 * in_ch * h * w;
    specs.push_back(LayerSpec::Dense(flat, a.neurons));
    if (batchnorm) {
        specs.push_back(LayerSpec::BatchNorm(a.neurons));
    }
    specs.push_back(LayerSpec::ReLU());
    specs.push_back(LayerSpec::Dense(a.neurons, outputs));
    specs.push_back(LayerSpec::Sigmoid());
    return specs;
}

std::vector<size_t> input_shape(const StabilizerCode &code, ModelKind kind) {
    if (kind == ModelKind::cnn) {
        if (!is_surface(code.family)) {
            throw UnsupportedFamily("the CNN model needs a surface code");
        }
        return {2, (size_t)code.grid_rows, (size_t)code.grid_cols};
    }
    return {code.num_checks()};
}

void encode_syndrome(const StabilizerCode &code, ModelKind kind, const BitVec &s, Tensor &out, size_t slot) {
    size_t width = shape_numel(input_shape(code, kind));
    double *dst = out.data.data() + slot * width;
    if (kind == ModelKind::cnn) {
        auto [gx, gz] = reshape_syndrome(code, s);
        std::copy(gx.data.begin(), gx.data.end(), dst);
        std::copy(gz.data.begin(), gz.data.end(), dst + gx.numel());
        return;
    }
    for (size_t i = 0; i < width; i++) {
        dst[i] = s.get(i) ? 1.0 : 0.0;
    }
}

BatchSource dataset_source(const StabilizerCode &code, ModelKind kind, const Dataset &ds) {
    BatchSource src;
    src.count = ds.size();
    std::vector<size_t> in_shape = input_shape(code, kind);
    size_t labels = ds.header().label_bits;
    src.fill = [&code, &ds, kind, in_shape, labels](const std::vector<size_t> &idx, Tensor &x, Tensor &y) {
        std::vector<size_t> xs{idx.size()};
        xs.insert(xs.end(), in_shape.begin(), in_shape.end());
        if (x.shape != xs) {
            x = Tensor(xs);
        }
        if (y.shape != std::vector<size_t>{idx.size(), labels}) {
            y = Tensor({idx.size(), labels});
        }
        for (size_t b = 0; b < idx.size(); b++) {
            TrainingSample t = ds.sample(idx[b]);
            encode_syndrome(code, kind, t.s, x, b);
            for (size_t j = 0; j < labels; j++) {
                y.data[b * labels + j] = t.g.get(j) ? 1.0 : 0.0;
            }
        }
    };
    return src;
}

}  // namespace topodecode
