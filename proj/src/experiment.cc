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

#include "topodecode/experiment.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "topodecode/baselines.h"
#include "topodecode/dataset.h"

namespace topodecode {

namespace {

const std::set<std::string> kConfigKeys = {
    "family",     "d",          "noise",     "p_train",   "p_eval",    "scheme",     "model",
    "arch",       "dataset_sizes", "epochs", "batch_size", "data_seed", "train_seed", "eval_seed",
    "trials",     "baselines",  "record_wall_time", "model_dir", "verbose"};

template <typename F>
auto stage(const std::string &name, F &&fn) {
    try {
        return fn();
    } catch (const StageFailure &) {
        throw;
    } catch (const std::exception &e) {
        throw StageFailure(name, e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void validate(const ExperimentConfig &c) {
    if (c.d < 3 || c.d % 2 == 0) {
        throw ConfigError("d must be odd and at least 3");
    }
    auto check_p = [](double p, const char *what) {
        if (!(p >= 0 && p < 1)) {
            throw ConfigError(std::string(what) + " must lie in [0, 1)");
        }
    };
    check_p(c.p_train, "p_train");
    if (c.p_eval.empty()) {
        throw ConfigError("p_eval must list at least one value");
    }
    for (double p : c.p_eval) {
        check_p(p, "p_eval");
    }
    if (c.scheme != "uniform" && c.scheme != "short") {
        throw ConfigError("scheme must be uniform or short");
    }
    if (c.model == ModelKind::cnn && !is_surface(c.family)) {
        throw ConfigError("the cnn model needs a surface family");
    }
    if (c.model != ModelKind::none && c.dataset_sizes.empty()) {
        throw ConfigError("dataset_sizes must list at least one size");
    }
    for (size_t s : c.dataset_sizes) {
        if (s < 1) {
            throw ConfigError("dataset sizes must be at least 1");
        }
    }
    if (c.epochs < 1 || c.batch_size < 1 || c.trials < 1) {
        throw ConfigError("epochs, batch_size and trials must be at least 1");
    }
    for (const auto &b : c.baselines) {
        if (b != "md" && b != "mwpm") {
            throw ConfigError("unknown baseline decoder: " + b);
        }
        if (b == "mwpm" && !is_surface(c.family)) {
            throw ConfigError("mwpm needs a surface family");
        }
    }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json &j) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!kConfigKeys.count(it.key())) {
            throw ConfigError("unknown config key: " + it.key());
        }
    }
    ExperimentConfig c;
    try {
        if (j.contains("family")) {
            c.family = parse_family(j["family"].get<std::string>());
        }
        c.d = j.value("d", c.d);
        if (j.contains("noise")) {
            c.noise = parse_noise_kind(j["noise"].get<std::string>());
        }
        c.p_train = j.value("p_train", c.p_train);
        if (j.contains("p_eval")) {
            c.p_eval = j["p_eval"].is_array() ? j["p_eval"].get<std::vector<double>>()
                                               : std::vector<double>{j["p_eval"].get<double>()};
        }
        c.scheme = j.value("scheme", c.scheme);
        if (j.contains("model")) {
            c.model = parse_model_kind(j["model"].get<std::string>());
        }
        if (j.contains("arch")) {
            const auto &a = j["arch"];
            if (!a.is_object()) {
                throw ConfigError("arch must be a JSON object");
            }
            for (auto it = a.begin(); it != a.end(); ++it) {
                if (it.key() != "hidden" && it.key() != "layers" && it.key() != "batchnorm") {
                    throw ConfigError("unknown arch key: " + it.key());
                }
            }
            c.arch.hidden = a.value("hidden", c.arch.hidden);
            c.arch.layers = a.value("layers", c.arch.layers);
            c.arch.batchnorm = a.value("batchnorm", c.arch.batchnorm);
        }
        if (j.contains("dataset_sizes")) {
            c.dataset_sizes = j["dataset_sizes"].is_array() ? j["dataset_sizes"].get<std::vector<size_t>>()
                                                             : std::vector<size_t>{j["dataset_sizes"].get<size_t>()};
        }
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.data_seed = j.value("data_seed", c.data_seed);
        c.train_seed = j.value("train_seed", c.train_seed);
        c.eval_seed = j.value("eval_seed", c.eval_seed);
        c.trials = j.value("trials", c.trials);
        if (j.contains("baselines")) {
            c.baselines = j["baselines"].get<std::vector<std::string>>();
        }
        c.record_wall_time = j.value("record_wall_time", c.record_wall_time);
        c.model_dir = j.value("model_dir", c.model_dir);
        c.verbose = j.value("verbose", c.verbose);
    } catch (const ConfigError &) {
        throw;
    } catch (const std::exception &e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    validate(c);
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig &c) {
    return {
        {"family", family_name(c.family)},
        {"d", c.d},
        {"noise", noise_kind_name(c.noise)},
        {"p_train", c.p_train},
        {"p_eval", c.p_eval},
        {"scheme", c.scheme},
        {"model", model_kind_name(c.model)},
        {"arch", {{"hidden", c.arch.hidden}, {"layers", c.arch.layers}, {"batchnorm", c.arch.batchnorm}}},
        {"dataset_sizes", c.dataset_sizes},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"data_seed", c.data_seed},
        {"train_seed", c.train_seed},
        {"eval_seed", c.eval_seed},
        {"trials", c.trials},
        {"baselines", c.baselines},
        {"record_wall_time", c.record_wall_time},
        {"model_dir", c.model_dir},
        {"verbose", c.verbose},
    };
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const ExperimentConfig &c) {
    nlohmann::json j = config_to_json(c);
    // Output-only switches do not change results.
    j.erase("verbose");
    j.erase("model_dir");
    j.erase("record_wall_time");
    std::string s = j.dump();
    uint64_t h = 0x243f6a8885a308d3ull;
    for (unsigned char ch : s) {
        h = mix64(h ^ ch);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

std::string config_help() {
    return R"(Config keys (JSON object) and defaults:
  family            surface_rotated | surface_unrotated | color_488 | color_666  (surface_rotated)
  d                 odd code distance >= 3                                     (3)
  noise             bit_flip | depolarizing                                    (bit_flip)
  p_train           training error rate in [0,1)                               (0.1)
  p_eval            list of evaluation error rates                             ([0.1])
  scheme            uniform | short                                            (uniform)
  model             mlp | cnn | none                                           (mlp)
  arch              {"hidden": 0, "layers": 0, "batchnorm": false}; 0 keeps defaults
  dataset_sizes     list of training-set sizes                                 ([10000])
  epochs            training epochs                                            (10)
  batch_size        minibatch size                                             (100)
  data_seed, train_seed, eval_seed                                             (1, 2, 3)
  trials            evaluation samples per p_eval                              (10000)
  baselines         subset of ["md", "mwpm"]                                   ([])
  record_wall_time  false writes 0 in wall_seconds                             (true)
  model_dir         directory for .qnn checkpoints                             ("")
  verbose           per-epoch training log on stderr                           (false)
)";
}

std::string csv_header() {
    return "config_hash,family,d,scheme,decoder,p_train,p_eval,dataset_size,trials,rate,ci_low,ci_high,wall_seconds";
}

std::string csv_row(const ResultRow &r) {
    std::ostringstream s;
    s << r.config_hash << ',' << r.family << ',' << r.d << ',' << r.scheme << ',' << r.decoder << ','
      << fmt(r.p_train) << ',' << fmt(r.p_eval) << ',' << r.dataset_size << ',' << r.trials << ',' << fmt(r.rate)
      << ',' << fmt(r.ci_low) << ',' << fmt(r.ci_high) << ',' << fmt(r.wall_seconds);
    return s.str();
}

void write_csv(std::ostream &out, const std::vector<ResultRow> &rows) {
    out << csv_header() << '\n';
    for (const auto &r : rows) {
        out << csv_row(r) << '\n';
    }
}

DiagnosisScheme build_scheme(const StabilizerCode &code, const std::string &kind) {
    BitMatrix hg;
    if (kind == "uniform") {
        hg = uniform_construction(code);
    } else if (kind == "short") {
        hg = short_construction(code);
    } else {
        throw ConfigError("unknown scheme kind: " + kind);
    }
    return make_scheme(code, hg, kind);
}

std::vector<LayerSpec> model_specs(const StabilizerCode &code, ModelKind kind, size_t outputs,
                                   const ArchitectureOverrides &arch) {
    if (kind == ModelKind::cnn) {
        return default_cnn(code, outputs, arch.batchnorm);
    }
    if (kind == ModelKind::mlp) {
        size_t hidden = arch.hidden ? arch.hidden : (code.d <= 5 ? 256 : 512);
        size_t layers = arch.layers ? arch.layers : 2;
        return mlp(code.num_checks(), outputs, hidden, layers, arch.batchnorm);
    }
    throw ConfigError("model kind none has no architecture");
}

Network train_model(const StabilizerCode &code, const Dataset &ds, ModelKind kind, const ArchitectureOverrides &arch,
                    const TrainConfig &tc, TrainResult *trace) {
    Network net(model_specs(code, kind, ds.header().label_bits, arch), tc.seed);
    TrainResult tr = train(net, dataset_source(code, kind, ds), tc);
    net.metadata["family"] = family_name(code.family);
    net.metadata["d"] = code.d;
    net.metadata["model"] = model_kind_name(kind);
    net.metadata["dataset_size"] = ds.size();
    net.metadata["epochs"] = tc.epochs;
    net.metadata["batch_size"] = tc.batch_size;
    net.metadata["loss_trace"] = tr.loss_trace;
    if (trace) {
        *trace = std::move(tr);
    }
    return net;
}

Decoder baseline_decoder(const StabilizerCode &code, const NoiseModel &model, const std::string &name) {
    if (name == "md") {
        return [&code, model](const BitVec &s) { return md_decode(code, model, s); };
    }
    if (name == "mwpm") {
        if (!is_surface(code.family)) {
            throw UnsupportedFamily("mwpm needs a surface family");
        }
        return [&code, model](const BitVec &s) {
            try {
                return mwpm_decode(code, s);
            } catch (const TooManyDefects &) {
                return md_decode(code, model, s);
            }
        };
    }
    throw ConfigError("unknown baseline decoder: " + name);
}

std::vector<ResultRow> run(const ExperimentConfig &config) {
    validate(config);
    using clock = std::chrono::steady_clock;
    std::string hash = config_hash(config);
    StabilizerCode code = stage("build-code", [&] { return build_code(config.family, config.d); });
    ResultRow base;
    base.config_hash = hash;
    base.family = family_name(config.family);
    base.d = config.d;
    base.scheme = config.scheme;
    base.p_train = config.p_train;
    base.trials = config.trials;
    auto seconds = [&](clock::time_point t0) {
        return config.record_wall_time ? std::chrono::duration<double>(clock::now() - t0).count() : 0.0;
    };

    std::vector<ResultRow> rows;
    if (config.model != ModelKind::none) {
        DiagnosisScheme scheme = stage("scheme", [&] { return build_scheme(code, config.scheme); });
        if (!scheme.faithful || !scheme.decomposable) {
            throw StageFailure("scheme", "scheme is not faithful and decomposable");
        }
        for (size_t size : config.dataset_sizes) {
            Dataset ds = stage("gen-data", [&] {
                return generate_dataset(code, scheme, NoiseModel(config.noise, config.p_train), size, config.data_seed);
            });
            TrainConfig tc;
            tc.epochs = config.epochs;
            tc.batch_size = config.batch_size;
            tc.seed = config.train_seed;
            tc.verbose = config.verbose;
            Network net = stage("train", [&] { return train_model(code, ds, config.model, config.arch, tc); });
            net.metadata["scheme"] = config.scheme;
            net.metadata["config_hash"] = hash;
            if (!config.model_dir.empty()) {
                stage("checkpoint", [&] {
                    std::filesystem::create_directories(config.model_dir);
                    net.save(config.model_dir + "/" + hash + "_" + std::to_string(size) + ".qnn");
                    return 0;
                });
            }
            NetworkPredictor predictor(code, config.model, net);
            for (double p : config.p_eval) {
                auto t0 = clock::now();
                RateEstimate est = stage("eval", [&] {
                    return logical_error_rate(code, scheme, predictor, NoiseModel(config.noise, p), config.trials,
                                              config.eval_seed);
                });
                ResultRow r = base;
                r.decoder = model_kind_name(config.model);
                r.p_eval = p;
                r.dataset_size = size;
                r.rate = est.rate;
                r.ci_low = est.ci_low;
                r.ci_high = est.ci_high;
                r.wall_seconds = seconds(t0);
                rows.push_back(r);
            }
        }
    }
    for (const auto &name : config.baselines) {
        for (double p : config.p_eval) {
            auto t0 = clock::now();
            NoiseModel model(config.noise, p);
            RateEstimate est = stage("baseline-eval", [&] {
                return logical_error_rate(code, model, config.trials, config.eval_seed,
                                          baseline_decoder(code, model, name));
            });
            ResultRow r = base;
            r.decoder = name;
            r.p_eval = p;
            r.dataset_size = 0;
            r.rate = est.rate;
            r.ci_low = est.ci_low;
            r.ci_high = est.ci_high;
            r.wall_seconds = seconds(t0);
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace topodecode
