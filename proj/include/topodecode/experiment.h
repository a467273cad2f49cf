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

#ifndef TOPODECODE_EXPERIMENT_H
#define TOPODECODE_EXPERIMENT_H

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "topodecode/codes.h"
#include "topodecode/decode.h"
#include "topodecode/diagnosis.h"
#include "topodecode/nn.h"
#include "topodecode/noise.h"

namespace topodecode {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Wraps any error raised inside a pipeline stage.
struct StageFailure : std::runtime_error {
    StageFailure(std::string stage_, const std::string &what)
        : std::runtime_error(stage_ + ": " + what), stage(std::move(stage_)) {
    }
    std::string stage;
};

struct ArchitectureOverrides {
    size_t hidden = 0;  // 0 keeps the default width
    size_t layers = 0;  // 0 keeps the default depth
    bool batchnorm = false;
};

struct ExperimentConfig {
    Family family = Family::surface_rotated;
    size_t d = 3;
    NoiseKind noise = NoiseKind::bit_flip;
    double p_train = 0.1;
    std::vector<double> p_eval{0.1};
    std::string scheme = "uniform";  // uniform | short
    ModelKind model = ModelKind::mlp;
    ArchitectureOverrides arch;
    std::vector<size_t> dataset_sizes{10000};
    size_t epochs = 10;
    size_t batch_size = 100;
    uint64_t data_seed = 1;
    uint64_t train_seed = 2;
    uint64_t eval_seed = 3;
    size_t trials = 10000;
    std::vector<std::string> baselines;  // md | mwpm
    bool record_wall_time = true;        // false writes 0 so reruns are byte-identical
    std::string model_dir;               // checkpoints go here when set
    bool verbose = false;
};

ExperimentConfig config_from_json(const nlohmann::json &j);
nlohmann::json config_to_json(const ExperimentConfig &c);
ExperimentConfig load_config(const std::string &path);
/// Hex digest of the canonical JSON form.
std::string config_hash(const ExperimentConfig &c);
/// Documented defaults, for --help.
std::string config_help();

struct ResultRow {
    std::string config_hash;
    std::string family;
    size_t d = 0;
    std::string scheme;
    std::string decoder;
    double p_train = 0;
    double p_eval = 0;
    size_t dataset_size = 0;
    size_t trials = 0;
    double rate = 0;
    double ci_low = 0;
    double ci_high = 0;
    double wall_seconds = 0;
};

std::string csv_header();
std::string csv_row(const ResultRow &r);
void write_csv(std::ostream &out, const std::vector<ResultRow> &rows);

DiagnosisScheme build_scheme(const StabilizerCode &code, const std::string &kind);

/// Architecture for a model kind, honoring overrides.
std::vector<LayerSpec> model_specs(const StabilizerCode &code, ModelKind kind, size_t outputs,
                                   const ArchitectureOverrides &arch);

/// Builds and trains a model from a dataset.
Network train_model(const StabilizerCode &code, const Dataset &ds, ModelKind kind, const ArchitectureOverrides &arch,
                    const TrainConfig &tc, TrainResult *trace = nullptr);

/// Baseline decoder by name; mwpm falls back to md past the matching cap.
Decoder baseline_decoder(const StabilizerCode &code, const NoiseModel &model, const std::string &name);

/// gen-data, train and eval for every dataset size, plus baseline evals.
std::vector<ResultRow> run(const ExperimentConfig &config);

}  // namespace topodecode

#endif
