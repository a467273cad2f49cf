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

#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "topodecode/baselines.h"
#include "topodecode/dataset.h"
#include "topodecode/decode.h"
#include "topodecode/experiment.h"

using namespace topodecode;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct CodeArgs {
    std::string family = "surface_rotated";
    size_t d = 3;
};

struct NoiseArgs {
    std::string kind = "bit_flip";
    double p = 0.1;
};

void add_code_args(CLI::App *cmd, CodeArgs &a) {
    cmd->add_option("--family", a.family, "surface_rotated | surface_unrotated | color_488 | color_666")
        ->capture_default_str();
    cmd->add_option("--d", a.d, "code distance (odd, >= 3)")->capture_default_str();
}

void add_noise_args(CLI::App *cmd, NoiseArgs &a) {
    cmd->add_option("--noise", a.kind, "bit_flip | depolarizing")->capture_default_str();
    cmd->add_option("--p", a.p, "physical error rate in [0,1)")->capture_default_str();
}

StabilizerCode make_code(const CodeArgs &a) {
    Family f;
    try {
        f = parse_family(a.family);
    } catch (const std::exception &e) {
        throw ConfigError(e.what());
    }
    try {
        return build_code(f, a.d);
    } catch (const InvalidDistance &e) {
        throw ConfigError(e.what());
    }
}

NoiseModel make_noise(const NoiseArgs &a) {
    try {
        return NoiseModel(parse_noise_kind(a.kind), a.p);
    } catch (const std::exception &e) {
        throw ConfigError(e.what());
    }
}

json rate_json(const RateEstimate &r, uint64_t seed) {
    return {{"rate", r.rate},     {"ci_low", r.ci_low}, {"ci_high", r.ci_high},
            {"trials", r.trials}, {"failures", r.failures}, {"seed", seed}};
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Neural and reference decoders for topological stabilizer codes"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 2 config error, 3 stage failure. TOPODECODE_THREADS caps worker threads.");

    CodeArgs code_args;
    NoiseArgs noise_args;
    std::string scheme_kind = "uniform";
    std::string out_path, data_path, model_path, config_path, decoder = "md", model_kind = "mlp";
    size_t count = 10000, trials = 10000, epochs = 10, batch = 100;
    uint64_t seed = 1;
    bool verify_distance = false, batchnorm = false, verbose = false;

    auto *info = app.add_subcommand("code-info", "print code parameters and check invariants");
    add_code_args(info, code_args);
    info->add_flag("--distance", verify_distance, "also compute the code distance by search");

    auto *analyze = app.add_subcommand("analyze-scheme", "diagnosis-scheme metrics m, M, N");
    add_code_args(analyze, code_args);
    analyze->add_option("--scheme", scheme_kind, "uniform | short")->capture_default_str();

    auto *gen = app.add_subcommand("gen-data", "sample a training set");
    add_code_args(gen, code_args);
    add_noise_args(gen, noise_args);
    gen->add_option("--scheme", scheme_kind, "uniform | short")->capture_default_str();
    gen->add_option("--count", count, "number of samples")->capture_default_str();
    gen->add_option("--seed", seed, "sampling seed")->capture_default_str();
    gen->add_option("--out", out_path, "dataset file")->required();

    auto *trn = app.add_subcommand("train", "train a model on a dataset");
    trn->add_option("--data", data_path, "dataset file")->required();
    trn->add_option("--scheme", scheme_kind, "scheme the dataset was built with")->capture_default_str();
    trn->add_option("--model", model_kind, "mlp | cnn")->capture_default_str();
    trn->add_option("--epochs", epochs, "training epochs")->capture_default_str();
    trn->add_option("--batch", batch, "batch size")->capture_default_str();
    trn->add_option("--seed", seed, "initialization and shuffling seed")->capture_default_str();
    trn->add_flag("--batchnorm", batchnorm, "insert batch normalization after hidden layers");
    trn->add_flag("--verbose", verbose, "log each epoch");
    trn->add_option("--out", out_path, "checkpoint file (.qnn)")->required();

    auto *ev = app.add_subcommand("eval", "logical error rate of a trained model");
    ev->add_option("--model", model_path, "checkpoint file")->required();
    add_noise_args(ev, noise_args);
    ev->add_option("--trials", trials, "sampled errors")->capture_default_str();
    ev->add_option("--seed", seed, "sampling seed")->capture_default_str();

    auto *bev = app.add_subcommand("baseline-eval", "logical error rate of md or mwpm");
    add_code_args(bev, code_args);
    add_noise_args(bev, noise_args);
    bev->add_option("--decoder", decoder, "md | mwpm")->capture_default_str();
    bev->add_option("--trials", trials, "sampled errors")->capture_default_str();
    bev->add_option("--seed", seed, "sampling seed")->capture_default_str();

    auto *oev = app.add_subcommand("oracle-eval", "exact L2 pipeline and exact optimal decoder (n <= 13)");
    add_code_args(oev, code_args);
    add_noise_args(oev, noise_args);
    oev->add_option("--scheme", scheme_kind, "uniform | short")->capture_default_str();
    oev->add_option("--trials", trials, "sampled errors")->capture_default_str();
    oev->add_option("--seed", seed, "sampling seed")->capture_default_str();

    auto *sweep = app.add_subcommand("sweep", "run an experiment config and write CSV");
    sweep->add_option("--config", config_path, "JSON config file")->required();
    sweep->add_option("--out", out_path, "CSV output (stdout when omitted)");
    sweep->footer(config_help());

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*info) {
            StabilizerCode code = make_code(code_args);
            json j{{"family", family_name(code.family)}, {"n", code.n}, {"k", code.k}, {"d", code.d},
                   {"checks", code.num_checks()}};
            std::string bad = check_code_invariants(code);
            j["invariants_ok"] = bad.empty();
            if (!bad.empty()) {
                j["invariant_errors"] = bad;
            }
            if (verify_distance) {
                j["distance"] = code_distance(code, code.n);
            }
            if (is_surface(code.family)) {
                j["grid"] = {code.grid_rows, code.grid_cols};
            }
            json stabs = json::array();
            for (const auto &st : code.stabilizers) {
                stabs.push_back({{"type", std::string(1, st.type)}, {"x", st.pos.x}, {"y", st.pos.y},
                                 {"support", st.support}});
            }
            j["stabilizers"] = stabs;
            j["logicals"] = {{"x", code.g.row(0).str()}, {"z", code.g.row(1).str()}};
            std::cout << j.dump(2) << "\n";
        } else if (*analyze) {
            StabilizerCode code = make_code(code_args);
            DiagnosisScheme s = build_scheme(code, scheme_kind);
            json j{{"scheme", s.kind},
                   {"faithful", s.faithful},
                   {"decomposable", s.decomposable},
                   {"m", s.metrics.m},
                   {"M", s.metrics.M},
                   {"M_unconstrained", s.metrics.M_unconstrained},
                   {"N", s.metrics.N},
                   {"row_count", s.num_labels()},
                   {"lower_bound_2d_over_n", 2.0 * (double)code.d / (double)code.n},
                   {"id", s.id()}};
            std::cout << j.dump(2) << "\n";
        } else if (*gen) {
            StabilizerCode code = make_code(code_args);
            NoiseModel noise = make_noise(noise_args);
            DiagnosisScheme s = build_scheme(code, scheme_kind);
            Dataset ds = generate_dataset(code, s, noise, count, seed);
            write_dataset(ds, out_path);
            std::cout << json{{"out", out_path}, {"count", count}, {"label_bits", s.num_labels()}}.dump() << "\n";
        } else if (*trn) {
            Dataset ds = read_dataset(data_path);
            StabilizerCode code = build_code(parse_family(ds.header().family), ds.header().d);
            DiagnosisScheme s = build_scheme(code, scheme_kind);
            if (s.id() != ds.header().scheme_id) {
                throw ConfigError("dataset was not generated with the " + scheme_kind + " scheme");
            }
            ModelKind kind = parse_model_kind(model_kind);
            if (kind == ModelKind::none) {
                throw ConfigError("train needs --model mlp or cnn");
            }
            TrainConfig tc;
            tc.epochs = epochs;
            tc.batch_size = batch;
            tc.seed = seed;
            tc.verbose = verbose;
            ArchitectureOverrides arch;
            arch.batchnorm = batchnorm;
            TrainResult tr;
            Network net = train_model(code, ds, kind, arch, tc, &tr);
            net.metadata["scheme"] = scheme_kind;
            net.metadata["noise"] = {{"kind", noise_kind_name(ds.header().noise.kind)}, {"p", ds.header().noise.p}};
            net.save(out_path);
            std::cout << json{{"out", out_path}, {"loss_trace", tr.loss_trace}}.dump() << "\n";
        } else if (*ev) {
            Network net = Network::load(model_path);
            const json &meta = net.metadata;
            StabilizerCode code = build_code(parse_family(meta.at("family")), meta.at("d").get<size_t>());
            DiagnosisScheme s = build_scheme(code, meta.at("scheme"));
            ModelKind kind = parse_model_kind(meta.at("model"));
            NetworkPredictor pred(code, kind, net);
            NoiseModel noise = make_noise(noise_args);
            RateEstimate r = logical_error_rate(code, s, pred, noise, trials, seed);
            json j = rate_json(r, seed);
            j["config"] = {{"model", model_path}, {"noise", noise_args.kind}, {"p", noise_args.p}, {"meta", meta}};
            std::cout << j.dump(2) << "\n";
        } else if (*bev) {
            StabilizerCode code = make_code(code_args);
            NoiseModel noise = make_noise(noise_args);
            RateEstimate r = logical_error_rate(code, noise, trials, seed, baseline_decoder(code, noise, decoder));
            json j = rate_json(r, seed);
            j["config"] = {{"family", code_args.family}, {"d", code_args.d}, {"decoder", decoder},
                           {"noise", noise_args.kind}, {"p", noise_args.p}};
            std::cout << j.dump(2) << "\n";
        } else if (*oev) {
            StabilizerCode code = make_code(code_args);
            NoiseModel noise = make_noise(noise_args);
            DiagnosisScheme s = build_scheme(code, scheme_kind);
            ExactL2Predictor l2(code, s, noise);
            RateEstimate pipeline = logical_error_rate(code, s, l2, noise, trials, seed);
            RateEstimate optimal = logical_error_rate(code, noise, trials, seed, [&](const BitVec &syn) {
                return pure_error(code, syn) ^ class_operator(code, exact_optimal_class(code, noise, syn));
            });
            json j{{"l2_pipeline", rate_json(pipeline, seed)}, {"optimal", rate_json(optimal, seed)}};
            j["config"] = {{"family", code_args.family}, {"d", code_args.d}, {"scheme", scheme_kind},
                           {"noise", noise_args.kind}, {"p", noise_args.p}};
            std::cout << j.dump(2) << "\n";
        } else if (*sweep) {
            ExperimentConfig cfg = load_config(config_path);
            auto rows = run(cfg);
            if (out_path.empty()) {
                write_csv(std::cout, rows);
            } else {
                std::ofstream out(out_path);
                if (!out) {
                    throw ConfigError("cannot write " + out_path);
                }
                write_csv(out, rows);
            }
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StageFailure &e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return kExitStage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return 0;
}
