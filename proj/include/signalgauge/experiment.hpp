#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advisor.hpp"
#include "network.hpp"
#include "stats.hpp"

namespace sg {

struct ExperimentPlan {
    std::string dataset_id;
    std::vector<std::pair<std::string, ArchitectureSpec>> configs;
    int steps = 2000;
    std::vector<int> checkpoint_steps = {10, 500, 1000, 1500, 2000};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
};

struct ConfigResult {
    std::string config_id;
    std::vector<RunResult> runs;
    std::vector<std::string> failures; // one message per failed (seed) run
    std::vector<double> mean_checkpoint_accuracy;
    double mean_final_accuracy = 0.0;
};

struct ExperimentReport {
    std::string dataset_id;
    std::vector<int> checkpoint_steps;
    std::vector<ConfigResult> per_config;
    std::vector<TTestReport> comparisons;
};

// Table-style configuration description, e.g.
// "32-64 Convolutional kernels and 784-392 neuron FC layers".
inline std::string describe_config(const ArchitectureSpec& spec) {
    auto join = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? "-" : "") + std::to_string(v[i]);
        return s;
    };
    return join(spec.conv_blocks) + " Convolutional kernels and " + join(spec.fc_layers) +
           " neuron FC layer" + (spec.fc_layers.size() > 1 ? "s" : "");
}

// Inverse of describe_config for the stated input geometry.
inline ArchitectureSpec parse_config(const std::string& text, int height, int width,
                                     int channels, int num_classes = kNumClasses) {
    const std::string conv_sep = " Convolutional kernels and ";
    const std::string fc_sep = " neuron FC layer";
    const auto a = text.find(conv_sep);
    const auto b = text.find(fc_sep);
    if (a == std::string::npos || b == std::string::npos || b < a)
        throw DomainError("unparseable configuration: " + text);

    auto split = [](const std::string& s) {
        std::vector<int> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, '-'))
            out.push_back(std::stoi(tok));
        return out;
    };
    ArchitectureSpec spec;
    spec.conv_blocks = split(text.substr(0, a));
    spec.fc_layers = split(text.substr(a + conv_sep.size(), b - a - conv_sep.size()));
    spec.input_height = height;
    spec.input_width = width;
    spec.input_channels = channels;
    spec.num_classes = num_classes;
    return spec;
}

// The published configuration grid: 8 MNIST configs (conv [32] or [32,64]
// crossed with FC [784], [784,392], [784,512], [784,784]) and 6 CIFAR-10
// configs.
inline ExperimentPlan builtin_grid(const std::string& dataset_id) {
    ExperimentPlan plan;
    plan.dataset_id = dataset_id;

    auto add = [&](std::vector<int> conv, std::vector<int> fc, int side, int channels) {
        ArchitectureSpec spec;
        spec.conv_blocks = std::move(conv);
        spec.fc_layers = std::move(fc);
        spec.input_height = side;
        spec.input_width = side;
        spec.input_channels = channels;
        plan.configs.emplace_back(describe_config(spec), std::move(spec));
    };

    if (dataset_id == "mnist") {
        for (const auto& fc : std::vector<std::vector<int>>{
                 {784}, {784, 392}, {784, 512}, {784, 784}}) {
            add({32}, fc, 28, 1);
            add({32, 64}, fc, 28, 1);
        }
    } else if (dataset_id == "cifar10") {
        add({32}, {3072}, 32, 3);
        add({32, 64}, {3072, 3072}, 32, 3);
        add({32, 64}, {3072, 1536}, 32, 3);
        add({32, 64, 128}, {3072, 1024, 512}, 32, 3);
        add({32, 64, 128}, {3072, 1536, 768}, 32, 3);
        add({32, 64, 128}, {3072, 3072, 3072}, 32, 3);
    } else {
        throw UnknownDataset(dataset_id);
    }
    return plan;
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string run_file_name(const std::string& config_id, std::uint64_t seed) {
    std::ostringstream os;
    os << "run_" << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config_id)
       << "_s" << std::dec << seed << ".json";
    return os.str();
}

} // namespace detail

// Executes every (config, seed) run, persisting each RunResult as JSON under
// out_dir. Completed runs are skipped on restart; per-run failures are
// recorded in the report without aborting the plan.
inline ExperimentReport run_plan(const ExperimentPlan& plan, const ImageDataset& train_set,
                                 const ImageDataset& val_set, const ImageDataset* test_set,
                                 const std::string& out_dir,
                                 const std::function<void(const std::string&)>& progress = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    ExperimentReport report;
    report.dataset_id = plan.dataset_id;
    report.checkpoint_steps = plan.checkpoint_steps;

    for (const auto& [config_id, spec] : plan.configs) {
        ConfigResult cr;
        cr.config_id = config_id;
        for (std::uint64_t seed : plan.seeds) {
            const fs::path run_path = fs::path(out_dir) / detail::run_file_name(config_id, seed);
            if (fs::exists(run_path)) {
                std::ifstream f(run_path);
                nlohmann::json j;
                f >> j;
                cr.runs.push_back(j.get<RunResult>());
                if (progress)
                    progress(config_id + " seed " + std::to_string(seed) + ": cached");
                continue;
            }
            try {
                Network net = build_network(spec, seed);
                TrainOptions opt;
                opt.steps = plan.steps;
                opt.batch_size = plan.batch_size;
                opt.learning_rate = plan.learning_rate;
                opt.checkpoint_steps = plan.checkpoint_steps;
                opt.seed = seed;
                opt.test_set = test_set;
                opt.config_id = config_id;
                RunResult r = train(net, train_set, val_set, opt);
                {
                    std::ofstream f(run_path);
                    f << nlohmann::json(r).dump(2) << "\n";
                }
                cr.runs.push_back(std::move(r));
                if (progress)
                    progress(config_id + " seed " + std::to_string(seed) + ": done");
            } catch (const std::exception& e) {
                cr.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
                if (progress)
                    progress(config_id + " seed " + std::to_string(seed) + ": FAILED " +
                             e.what());
            }
        }
        if (!cr.runs.empty()) {
            cr.mean_checkpoint_accuracy.assign(plan.checkpoint_steps.size(), 0.0);
            for (const RunResult& r : cr.runs) {
                for (std::size_t i = 0;
                     i < r.checkpoint_accuracy.size() && i < cr.mean_checkpoint_accuracy.size();
                     ++i)
                    cr.mean_checkpoint_accuracy[i] += r.checkpoint_accuracy[i];
                cr.mean_final_accuracy += r.final_test_accuracy;
            }
            for (double& v : cr.mean_checkpoint_accuracy)
                v /= double(cr.runs.size());
            cr.mean_final_accuracy /= double(cr.runs.size());
        }
        report.per_config.push_back(std::move(cr));
    }
    return report;
}

inline void to_json(nlohmann::json& j, const TTestReport& t) {
    j = nlohmann::json{{"config_a", t.config_a},         {"config_b", t.config_b},
                       {"t_statistic", t.t_statistic},   {"degrees_of_freedom", t.degrees_of_freedom},
                       {"p_value", t.p_value},           {"significant", t.significant},
                       {"degenerate", t.degenerate}};
}

inline void from_json(const nlohmann::json& j, TTestReport& t) {
    j.at("config_a").get_to(t.config_a);
    j.at("config_b").get_to(t.config_b);
    j.at("t_statistic").get_to(t.t_statistic);
    j.at("degrees_of_freedom").get_to(t.degrees_of_freedom);
    j.at("p_value").get_to(t.p_value);
    j.at("significant").get_to(t.significant);
    t.degenerate = j.value("degenerate", false);
}

inline void to_json(nlohmann::json& j, const ConfigResult& c) {
    j = nlohmann::json{{"config_id", c.config_id},
                       {"runs", c.runs},
                       {"failures", c.failures},
                       {"mean_checkpoint_accuracy", c.mean_checkpoint_accuracy},
                       {"mean_final_accuracy", c.mean_final_accuracy}};
}

inline void from_json(const nlohmann::json& j, ConfigResult& c) {
    j.at("config_id").get_to(c.config_id);
    j.at("runs").get_to(c.runs);
    j.at("failures").get_to(c.failures);
    j.at("mean_checkpoint_accuracy").get_to(c.mean_checkpoint_accuracy);
    j.at("mean_final_accuracy").get_to(c.mean_final_accuracy);
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
    j = nlohmann::json{{"dataset_id", r.dataset_id},
                       {"checkpoint_steps", r.checkpoint_steps},
                       {"per_config", r.per_config},
                       {"comparisons", r.comparisons}};
}

inline void from_json(const nlohmann::json& j, ExperimentReport& r) {
    j.at("dataset_id").get_to(r.dataset_id);
    j.at("checkpoint_steps").get_to(r.checkpoint_steps);
    j.at("per_config").get_to(r.per_config);
    r.comparisons = j.value("comparisons", std::vector<TTestReport>{});
}

enum class TableFormat { Markdown, Csv, Json };

// One row per configuration: description, mean accuracy in percent to one
// decimal at each checkpoint. Byte-deterministic for a given report.
inline std::string emit_table(const ExperimentReport& report, TableFormat format) {
    if (report.per_config.empty())
        throw EmptyDataset("emit_table on empty report");

    auto pct = [](double v) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(1) << v * 100.0;
        return os.str();
    };

    std::ostringstream os;
    if (format == TableFormat::Json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const ConfigResult& c : report.per_config) {
            nlohmann::json row;
            row["configuration"] = c.config_id;
            row["steps"] = report.checkpoint_steps;
            nlohmann::json acc = nlohmann::json::array();
            for (double v : c.mean_checkpoint_accuracy)
                acc.push_back(pct(v));
            row["accuracy_percent"] = acc;
            rows.push_back(std::move(row));
        }
        os << rows.dump(2) << "\n";
        return os.str();
    }

    if (format == TableFormat::Markdown) {
        os << "| Configuration |";
        for (int s : report.checkpoint_steps)
            os << " " << s << " |";
        os << "\n|---|";
        for (std::size_t i = 0; i < report.checkpoint_steps.size(); ++i)
            os << "---|";
        os << "\n";
        for (const ConfigResult& c : report.per_config) {
            os << "| " << c.config_id << " |";
            for (double v : c.mean_checkpoint_accuracy)
                os << " " << pct(v) << " |";
            os << "\n";
        }
        return os.str();
    }

    os << "configuration";
    for (int s : report.checkpoint_steps)
        os << ",acc_at_" << s;
    os << "\n";
    for (const ConfigResult& c : report.per_config) {
        os << '"' << c.config_id << '"';
        for (double v : c.mean_checkpoint_accuracy)
            os << "," << pct(v);
        os << "\n";
    }
    return os.str();
}

// Accuracy vectors for pairwise tests: per-seed final accuracies, or the
// mean accuracy at each checkpoint column.
enum class Pairing { Seeds, Checkpoints };

inline std::vector<std::pair<std::string, std::vector<double>>> accuracy_series(
    const ExperimentReport& report, Pairing pairing) {
    std::vector<std::pair<std::string, std::vector<double>>> out;
    for (const ConfigResult& c : report.per_config) {
        std::vector<double> v;
        if (pairing == Pairing::Seeds) {
            for (const RunResult& r : c.runs)
                v.push_back(r.final_test_accuracy);
        } else {
            v = c.mean_checkpoint_accuracy;
        }
        out.emplace_back(c.config_id, std::move(v));
    }
    return out;
}

// The diagnostic joining significance counts with the classified regimes.
inline std::string regime_verdict(const SignificanceMatrix& mnist_like,
                                  const SignificanceMatrix& cifar_like,
                                  const SignalMetrics& mnist_metrics,
                                  const SignalMetrics& cifar_metrics,
                                  const RegimeBands& bands = RegimeBands{}) {
    std::ostringstream os;
    os << "# Regime verdict\n\n";
    auto block = [&](const char* title, const SignificanceMatrix& m,
                     const SignalMetrics& metrics) {
        const InformationRegime regime = classify_regime(metrics, bands);
        const std::size_t sig = count_significant_pairs(m);
        const std::size_t total = unordered_pair_count(m);
        os << "## " << title << "\n"
           << "- ME: " << metrics.me_bits_per_pixel << " bits/pixel, SNR: " << metrics.snr
           << "\n"
           << "- regime: " << regime_name(regime.regime) << " (" << regime.rationale_text
           << ")\n"
           << "- significant pairs: " << sig << " of " << total << "\n";
        if (regime.regime == Regime::Underflow) {
            os << "- verdict: "
               << (sig == 0 ? "underflow: configuration-insensitive"
                            : "inconsistent with the underflow hypothesis (flagged)")
               << "\n";
        } else if (regime.regime == Regime::Overflow) {
            os << "- verdict: "
               << (sig >= 1 ? "overflow: configuration-sensitive"
                            : "inconsistent with the overflow hypothesis (flagged)")
               << "\n";
        } else {
            os << "- verdict: balanced regime, no directional prediction\n";
        }
        os << "\n";
    };
    block("Low-information dataset", mnist_like, mnist_metrics);
    block("High-information dataset", cifar_like, cifar_metrics);
    return os.str();
}

} // namespace sg
