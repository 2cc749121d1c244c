// signalgauge: dataset information measures, CNN sizing, training and
// statistics for MNIST / CIFAR-10 style image classification corpora.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "signalgauge/signalgauge.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct LoadedCorpus {
    sg::ImageDataset train_corpus; // official training corpus
    sg::ImageDataset test;         // official test set
};

LoadedCorpus load_corpus(const std::string& dataset_id, const std::string& data_dir) {
    LoadedCorpus out;
    if (dataset_id == "mnist") {
        out.train_corpus = sg::load_mnist(data_dir + "/mnist/train-images-idx3-ubyte",
                                          data_dir + "/mnist/train-labels-idx1-ubyte");
        out.test = sg::load_mnist(data_dir + "/mnist/t10k-images-idx3-ubyte",
                                  data_dir + "/mnist/t10k-labels-idx1-ubyte");
    } else if (dataset_id == "cifar10") {
        std::vector<std::string> batches;
        for (int i = 1; i <= 5; ++i)
            batches.push_back(data_dir + "/cifar10/data_batch_" + std::to_string(i) + ".bin");
        out.train_corpus = sg::load_cifar10(batches);
        out.test = sg::load_cifar10({data_dir + "/cifar10/test_batch.bin"});
    } else {
        throw sg::UnknownDataset(dataset_id);
    }
    return out;
}

std::size_t default_train_count(const std::string& dataset_id) {
    return dataset_id == "mnist" ? 50000 : 40000;
}

json metrics_to_json(const sg::SignalMetrics& m) {
    return json{{"me_bits_per_pixel", m.me_bits_per_pixel},
                {"snr", m.snr},
                {"per_channel_me", m.per_channel_me},
                {"per_channel_snr", m.per_channel_snr},
                {"signal_mean", m.signal_mean},
                {"signal_std", m.signal_std},
                {"image_count", m.image_count}};
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    f << content;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        out.push_back(std::stoi(tok));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"signal information measures and CNN sizing for image datasets"};
    app.require_subcommand(1);

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "compute ME and SNR for a dataset");
    std::string an_dataset, an_data_dir, an_out;
    int an_radius = 0;
    bool an_per_image = false, an_per_class = false, an_all_splits = false;
    analyze->add_option("--dataset", an_dataset, "mnist|cifar10")->required();
    analyze->add_option("--data-dir", an_data_dir, "directory with mnist/ and cifar10/")
        ->required();
    analyze->add_option("--disk-radius", an_radius,
                        "disk neighborhood radius (default: image side length)");
    analyze->add_flag("--snr-per-image", an_per_image, "average per-image SNRs instead of pooling");
    analyze->add_flag("--per-class", an_per_class, "also emit per-class metrics");
    analyze->add_flag("--include-test", an_all_splits, "measure train+test instead of train only");
    analyze->add_option("--out", an_out, "write JSON here instead of stdout");

    // ---- recommend ----
    auto* recommend = app.add_subcommand("recommend", "recommend an architecture from metrics");
    std::string rc_metrics_file;
    double rc_me = -1.0, rc_snr = -1.0;
    int rc_h = 0, rc_w = 0, rc_c = 0, rc_classes = 10;
    std::size_t rc_budget = 0;
    recommend->add_option("--metrics", rc_metrics_file, "metrics JSON from `analyze`");
    recommend->add_option("--me", rc_me, "ME bits/pixel (alternative to --metrics)");
    recommend->add_option("--snr", rc_snr, "SNR (alternative to --metrics)");
    recommend->add_option("--height", rc_h)->required();
    recommend->add_option("--width", rc_w)->required();
    recommend->add_option("--channels", rc_c)->required();
    recommend->add_option("--classes", rc_classes);
    recommend->add_option("--budget", rc_budget, "cap on total parameter count");

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train one configuration");
    std::string tr_spec_file, tr_dataset, tr_data_dir, tr_checkpoints = "10,500,1000,1500,2000";
    std::string tr_model_out, tr_out;
    int tr_steps = 2000;
    std::uint64_t tr_seed = 1, tr_split_seed = 1;
    std::size_t tr_batch = 32, tr_subset = 0;
    double tr_lr = 0.01;
    train_cmd->add_option("--spec", tr_spec_file, "ArchitectureSpec JSON")->required();
    train_cmd->add_option("--dataset", tr_dataset, "mnist|cifar10")->required();
    train_cmd->add_option("--data-dir", tr_data_dir)->required();
    train_cmd->add_option("--steps", tr_steps);
    train_cmd->add_option("--seed", tr_seed);
    train_cmd->add_option("--split-seed", tr_split_seed);
    train_cmd->add_option("--checkpoints", tr_checkpoints, "comma-separated step counts");
    train_cmd->add_option("--batch", tr_batch);
    train_cmd->add_option("--lr", tr_lr);
    train_cmd->add_option("--subset", tr_subset, "train on only the first N split images");
    train_cmd->add_option("--save-model", tr_model_out, "write parameters here");
    train_cmd->add_option("--out", tr_out, "write RunResult JSON here instead of stdout");

    // ---- experiment ----
    auto* exp_cmd = app.add_subcommand("experiment", "run the published configuration grid");
    std::string ex_dataset, ex_data_dir, ex_out_dir, ex_seeds = "1,2,3";
    std::string ex_checkpoints = "10,500,1000,1500,2000";
    int ex_steps = 2000;
    std::size_t ex_subset = 0, ex_batch = 32;
    std::uint64_t ex_split_seed = 1;
    bool ex_extended = false;
    exp_cmd->add_option("--dataset", ex_dataset, "mnist|cifar10")->required();
    exp_cmd->add_option("--data-dir", ex_data_dir)->required();
    exp_cmd->add_option("--out", ex_out_dir, "run artifact + report directory")->required();
    exp_cmd->add_option("--steps", ex_steps);
    exp_cmd->add_option("--seeds", ex_seeds, "comma-separated seeds");
    exp_cmd->add_option("--checkpoints", ex_checkpoints);
    exp_cmd->add_option("--batch", ex_batch);
    exp_cmd->add_option("--subset", ex_subset, "train on only the first N split images");
    exp_cmd->add_option("--split-seed", ex_split_seed);
    exp_cmd->add_flag("--extended", ex_extended,
                      "allow the CIFAR-10 grid (long CPU wall time)");

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "pairwise t-tests over a report");
    std::string st_report, st_pairing = "seeds", st_out_dir = ".";
    stats_cmd->add_option("--report", st_report, "report.json from `experiment`")->required();
    stats_cmd->add_option("--pairing", st_pairing, "seeds|checkpoints");
    stats_cmd->add_option("--out", st_out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            LoadedCorpus corpus = load_corpus(an_dataset, an_data_dir);
            sg::ImageDataset measured = std::move(corpus.train_corpus);
            if (an_all_splits) {
                measured.pixels.insert(measured.pixels.end(), corpus.test.pixels.begin(),
                                       corpus.test.pixels.end());
                measured.labels.insert(measured.labels.end(), corpus.test.labels.begin(),
                                       corpus.test.labels.end());
            }
            const auto pooling =
                an_per_image ? sg::SnrPooling::PerImage : sg::SnrPooling::Pooled;
            sg::SignalMetrics m = sg::dataset_metrics(measured, an_radius, pooling);

            json out;
            out["dataset"] = an_dataset;
            out["disk_radius"] =
                an_radius > 0 ? an_radius : std::max(measured.height, measured.width);
            out["snr_pooling"] = an_per_image ? "per-image" : "pooled";
            out.update(metrics_to_json(m));
            if (an_per_class) {
                json pc;
                for (const auto& [cls, cm] : sg::per_class_metrics(measured, an_radius, pooling))
                    pc[std::to_string(cls)] =
                        cm.ok ? metrics_to_json(cm.metrics) : json{{"error", cm.error}};
                out["per_class"] = pc;
            }

            std::ostringstream md;
            md << "| dataset | ME (bits/pixel) | SNR |\n|---|---|---|\n| " << an_dataset
               << " | " << m.me_bits_per_pixel << " | " << m.snr << " |\n";
            if (!an_out.empty()) {
                write_file(an_out, out.dump(2) + "\n");
            } else {
                std::cout << out.dump(2) << "\n";
            }
            std::cout << md.str();
        } else if (*recommend) {
            sg::SignalMetrics m;
            if (!rc_metrics_file.empty()) {
                std::ifstream f(rc_metrics_file);
                json j;
                f >> j;
                m.me_bits_per_pixel = j.at("me_bits_per_pixel").get<double>();
                m.snr = j.at("snr").get<double>();
            } else if (rc_me >= 0.0 && rc_snr >= 0.0) {
                m.me_bits_per_pixel = rc_me;
                m.snr = rc_snr;
            } else {
                std::cerr << "need --metrics or both --me and --snr\n";
                return 1;
            }
            const sg::InformationRegime regime = sg::classify_regime(m);
            const sg::ArchitectureSpec spec =
                sg::recommend_architecture(m, rc_h, rc_w, rc_c, rc_classes, rc_budget);
            json out;
            out["regime"] = sg::regime_name(regime.regime);
            out["rationale"] = regime.rationale_text;
            out["configuration"] = sg::describe_config(spec);
            out["parameter_count"] = sg::parameter_count(spec);
            out["spec"] = spec;
            std::cout << out.dump(2) << "\n";
        } else if (*train_cmd) {
            std::ifstream f(tr_spec_file);
            json j;
            f >> j;
            sg::ArchitectureSpec spec = j.get<sg::ArchitectureSpec>();

            LoadedCorpus corpus = load_corpus(tr_dataset, tr_data_dir);
            auto [train_set, val_set] = sg::split_shuffle(
                corpus.train_corpus, default_train_count(tr_dataset), 10000, tr_split_seed);
            if (tr_subset > 0)
                train_set = sg::take_prefix(train_set, tr_subset);

            sg::Network net = sg::build_network(spec, tr_seed);
            sg::TrainOptions opt;
            opt.steps = tr_steps;
            opt.batch_size = tr_batch;
            opt.learning_rate = tr_lr;
            opt.checkpoint_steps = parse_int_list(tr_checkpoints);
            opt.seed = tr_seed;
            opt.test_set = &corpus.test;
            opt.config_id = sg::describe_config(spec);
            sg::RunResult r = sg::train(net, train_set, val_set, opt);
            if (!tr_model_out.empty())
                sg::save_params(net, tr_model_out);
            const std::string text = json(r).dump(2) + "\n";
            if (!tr_out.empty())
                write_file(tr_out, text);
            else
                std::cout << text;
        } else if (*exp_cmd) {
            if (ex_dataset == "cifar10" && !ex_extended && ex_subset == 0) {
                std::cerr << "the full CIFAR-10 grid takes hours on CPU; pass --extended to "
                             "confirm, or --subset N for a smoke run\n";
                return 1;
            }
            sg::ExperimentPlan plan = sg::builtin_grid(ex_dataset);
            plan.steps = ex_steps;
            plan.checkpoint_steps = parse_int_list(ex_checkpoints);
            plan.batch_size = ex_batch;
            plan.seeds.clear();
            for (int s : parse_int_list(ex_seeds))
                plan.seeds.push_back(static_cast<std::uint64_t>(s));

            LoadedCorpus corpus = load_corpus(ex_dataset, ex_data_dir);
            auto [train_set, val_set] = sg::split_shuffle(
                corpus.train_corpus, default_train_count(ex_dataset), 10000, ex_split_seed);
            if (ex_subset > 0)
                train_set = sg::take_prefix(train_set, ex_subset);

            sg::ExperimentReport report =
                sg::run_plan(plan, train_set, val_set, &corpus.test, ex_out_dir,
                             [](const std::string& msg) { std::cout << msg << "\n"; });

            write_file(ex_out_dir + "/table.md", sg::emit_table(report, sg::TableFormat::Markdown));
            write_file(ex_out_dir + "/table.csv", sg::emit_table(report, sg::TableFormat::Csv));
            write_file(ex_out_dir + "/report.json", json(report).dump(2) + "\n");
            std::cout << sg::emit_table(report, sg::TableFormat::Markdown);
        } else if (*stats_cmd) {
            std::ifstream f(st_report);
            json j;
            f >> j;
            sg::ExperimentReport report = j.get<sg::ExperimentReport>();
            const sg::Pairing pairing =
                st_pairing == "checkpoints" ? sg::Pairing::Checkpoints : sg::Pairing::Seeds;
            auto series = sg::accuracy_series(report, pairing);
            sg::SignificanceMatrix m = sg::significance_matrix(series);

            const std::size_t pairs = sg::unordered_pair_count(m);
            std::ostringstream md, csv;
            md << "# Pairwise two-tailed paired t-tests (" << st_pairing << " pairing)\n\n"
               << "| config A | config B | t | df | p | p<0.05 | Bonferroni p |\n"
               << "|---|---|---|---|---|---|---|\n";
            csv << "config_a,config_b,t,df,p,significant,bonferroni_p\n";
            for (std::size_t i = 0; i < m.size(); ++i) {
                for (std::size_t k = i + 1; k < m.size(); ++k) {
                    const sg::TTestReport& t = m[i][k];
                    // Bonferroni column is supplementary; the protocol itself
                    // applies no multiple-comparison correction.
                    const double bonf = std::min(1.0, t.p_value * double(pairs));
                    md << "| " << t.config_a << " | " << t.config_b << " | " << t.t_statistic
                       << " | " << t.degrees_of_freedom << " | " << t.p_value << " | "
                       << (t.significant ? "yes" : "no") << " | " << bonf << " |\n";
                    csv << '"' << t.config_a << "\",\"" << t.config_b << "\","
                        << t.t_statistic << "," << t.degrees_of_freedom << "," << t.p_value
                        << "," << (t.significant ? 1 : 0) << "," << bonf << "\n";
                }
            }
            fs::create_directories(st_out_dir);
            write_file(st_out_dir + "/significance.md", md.str());
            write_file(st_out_dir + "/significance.csv", csv.str());
            std::cout << md.str();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
