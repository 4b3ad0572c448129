#include "vmin/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "vmin/checkpoint.hpp"
#include "vmin/errors.hpp"
#include "vmin/pipeline.hpp"
#include "vmin/report.hpp"
#include "vmin/synth/generator.hpp"

namespace vmin {

namespace {

namespace fs = std::filesystem;

struct CommonTrainFlags {
    std::uint64_t seed = 1;
    std::int64_t epochs = 2000;
    bool paper_epochs = false;
    double lr = 1e-3;
    Index batch_size = 32;
    double lambda = 0.0;
    std::string freeze = "hidden";
    std::string target_mode = "multi";
    std::string features = "post+odo";
    std::string norm_scope = "train";
    double train_fraction = 0.75;
    std::int64_t patience = 0;  // 0 disables early stopping
};

void add_train_flags(CLI::App* cmd, CommonTrainFlags& f, double default_fraction) {
    f.train_fraction = default_fraction;
    cmd->add_option("--seed", f.seed, "Seed for split, init and batch order");
    cmd->add_option("--epochs", f.epochs, "Training epochs (desk-scale default 2000)");
    cmd->add_flag("--paper-epochs", f.paper_epochs, "Use the full 100k-epoch budget");
    cmd->add_option("--lr", f.lr, "Adam learning rate");
    cmd->add_option("--batch-size", f.batch_size, "Mini-batch size");
    cmd->add_option("--train-fraction", f.train_fraction, "Training split fraction");
    cmd->add_option("--target-mode", f.target_mode, "Target head: multi or average")
        ->check(CLI::IsMember({"multi", "average"}));
    cmd->add_option("--features", f.features, "Feature set: post or post+odo")
        ->check(CLI::IsMember({"post", "post+odo"}));
    cmd->add_option("--norm-scope", f.norm_scope, "Fit min/max on: train or all")
        ->check(CLI::IsMember({"train", "all"}));
    cmd->add_option("--patience", f.patience,
                    "Early-stop after this many epochs without improvement (0 = off)");
}

TrainConfig to_train_config(const CommonTrainFlags& f) {
    TrainConfig cfg;
    cfg.seed = f.seed;
    cfg.epochs = f.paper_epochs ? 100000 : f.epochs;
    cfg.lr = f.lr;
    cfg.batch_size = f.batch_size;
    cfg.lambda = f.lambda;
    if (f.patience > 0) cfg.early_stop_patience = f.patience;
    return cfg;
}

PipelineOptions to_pipeline_options(const CommonTrainFlags& f) {
    PipelineOptions opts;
    opts.train_fraction = f.train_fraction;
    opts.split_seed = f.seed;
    opts.target_mode = parse_target_mode(f.target_mode);
    opts.feature_set = parse_feature_set(f.features);
    opts.norm_scope = parse_norm_scope(f.norm_scope);
    return opts;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    SyntheticSpec spec =
        spec_path.empty() ? default_synthetic_spec() : load_synthetic_spec(spec_path);
    std::cout << describe(spec);
    const GeneratedPair pair = gen_pair(spec, out_dir);
    std::cout << "base manifest:   " << pair.base_manifest.string() << "\n";
    std::cout << "target manifest: " << pair.target_manifest.string() << "\n";
    return 0;
}

int cmd_pretrain(const std::string& manifest_path, const CommonTrainFlags& flags,
                 const std::string& out_path) {
    const Dataset ds = load_dataset(load_manifest(manifest_path));
    const PipelineOptions opts = to_pipeline_options(flags);
    const TrainConfig cfg = to_train_config(flags);

    const NnRun run = run_scratch_nn(ds, opts, cfg);
    save_checkpoint(run.ckpt, fs::path(out_path));
    write_train_report(out_path + ".report.json", run.report);

    std::cout << "pretrained " << run.report.executed_epochs << " epochs, final train loss "
              << run.report.final_train_loss << "\n";
    std::cout << format_result_table({run.result});
    return 0;
}

int cmd_transfer(const std::string& ckpt_path, const std::string& manifest_path,
                 const CommonTrainFlags& flags, const std::string& out_path) {
    const Checkpoint base_ckpt = load_checkpoint(fs::path(ckpt_path));
    const Dataset ds = load_dataset(load_manifest(manifest_path));
    const PipelineOptions opts = to_pipeline_options(flags);

    TrainConfig cfg = to_train_config(flags);
    if (flags.freeze == "hidden") {
        cfg.freeze_mask = {Block::Hidden};
    } else if (flags.freeze != "none") {
        throw ArgumentError("--freeze must be 'hidden' or 'none'");
    }

    const NnRun run = run_transferred_nn(ds, base_ckpt, opts, cfg);
    save_checkpoint(run.ckpt, fs::path(out_path));
    write_train_report(out_path + ".report.json", run.report);

    std::cout << "fine-tuned " << run.report.executed_epochs << " epochs (frozen:"
              << (run.report.frozen_blocks.empty() ? " none" : "") ;
    for (Block b : run.report.frozen_blocks) std::cout << " " << block_name(b);
    std::cout << ")\n" << format_result_table({run.result});
    return 0;
}

int cmd_baseline(const std::string& manifest_path, const std::string& model,
                 Index k_features, const CommonTrainFlags& flags, const std::string& out_path) {
    const Dataset ds = load_dataset(load_manifest(manifest_path));
    const PipelineOptions opts = to_pipeline_options(flags);
    const ExperimentResult result = run_baseline(ds, opts, model, k_features);
    if (!out_path.empty()) write_experiment_result(out_path, result);
    std::cout << format_result_table({result});
    return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& manifest_path,
                 const CommonTrainFlags& flags, const std::string& out_path) {
    const Checkpoint ckpt = load_checkpoint(fs::path(ckpt_path));
    const Dataset ds = load_dataset(load_manifest(manifest_path));
    const ExperimentResult result =
        evaluate_checkpoint(ckpt, ds, flags.train_fraction, flags.seed,
                            parse_target_mode(flags.target_mode));
    if (!out_path.empty()) write_experiment_result(out_path, result);
    std::cout << format_result_table({result});
    return 0;
}

int cmd_ablate(const std::string& ckpt_path, const std::string& manifest_path,
               const std::vector<std::uint64_t>& seeds, Index k_features,
               const CommonTrainFlags& flags, const std::string& out_dir) {
    const Checkpoint base_ckpt = load_checkpoint(fs::path(ckpt_path));
    const Dataset ds = load_dataset(load_manifest(manifest_path));

    AblationConfig cfg;
    if (!seeds.empty()) cfg.seeds = seeds;
    cfg.train_fraction = flags.train_fraction;
    cfg.train = to_train_config(flags);
    cfg.k_features = k_features;
    cfg.target_mode = parse_target_mode(flags.target_mode);
    cfg.norm_scope = parse_norm_scope(flags.norm_scope);

    const AblationReport report = run_ablation(ds, base_ckpt, cfg);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);
    write_ablation_report(fs::path(out_dir) / "ablation.json", report);

    std::cout << format_result_table(report.runs) << "\n"
              << format_summary_table(report.summary);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Transfer-learning pipeline for chip minimum-operating-voltage prediction"};
    app.require_subcommand(1);

    // synth
    std::string synth_spec, synth_out;
    CLI::App* synth = app.add_subcommand("synth", "Generate the paired synthetic datasets");
    synth->add_option("--spec", synth_spec, "Generator spec JSON (defaults built in)");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // pretrain
    std::string pre_manifest, pre_out;
    CommonTrainFlags pre_flags;
    CLI::App* pre = app.add_subcommand("pretrain", "Train the base-node model");
    pre->add_option("--manifest", pre_manifest, "Base-node dataset manifest")->required();
    pre->add_option("--out", pre_out, "Checkpoint output path")->required();
    add_train_flags(pre, pre_flags, 0.75);

    // transfer
    std::string tr_ckpt, tr_manifest, tr_out;
    CommonTrainFlags tr_flags;
    CLI::App* tr = app.add_subcommand("transfer", "Transplant the hidden block and fine-tune");
    tr->add_option("--ckpt", tr_ckpt, "Base checkpoint")->required();
    tr->add_option("--manifest", tr_manifest, "Target-node dataset manifest")->required();
    tr->add_option("--out", tr_out, "Checkpoint output path")->required();
    tr->add_option("--lambda", tr_flags.lambda,
                   "Soft L2-to-base weight on the hidden block (0 = off)");
    tr->add_option("--freeze", tr_flags.freeze, "Blocks to freeze: hidden or none")
        ->check(CLI::IsMember({"hidden", "none"}));
    add_train_flags(tr, tr_flags, 0.25);

    // baseline
    std::string bl_manifest, bl_model = "linear", bl_out;
    Index bl_k = 3;
    CommonTrainFlags bl_flags;
    CLI::App* bl = app.add_subcommand("baseline", "CFS + linear or boosted-trees baseline");
    bl->add_option("--manifest", bl_manifest, "Dataset manifest")->required();
    bl->add_option("--model", bl_model, "Baseline kind: linear or gbt")
        ->check(CLI::IsMember({"linear", "gbt"}));
    bl->add_option("--k-features", bl_k, "Features selected per pattern");
    bl->add_option("--out", bl_out, "Result JSON output path");
    add_train_flags(bl, bl_flags, 0.25);

    // evaluate
    std::string ev_ckpt, ev_manifest, ev_out;
    CommonTrainFlags ev_flags;
    CLI::App* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on a held-out split");
    ev->add_option("--ckpt", ev_ckpt, "Checkpoint to evaluate")->required();
    ev->add_option("--manifest", ev_manifest, "Dataset manifest")->required();
    ev->add_option("--out", ev_out, "Result JSON output path");
    add_train_flags(ev, ev_flags, 0.25);

    // ablate
    std::string ab_ckpt, ab_manifest, ab_out;
    std::vector<std::uint64_t> ab_seeds;
    Index ab_k = 3;
    CommonTrainFlags ab_flags;
    CLI::App* ab = app.add_subcommand("ablate", "Run the full arm matrix over several seeds");
    ab->add_option("--ckpt", ab_ckpt, "Base checkpoint")->required();
    ab->add_option("--manifest", ab_manifest, "Target-node dataset manifest")->required();
    ab->add_option("--out", ab_out, "Output directory")->required();
    ab->add_option("--seeds", ab_seeds, "Seeds, e.g. --seeds 1 2 3 4 5")->delimiter(',');
    ab->add_option("--k-features", ab_k, "Features per pattern for the baselines");
    add_train_flags(ab, ab_flags, 0.25);

    std::vector<const char*> argv;
    argv.push_back("vmin");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
        if (pre->parsed()) return cmd_pretrain(pre_manifest, pre_flags, pre_out);
        if (tr->parsed()) return cmd_transfer(tr_ckpt, tr_manifest, tr_flags, tr_out);
        if (bl->parsed()) return cmd_baseline(bl_manifest, bl_model, bl_k, bl_flags, bl_out);
        if (ev->parsed()) return cmd_evaluate(ev_ckpt, ev_manifest, ev_flags, ev_out);
        if (ab->parsed()) return cmd_ablate(ab_ckpt, ab_manifest, ab_seeds, ab_k, ab_flags, ab_out);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const TransplantError& e) {
        std::cerr << "transfer incompatibility: " << e.what() << "\n";
        return 4;
    } catch (const TrainingError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace vmin
