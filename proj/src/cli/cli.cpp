#include "stiction/cli.hpp"

#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace stiction::cli {
namespace {

void add_training_options(CLI::App* cmd, TrainingOptions& t) {
  cmd->add_option("--seed", t.seed, "Seed for initialisation and shuffling")->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "Maximum epochs")->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--patience", t.patience, "Early-stopping patience in epochs")->capture_default_str();
  cmd->add_option("--batch", t.batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--class-weight", t.class_weight,
                  "Loss weight of the training minority class: a number or 'balanced'")
      ->capture_default_str();
  cmd->add_option("--reduce", t.reduce, "Divide every layer width by this factor")->capture_default_str();
  cmd->add_option("--svm-c", t.svm_c, "SVM box constraint (cnn_svm)")->capture_default_str();
  cmd->add_option("--svm-gamma", t.svm_gamma, "RBF gamma (cnn_svm; default 1/(d * mean variance))");
  cmd->add_option("--svm-max-rows", t.svm_max_rows, "Training rows subsampled for the SVM (cnn_svm)")
      ->capture_default_str();
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (category_of(kind)) {
    case ErrorCategory::usage: return kExitUsage;
    case ErrorCategory::numeric: return kExitNumeric;
    case ErrorCategory::data: break;
  }
  return kExitData;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Valve stiction labelling, detection and early prediction from OP/PV series"};
  app.name(args.empty() ? "stiction" : args.front());
  app.set_version_flag("--version", STICTION_VERSION);
  app.require_subcommand(1, 1);

  Context ctx;
  ctx.argv = args;
  ctx.out = &out;
  ctx.err = &err;
  const char* verbose = std::getenv("STICTION_VERBOSE");
  ctx.verbose = verbose != nullptr && *verbose != '\0' && std::string_view(verbose) != "0";
  app.add_flag("--serial", ctx.serial, "Run kernels on one thread (results are identical)");

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a PI loop from a config; writes op/pv/series/ground truth");
  c_sim->add_option("--config", sim.config, "Simulation config (.ini)")->required();
  c_sim->add_option("--out", sim.out_dir, "Output directory")->required();

  IngestOptions ing;
  auto* c_ing = app.add_subcommand("ingest", "Align raw OP and PV tables on a one-minute axis");
  c_ing->add_option("--op", ing.op, "OP table (timestamp,value)")->required();
  c_ing->add_option("--pv", ing.pv, "PV table (timestamp,value)")->required();
  c_ing->add_option("--out", ing.out, "Unified series output (.csv)")->required();
  c_ing->add_option("--op-unit", ing.op_unit, "Unit recorded for OP");
  c_ing->add_option("--pv-unit", ing.pv_unit, "Unit recorded for PV");

  LabelOptions lab;
  auto* c_lab = app.add_subcommand("label", "Label windows of a unified series");
  c_lab->add_option("--in", lab.in, "Unified series (.csv)")->required();
  c_lab->add_option("--out", lab.out, "Labels output (.csv)")->required();
  c_lab->add_option("--method", lab.method, "slope_ratio | t2 | ground_truth")->capture_default_str();
  c_lab->add_option("--n", lab.n, "Windows averaged by the slope-ratio index")->capture_default_str();
  c_lab->add_option("--window", lab.window, "Window length in minutes")->capture_default_str();
  c_lab->add_option("--percentile", lab.percentile, "T2 threshold percentile")->capture_default_str();
  c_lab->add_option("--pv-slope-epsilon", lab.pv_slope_epsilon, "PV slopes below this give a zero ratio")
      ->capture_default_str();
  c_lab->add_option("--ridge", lab.ridge, "T2 covariance ridge (default 1e-6 * trace / 6)");
  c_lab->add_option("--ground-truth", lab.ground_truth, "Ground-truth table (ground_truth method)");

  DatasetOptions dat;
  auto* c_dat = app.add_subcommand("dataset", "Build a normalised, split window dataset");
  c_dat->add_option("--in", dat.in, "Unified series (.csv)")->required();
  c_dat->add_option("--labels", dat.labels, "Window labels (.csv)")->required();
  c_dat->add_option("--out", dat.out, "Dataset output (binary)")->required();
  c_dat->add_option("--mode", dat.mode, "detect | predict")->capture_default_str();
  c_dat->add_option("--detect", dat.detect, "Input windows D (1-4)")->capture_default_str();
  c_dat->add_option("--lookahead", dat.lookahead, "Lookahead windows K (1-4, predict mode)")->capture_default_str();
  c_dat->add_option("--model-len", dat.model_len, "Rows kept per window")->capture_default_str();
  c_dat->add_option("--window", dat.window, "Window length in minutes")->capture_default_str();

  TrainOptions trn;
  auto* c_trn = app.add_subcommand("train", "Train a model on a dataset");
  c_trn->add_option("--arch", trn.arch, "cnn | lstm | cnn_svm")->required();
  c_trn->add_option("--dataset", trn.dataset, "Dataset (binary)")->required();
  c_trn->add_option("--out", trn.out, "Checkpoint output")->required();
  add_training_options(c_trn, trn.training);

  ApplyOptions det;
  auto* c_det = app.add_subcommand("detect", "Run a model on a detect dataset; writes trace and report");
  ApplyOptions pre;
  auto* c_pre = app.add_subcommand("predict", "Run a model on a predict dataset; writes trace and report");
  for (auto [cmd, o] : {std::pair{c_det, &det}, std::pair{c_pre, &pre}}) {
    cmd->add_option("--model", o->model, "Checkpoint")->required();
    cmd->add_option("--dataset", o->dataset, "Dataset (binary)")->required();
    cmd->add_option("--out", o->out, "Trace output (.csv)")->required();
    cmd->add_option("--report", o->report, "Metric report (default <out>.report.txt)");
    cmd->add_option("--block", o->block, "test | all")->capture_default_str();
  }

  HeatmapOptions hm;
  auto* c_hm = app.add_subcommand("heatmap", "Accuracy grid over detect (D) and lookahead (K) windows");
  c_hm->add_option("--arch", hm.arch, "cnn | lstm | cnn_svm")->required();
  c_hm->add_option("--in", hm.in, "Unified series (.csv)")->required();
  c_hm->add_option("--labels", hm.labels, "Window labels (.csv)")->required();
  c_hm->add_option("--out", hm.out, "Grid output (.csv)")->required();
  c_hm->add_option("--model-len", hm.model_len, "Rows kept per window")->capture_default_str();
  c_hm->add_option("--window", hm.window, "Window length in minutes")->capture_default_str();
  add_training_options(c_hm, hm.training);

  EvaluateOptions ev;
  auto* c_ev = app.add_subcommand("evaluate", "Metric report from a trace");
  c_ev->add_option("--trace", ev.trace, "Trace (.csv)")->required();
  c_ev->add_option("--out", ev.out, "Report output")->required();

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << STICTION_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << to_string(ErrorKind::InvalidArgument) << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (c_sim->parsed()) run_simulate(ctx, sim);
    else if (c_ing->parsed()) run_ingest(ctx, ing);
    else if (c_lab->parsed()) run_label(ctx, lab);
    else if (c_dat->parsed()) run_dataset(ctx, dat);
    else if (c_trn->parsed()) run_train(ctx, trn);
    else if (c_det->parsed()) run_apply(ctx, det, false);
    else if (c_pre->parsed()) run_apply(ctx, pre, true);
    else if (c_hm->parsed()) run_heatmap(ctx, hm);
    else if (c_ev->parsed()) run_evaluate(ctx, ev);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << to_string(ErrorKind::IoFailure) << ": " << e.what() << '\n';
    return kExitData;
  } catch (const std::bad_alloc&) {
    err << "error: " << to_string(ErrorKind::NumericFailure) << ": out of memory\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace stiction::cli
