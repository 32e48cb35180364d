#include "commands.hpp"

#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

#include "manifest.hpp"
#include "stiction/checkpoint.hpp"
#include "stiction/config.hpp"
#include "stiction/error.hpp"
#include "stiction/evaluation.hpp"
#include "stiction/labeling.hpp"
#include "stiction/loopsim.hpp"
#include "stiction/models.hpp"
#include "stiction/nn/training.hpp"
#include "stiction/seriesio.hpp"
#include "stiction/windowing.hpp"

namespace stiction::cli {
namespace {

using nlohmann::json;

std::ifstream open_input(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  return in;
}

std::string read_text(const fs::path& path) {
  std::ifstream in = open_input(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_manifest(OutputSet& outputs, const fs::path& path, RunManifest& manifest) {
  for (const auto& f : outputs.files()) manifest.output(f);
  outputs.write(path, [&](std::ostream& os) { os << manifest.finish().dump(2) << '\n'; });
}

ExecutionPolicy policy_of(const Context& ctx) {
  return ctx.serial ? ExecutionPolicy::serial : ExecutionPolicy::parallel;
}

UniformSeries load_series(const fs::path& path) {
  std::ifstream in = open_input(path);
  return read_unified(in);
}

std::vector<LabeledWindow> load_labels(const fs::path& path, Minute t0) {
  std::ifstream in = open_input(path);
  return read_labels(in, t0);
}

WindowDataset load_dataset(const fs::path& path) {
  std::ifstream in = open_input(path, true);
  return read_dataset(in);
}

void write_raw(std::ostream& os, const UniformSeries& s, const std::vector<double>& values) {
  os << "timestamp,value\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    os << format_timestamp(s.time_at(i)) << ',' << format_double(values[i]) << '\n';
}

void report_diagnostics(const Context& ctx, const fs::path& path, const RawSeries& raw) {
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < raw.diagnostics.size() && i < kShown; ++i) {
    const auto& d = raw.diagnostics[i];
    *ctx.err << "warning: " << path.string() << ':' << d.line << ": " << to_string(d.kind) << ": " << d.message
             << '\n';
  }
  if (raw.diagnostics.size() > kShown)
    *ctx.err << "warning: " << path.string() << ": " << raw.diagnostics.size() - kShown << " more rows skipped\n";
}

void record_training(RunManifest& m, const TrainingOptions& t) {
  m.argument("seed", t.seed);
  m.argument("epochs", t.epochs);
  m.argument("learning_rate", t.learning_rate);
  m.argument("patience", t.patience);
  m.argument("batch", t.batch);
  m.argument("class_weight", t.class_weight);
  m.argument("reduce", t.reduce);
  m.argument("svm_c", t.svm_c);
  m.argument("svm_gamma", t.svm_gamma ? json(*t.svm_gamma) : json(nullptr));
  m.argument("svm_max_rows", t.svm_max_rows);
  m.seed(t.seed);
}

ModelTrainConfig training_config(const Context& ctx, const TrainingOptions& t, std::span<const int> train_labels) {
  ModelTrainConfig cfg;
  cfg.train.max_epochs = t.epochs;
  cfg.train.learning_rate = t.learning_rate;
  cfg.train.patience = t.patience;
  cfg.train.batch_size = t.batch;
  cfg.train.seed = t.seed;
  cfg.train.policy = policy_of(ctx);
  if (t.class_weight == "balanced") {
    cfg.train.class_weight = nn::balanced_class_weight(train_labels);
  } else {
    cfg.train.class_weight = parse_double(t.class_weight)
                                 .value_or(std::numeric_limits<double>::quiet_NaN());
    if (!(cfg.train.class_weight > 0.0))
      fail(ErrorKind::InvalidArgument, "--class-weight must be a positive number or 'balanced'");
  }
  cfg.svm.c = t.svm_c;
  cfg.svm.gamma = t.svm_gamma;
  cfg.svm.policy = policy_of(ctx);
  cfg.svm_max_rows = t.svm_max_rows;
  return cfg;
}

ArchitectureSpec architecture(const std::string& arch, int reduce) {
  if (reduce < 1) fail(ErrorKind::InvalidArgument, "--reduce must be at least 1");
  return ArchitectureSpec::defaults(parse_model_kind(arch)).reduced(static_cast<std::size_t>(reduce));
}

}  // namespace

void run_simulate(const Context& ctx, const SimulateOptions& o) {
  RunManifest manifest("simulate", ctx.argv);
  manifest.argument("config", o.config.string());
  manifest.argument("out", o.out_dir.string());
  const std::string text = read_text(o.config);
  manifest.input(o.config);
  manifest.config_snapshot(text);

  std::istringstream cfg(text);
  const SimulationPlan plan = parse_simulation_plan(parse_config(cfg));
  const SimulatedDataset ds = make_dataset(plan.episodes, plan.start);
  json episodes = json::array();
  for (std::size_t i = 0; i < plan.episodes.size(); ++i) {
    const auto& e = plan.episodes[i];
    episodes.push_back({{"offset", e.start_offset},
                        {"duration", e.loop.duration},
                        {"seed", e.loop.seed},
                        {"deadband", e.stiction.deadband},
                        {"slip_jump", e.stiction.slip_jump}});
  }
  manifest.note("episodes", episodes);
  if (!plan.episodes.empty()) manifest.seed(plan.episodes.front().loop.seed);

  OutputSet outputs;
  outputs.ensure_directory(o.out_dir);
  outputs.write(o.out_dir / "op.csv", [&](std::ostream& os) { write_raw(os, ds.series, ds.series.op); });
  outputs.write(o.out_dir / "pv.csv", [&](std::ostream& os) { write_raw(os, ds.series, ds.series.pv); });
  outputs.write(o.out_dir / "series.csv", [&](std::ostream& os) { write_unified(os, ds.series); });
  outputs.write(o.out_dir / "ground_truth.csv",
                [&](std::ostream& os) { write_ground_truth(os, ds.series.t0, ds.ground_truth); });
  write_manifest(outputs, o.out_dir / "manifest.json", manifest);
  outputs.commit();
  *ctx.out << "simulated " << ds.series.size() << " minutes in " << plan.episodes.size() << " episodes -> "
           << o.out_dir.string() << '\n';
}

void run_ingest(const Context& ctx, const IngestOptions& o) {
  RunManifest manifest("ingest", ctx.argv);
  manifest.argument("op", o.op.string());
  manifest.argument("pv", o.pv.string());
  manifest.argument("out", o.out.string());
  manifest.argument("op_unit", o.op_unit);
  manifest.argument("pv_unit", o.pv_unit);

  RawSeries op, pv;
  {
    std::ifstream in = open_input(o.op);
    op = parse_raw(in, SignalKind::op, o.op_unit);
  }
  {
    std::ifstream in = open_input(o.pv);
    pv = parse_raw(in, SignalKind::pv, o.pv_unit);
  }
  manifest.input(o.op);
  manifest.input(o.pv);
  report_diagnostics(ctx, o.op, op);
  report_diagnostics(ctx, o.pv, pv);
  manifest.note("skipped_rows", {{"op", op.diagnostics.size()}, {"pv", pv.diagnostics.size()}});

  const UniformSeries series = merge_op_pv(op, pv);
  OutputSet outputs;
  outputs.write(o.out, [&](std::ostream& os) { write_unified(os, series); });
  write_manifest(outputs, manifest_path_for(o.out), manifest);
  outputs.commit();
  *ctx.out << "ingested " << series.size() << " minutes from " << format_timestamp(series.t0) << " -> "
           << o.out.string() << '\n';
}

void run_label(const Context& ctx, const LabelOptions& o) {
  RunManifest manifest("label", ctx.argv);
  manifest.argument("in", o.in.string());
  manifest.argument("out", o.out.string());
  manifest.argument("method", o.method);
  manifest.argument("window", o.window);

  const LabelMethod method = parse_label_method(o.method);
  const UniformSeries series = load_series(o.in);
  manifest.input(o.in);

  std::vector<LabeledWindow> labels;
  switch (method) {
    case LabelMethod::slope_ratio: {
      SlopeRatioConfig cfg;
      cfg.window_minutes = o.window;
      cfg.n_consecutive = o.n;
      cfg.pv_slope_epsilon = o.pv_slope_epsilon;
      manifest.argument("n", o.n);
      manifest.argument("pv_slope_epsilon", o.pv_slope_epsilon);
      labels = slope_ratio_labels(series, cfg);
      break;
    }
    case LabelMethod::hotelling_t2: {
      T2Config cfg;
      cfg.window_minutes = o.window;
      cfg.percentile = o.percentile;
      cfg.ridge_lambda = o.ridge;
      manifest.argument("percentile", o.percentile);
      manifest.argument("ridge", o.ridge ? json(*o.ridge) : json(nullptr));
      labels = t2_labels(series, cfg);
      break;
    }
    case LabelMethod::ground_truth: {
      if (o.ground_truth.empty()) fail(ErrorKind::InvalidArgument, "--ground-truth is required for this method");
      std::ifstream in = open_input(o.ground_truth);
      const auto flags = read_ground_truth(in, series.t0);
      if (flags.size() != series.size())
        fail(ErrorKind::LengthMismatch, "ground truth and series differ in length");
      manifest.argument("ground_truth", o.ground_truth.string());
      manifest.input(o.ground_truth);
      labels = ground_truth_labels(flags, o.window);
      break;
    }
  }

  std::size_t positives = 0;
  for (const auto& l : labels) positives += static_cast<std::size_t>(l.label);
  manifest.note("windows", labels.size());
  manifest.note("positive_windows", positives);

  OutputSet outputs;
  outputs.write(o.out, [&](std::ostream& os) { write_labels(os, labels, series.t0); });
  write_manifest(outputs, manifest_path_for(o.out), manifest);
  outputs.commit();
  *ctx.out << "labelled " << labels.size() << " windows (" << positives << " stiction) with " << o.method << " -> "
           << o.out.string() << '\n';
}

void run_dataset(const Context& ctx, const DatasetOptions& o) {
  RunManifest manifest("dataset", ctx.argv);
  manifest.argument("in", o.in.string());
  manifest.argument("labels", o.labels.string());
  manifest.argument("out", o.out.string());
  manifest.argument("mode", o.mode);
  manifest.argument("detect", o.detect);
  manifest.argument("lookahead", o.lookahead);
  manifest.argument("model_len", o.model_len);
  manifest.argument("window", o.window);

  const DatasetMode mode = parse_dataset_mode(o.mode);
  WindowSpec spec;
  spec.base_minutes = o.window;
  spec.stride_minutes = o.window;
  spec.model_len = o.model_len;
  spec.detect = o.detect;
  spec.lookahead = o.lookahead;
  spec.validate();

  const UniformSeries series = load_series(o.in);
  manifest.input(o.in);
  const auto labels = load_labels(o.labels, series.t0);
  manifest.input(o.labels);

  const auto samples = mode == DatasetMode::detect ? segment_detection_samples(series, labels, spec)
                                                   : pair_detect_lookahead(series, labels, spec);
  const WindowDataset data = split_normalize(samples, spec, mode, series.t0);
  std::ostringstream summary;
  write_dataset_manifest(summary, data);
  manifest.note("summary", summary.str());

  OutputSet outputs;
  outputs.write(o.out, [&](std::ostream& os) { write_dataset(os, data); }, true);
  write_manifest(outputs, manifest_path_for(o.out), manifest);
  outputs.commit();
  *ctx.out << "built " << data.size() << " " << o.mode << " samples (train " << data.train_end << ", val "
           << data.val_end - data.train_end << ", test " << data.size() - data.val_end << ") -> " << o.out.string()
           << '\n';
}

void run_train(const Context& ctx, const TrainOptions& o) {
  RunManifest manifest("train", ctx.argv);
  manifest.argument("arch", o.arch);
  manifest.argument("dataset", o.dataset.string());
  manifest.argument("out", o.out.string());
  record_training(manifest, o.training);

  const ArchitectureSpec spec = architecture(o.arch, o.training.reduce);
  const WindowDataset data = load_dataset(o.dataset);
  manifest.input(o.dataset);
  ModelTrainConfig cfg = training_config(ctx, o.training, std::span(data.labels).first(data.train_end));
  manifest.note("effective_class_weight", cfg.train.class_weight);

  const Model model = train_model(spec, data, cfg, o.training.seed);
  if (ctx.verbose)
    for (const auto& e : model.history.epochs)
      *ctx.err << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << '\n';
  manifest.note("epochs_run", model.history.epochs.size());
  manifest.note("best_epoch", model.history.best_epoch);
  manifest.note("stopped_early", model.history.stopped_early);

  OutputSet outputs;
  outputs.write(o.out, [&](std::ostream& os) { save_model(os, model); }, true);
  outputs.write(sibling(o.out, ".history.csv"), [&](std::ostream& os) { os << history_table(model.history); });
  write_manifest(outputs, manifest_path_for(o.out), manifest);
  outputs.commit();
  *ctx.out << "trained " << o.arch << " for " << model.history.epochs.size() << " epochs (best "
           << model.history.best_epoch << ") -> " << o.out.string() << '\n';
}

void run_apply(const Context& ctx, const ApplyOptions& o, bool predict_mode) {
  const char* name = predict_mode ? "predict" : "detect";
  RunManifest manifest(name, ctx.argv);
  const fs::path report_path = o.report.empty() ? sibling(o.out, ".report.txt") : o.report;
  manifest.argument("model", o.model.string());
  manifest.argument("dataset", o.dataset.string());
  manifest.argument("out", o.out.string());
  manifest.argument("report", report_path.string());
  manifest.argument("block", o.block);

  Model model = [&] {
    std::ifstream in = open_input(o.model, true);
    return load_model(in);
  }();
  manifest.input(o.model);
  const WindowDataset data = load_dataset(o.dataset);
  manifest.input(o.dataset);

  const DatasetMode wanted = predict_mode ? DatasetMode::predict : DatasetMode::detect;
  if (data.mode != wanted)
    fail(ErrorKind::WrongKind, std::string(name) + " needs a " + std::string(to_string(wanted)) + " dataset");
  if (model.input_rows != data.rows)
    fail(ErrorKind::ShapeMismatch, "model expects " + std::to_string(model.input_rows) + " input rows, dataset has " +
                                       std::to_string(data.rows));

  std::size_t begin = 0;
  if (o.block == "test") {
    begin = data.val_end;
  } else if (o.block != "all") {
    fail(ErrorKind::InvalidArgument, "--block must be 'test' or 'all'");
  }
  if (begin >= data.size()) fail(ErrorKind::EmptySplit, "no samples in the selected block");

  const auto rows = predict_trace(model, data, begin, data.size());
  const MetricReport report = metrics(confusion(rows));
  const std::vector<std::pair<std::string, std::string>> context{
      {"command", name},
      {"arch", std::string(to_string(model.spec.kind))},
      {"dataset", o.dataset.string()},
      {"block", o.block}};

  OutputSet outputs;
  outputs.write(o.out, [&](std::ostream& os) { export_trace(os, rows); });
  outputs.write(report_path, [&](std::ostream& os) { write_report(os, report, context); });
  write_manifest(outputs, manifest_path_for(o.out), manifest);
  outputs.commit();
  *ctx.out << name << ": " << rows.size() << " windows, accuracy " << format_double(report.accuracy) << " -> "
           << o.out.string() << '\n';
}

void run_heatmap(const Context& ctx, const HeatmapOptions& o) {
  RunManifest manifest("heatmap", ctx.argv);
  manifest.argument("arch", o.arch);
  manifest.argument("in", o.in.string());
  manifest.argument("labels", o.labels.string());
  manifest.argument("out", o.out.string());
  manifest.argument("model_len", o.model_len);
  manifest.argument("window", o.window);
  record_training(manifest, o.training);

  const ArchitectureSpec spec = architecture(o.arch, o.training.reduce);
  const UniformSeries series = load_series(o.in);
  manifest.input(o.in);
  const auto labels = load_labels(o.labels, series.t0);
  manifest.input(o.labels);

  WindowSpec base;
  base.base_minutes = o.window;
  base.stride_minutes = o.window;
  base.model_len = o.model_len;
  base.validate();

  const ModelFactory factory = [&](const WindowDataset& data, std::uint64_t seed) {
    TrainingOptions t = o.training;
    t.seed = seed;
    return train_model(spec, data, training_config(ctx, t, std::span(data.labels).first(data.train_end)), seed);
  };
  const HeatmapGrid grid = heatmap(factory, series, labels, base, o.training.seed);

  json cells = json::array();
  for (const auto& c : grid.cells) {
    cells.push_back({{"detect", c.detect},
                     {"lookahead", c.lookahead},
                     {"seed", c.seed},
                     {"accuracy", c.accuracy ? json(*c.accuracy) : json(nullptr)},
                     {"epochs_used", c.epochs_used},
                     {"samples", c.samples},
                     {"test_samples", c.test_samples},
                     {"failure", c.failure}});
    if (!c.failure.empty())
      *ctx.err << "warning: cell D=" << c.detect << " K=" << c.lookahead << ": " << c.failure << '\n';
  }
  manifest.note("cells", cells);

  OutputSet outputs;
  outputs.write(o.out, [&](std::ostream& os) { write_heatmap(os, grid); });
  write_manifest(outputs, manifest_path_for(o.out), manifest);
  outputs.commit();
  *ctx.out << "heatmap for " << o.arch << " -> " << o.out.string() << '\n';
}

void run_evaluate(const Context& ctx, const EvaluateOptions& o) {
  RunManifest manifest("evaluate", ctx.argv);
  manifest.argument("trace", o.trace.string());
  manifest.argument("out", o.out.string());

  const auto rows = [&] {
    std::ifstream in = open_input(o.trace);
    return read_trace(in);
  }();
  manifest.input(o.trace);
  if (rows.empty()) fail(ErrorKind::EmptyInput, "trace has no rows");
  const MetricReport report = metrics(confusion(rows));
  const std::vector<std::pair<std::string, std::string>> context{
      {"command", "evaluate"}, {"trace", o.trace.string()}};

  OutputSet outputs;
  outputs.write(o.out, [&](std::ostream& os) { write_report(os, report, context); });
  write_manifest(outputs, manifest_path_for(o.out), manifest);
  outputs.commit();
  *ctx.out << "evaluated " << rows.size() << " windows, accuracy " << format_double(report.accuracy) << " -> "
           << o.out.string() << '\n';
}

}  // namespace stiction::cli
