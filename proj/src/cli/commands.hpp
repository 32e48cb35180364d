#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stiction::cli {

namespace fs = std::filesystem;

struct Context {
  std::vector<std::string> argv;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  bool verbose = false;
  bool serial = false;
};

struct SimulateOptions {
  fs::path config;
  fs::path out_dir;
};

struct IngestOptions {
  fs::path op;
  fs::path pv;
  fs::path out;
  std::string op_unit;
  std::string pv_unit;
};

struct LabelOptions {
  fs::path in;
  fs::path out;
  std::string method = "slope_ratio";
  int n = 24;
  int window = 60;
  double percentile = 90.0;
  double pv_slope_epsilon = 1e-9;
  std::optional<double> ridge;
  fs::path ground_truth;
};

struct DatasetOptions {
  fs::path in;
  fs::path labels;
  fs::path out;
  std::string mode = "detect";
  int detect = 1;
  int lookahead = 1;
  int model_len = 24;
  int window = 60;
};

struct TrainingOptions {
  std::uint64_t seed = 42;
  int epochs = 100;
  double learning_rate = 0.001;
  int patience = 3;
  int batch = 64;
  std::string class_weight = "1";
  int reduce = 1;
  double svm_c = 1.0;
  std::optional<double> svm_gamma;
  std::size_t svm_max_rows = 20000;
};

struct TrainOptions {
  std::string arch;
  fs::path dataset;
  fs::path out;
  TrainingOptions training;
};

struct ApplyOptions {
  fs::path model;
  fs::path dataset;
  fs::path out;
  fs::path report;
  std::string block = "test";
};

struct HeatmapOptions {
  std::string arch;
  fs::path in;
  fs::path labels;
  fs::path out;
  int model_len = 24;
  int window = 60;
  TrainingOptions training;
};

struct EvaluateOptions {
  fs::path trace;
  fs::path out;
};

void run_simulate(const Context& ctx, const SimulateOptions& o);
void run_ingest(const Context& ctx, const IngestOptions& o);
void run_label(const Context& ctx, const LabelOptions& o);
void run_dataset(const Context& ctx, const DatasetOptions& o);
void run_train(const Context& ctx, const TrainOptions& o);
// `predict_mode` selects the `predict` subcommand (lookahead datasets).
void run_apply(const Context& ctx, const ApplyOptions& o, bool predict_mode);
void run_heatmap(const Context& ctx, const HeatmapOptions& o);
void run_evaluate(const Context& ctx, const EvaluateOptions& o);

}  // namespace stiction::cli
