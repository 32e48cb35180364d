// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "stiction/config.hpp"
#include "stiction/evaluation.hpp"
#include "stiction/labeling.hpp"
#include "stiction/loopsim.hpp"
#include "stiction/models.hpp"
#include "stiction/nn/gradcheck.hpp"
#include "stiction/nn/training.hpp"
#include "stiction/seriesio.hpp"
#include "stiction/windowing.hpp"

using namespace stiction;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<double> normals(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

SimulatedDataset benchmark_simulation() {
  std::ifstream in(STICTION_SOURCE_DIR "/configs/benchmark.ini");
  if (!in) fail(ErrorKind::IoFailure, "cannot open configs/benchmark.ini");
  const auto plan = parse_simulation_plan(parse_config(in));
  return make_dataset(plan.episodes, plan.start);
}

std::vector<LabeledWindow> benchmark_labels(const UniformSeries& series) {
  SlopeRatioConfig cfg;
  cfg.n_consecutive = 24;
  cfg.pv_slope_epsilon = 1e-3;
  return slope_ratio_labels(series, cfg);
}

// 1. Metric arithmetic on reference confusion counts.
void metric_fixed_points(Outcome& o) {
  struct Column {
    const char* name;
    ConfusionCounts counts;
    double accuracy, stiction_precision, non_stiction_recall;
  };
  const Column cols[] = {{"cnn", {282240, 195840, 47520, 0}, 0.63, 0.59, 0.20},
                         {"cnn_svm", {282240, 177120, 66240, 0}, 0.66, 0.61, 0.27},
                         {"lstm", {282240, 136800, 106560, 0}, 0.74, 0.67, 0.44}};
  for (const auto& c : cols) {
    const auto m = metrics(c.counts);
    o.require(std::abs(m.accuracy - c.accuracy) <= 0.005, std::string(c.name) + " accuracy");
    o.require(std::abs(m.stiction.precision - c.stiction_precision) <= 0.005,
              std::string(c.name) + " stiction precision");
    o.require(std::abs(m.non_stiction.recall - c.non_stiction_recall) <= 0.005,
              std::string(c.name) + " non-stiction recall");
    o.require(std::abs(m.weighted.recall - m.accuracy) <= 1e-12, std::string(c.name) + " weighted recall");
    o.detail << c.name << " acc " << m.accuracy << "; ";
  }
}

// 2. Finite-difference gradient checks, seeds 1-5, step 1e-5. Parameters
// are jittered by N(0, 0.1) so no ReLU sits on its kink.
void gradient_checks(Outcome& o) {
  auto check = [](nn::Network net, std::size_t rows, std::uint64_t seed) {
    std::mt19937_64 gen(seed + 100);
    std::normal_distribution<double> nd;
    auto p = net.flat_params();
    for (auto& x : p) x += 0.1 * nd(gen);
    net.set_flat_params(p);
    std::vector<std::vector<double>> storage(8, std::vector<double>(rows * 2));
    nn::Batch batch;
    for (auto& v : storage)
      for (auto& x : v) x = nd(gen);
    for (std::size_t i = 0; i < 8; ++i) {
      batch.inputs.emplace_back(storage[i]);
      batch.labels.push_back(static_cast<int>(i % 2));
    }
    return nn::finite_diff_grad_check(net, batch, 1e-5, 1.0).max_rel_error;
  };
  double worst_cnn = 0.0, worst_lstm = 0.0, worst_head = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double cnn = check(build(ArchitectureSpec::defaults(ModelKind::cnn).reduced(16), 24, seed), 24, seed);
    const double lstm = check(build(ArchitectureSpec::defaults(ModelKind::lstm).reduced(8), 6, seed), 6, seed);
    nn::Network head(nn::Shape{24, 2});
    head.add(std::make_unique<nn::Flatten>(nn::Shape{24, 2}));
    head.add(std::make_unique<nn::Dense>(nn::Shape{1, 48}, 4, nn::Activation::relu));
    head.add(std::make_unique<nn::Dense>(nn::Shape{1, 4}, 2, nn::Activation::relu));
    head.add(std::make_unique<nn::Dense>(nn::Shape{1, 2}, 1, nn::Activation::sigmoid));
    head.initialize(seed);
    const double dense = check(std::move(head), 24, seed);
    o.require(cnn < 1e-4, "cnn seed " + std::to_string(seed));
    o.require(lstm < 1e-4, "lstm seed " + std::to_string(seed));
    o.require(dense < 1e-4, "dense head seed " + std::to_string(seed));
    worst_cnn = std::max(worst_cnn, cnn);
    worst_lstm = std::max(worst_lstm, lstm);
    worst_head = std::max(worst_head, dense);
  }
  o.detail << "max rel error cnn " << worst_cnn << ", lstm " << worst_lstm << ", dense head " << worst_head;
}

// 3. OLS, Hotelling T2 and percentile labelling against oracles.
void labeling_oracles(Outcome& o) {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  double worst_ols = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> y(60);
    for (auto& v : y) v = u(gen);
    const auto f = ols_slope(y);
    const auto [m, b] = oracle::normal_equations_fit(y);
    worst_ols = std::max({worst_ols, std::abs(f.slope - m), std::abs(f.intercept - b)});
  }
  o.require(worst_ols < 1e-9, "OLS oracle");

  double worst_t2 = 0.0, worst_mean = 0.0;
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<T2Features> feats(50);
    for (auto& f : feats)
      for (std::size_t j = 0; j < 6; ++j) f[j] = nd(gen) * (1.0 + static_cast<double>(j)) + static_cast<double>(j);
    const auto scores = hotelling_t2(feats, T2Config{});
    std::vector<std::array<double, 6>> rows(feats.begin(), feats.end());
    double trace = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      double m = 0.0, ss = 0.0;
      for (const auto& r : rows) m += r[j];
      m /= 50.0;
      for (const auto& r : rows) ss += (r[j] - m) * (r[j] - m);
      trace += ss / 49.0;
    }
    const auto expected = oracle::t2_by_solve(rows, 1e-6 * trace / 6.0);
    for (std::size_t i = 0; i < scores.size(); ++i)
      worst_t2 = std::max(worst_t2, std::abs(scores[i] - expected[i]) / std::max(1.0, std::abs(expected[i])));
    const auto model = HotellingModel::fit(feats, std::nullopt);
    worst_mean = std::max(worst_mean, model.score(model.mean()));
  }
  o.require(worst_t2 < 1e-8, "T2 oracle");
  o.require(worst_mean < 1e-12, "T2 of the mean");

  std::exponential_distribution<double> ex(1.0);
  bool monotone = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(20 + gen() % 200);
    for (auto& x : scores) x = std::floor(ex(gen) * 10.0) / 10.0;
    T2Config lo, hi;
    lo.percentile = 1.0 + static_cast<double>(gen() % 98);
    hi.percentile = lo.percentile + 1.0 + static_cast<double>(gen() % static_cast<std::uint64_t>(99.0 - lo.percentile));
    const auto a = t2_threshold_labels(scores, lo);
    const auto b = t2_threshold_labels(scores, hi);
    for (std::size_t i = 0; i < scores.size(); ++i) monotone = monotone && a[i].label >= b[i].label;
  }
  o.require(monotone, "percentile monotonicity");
  o.detail << "ols " << worst_ols << ", t2 rel " << worst_t2 << ", t2(mean) " << worst_mean;
}

// 4. Detect/lookahead pairing against brute force, plus causality.
void windowing_equivalence(Outcome& o) {
  const std::size_t n = 200;
  std::mt19937_64 gen(77);
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(gen() % 4 == 0);
  std::vector<double> op(n * 60), pv(n * 60);
  for (std::size_t i = 0; i < op.size(); ++i) {
    pv[i] = static_cast<double>(i);  // each row reveals its minute
    op[i] = -static_cast<double>(i);
  }
  const auto series = UniformSeries::dense(make_minute(2024, 1, 1), op, pv);
  std::vector<LabeledWindow> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i].window_index = i;
    labels[i].start_minute = static_cast<std::int64_t>(i) * 60;
    labels[i].label = y[i];
  }
  std::size_t checked = 0;
  for (int d = 1; d <= 4; ++d)
    for (int k = 1; k <= 4; ++k) {
      WindowSpec spec;
      spec.detect = d;
      spec.lookahead = k;
      const auto samples = pair_detect_lookahead(series, labels, spec);
      const auto expected = oracle::any_of_next(y, d, k);
      const std::string cell = "D=" + std::to_string(d) + " K=" + std::to_string(k);
      if (samples.size() != expected.size()) {
        o.require(false, cell + " sample count");
        continue;
      }
      bool labels_ok = true, causal = true;
      for (std::size_t p = 0; p < samples.size(); ++p) {
        labels_ok = labels_ok && samples[p].label == expected[p];
        const double lookahead_start = static_cast<double>((p + static_cast<std::size_t>(d)) * 60);
        for (std::size_t r = 0; r < samples[p].input.size(); r += 2)
          causal = causal && samples[p].input[r] < lookahead_start;
        ++checked;
      }
      o.require(labels_ok, cell + " labels");
      o.require(causal, cell + " causality");
    }
  o.detail << checked << " samples over 16 pairs";
}

// 5. Benchmark simulation, slope-ratio labels, LSTM detection.
void end_to_end_detection(Outcome& o) {
  const auto sim = benchmark_simulation();
  const auto labels = benchmark_labels(sim.series);
  WindowSpec spec;
  const auto samples = segment_detection_samples(sim.series, labels, spec);
  const auto data = split_normalize(samples, spec, DatasetMode::detect, sim.series.t0);
  ModelTrainConfig cfg;
  cfg.train.seed = 7;
  cfg.train.class_weight = nn::balanced_class_weight(std::span(data.labels).first(data.train_end));
  const auto model = train_model(ArchitectureSpec::defaults(ModelKind::lstm), data, cfg, 7);
  const auto rows = predict_trace(model, data, data.val_end, data.size());
  const auto m = metrics(confusion(rows));
  o.require(m.accuracy >= 0.70, "accuracy >= 0.70");
  o.require(m.stiction.recall >= 0.95, "stiction recall >= 0.95");
  o.detail << "test windows " << rows.size() << ", accuracy " << m.accuracy << ", stiction recall "
           << m.stiction.recall << ", epochs " << model.history.epochs.size();
}

// 6. Reduced heatmap: 16 cells in [0, 1], identical across two runs.
void heatmap_grid(Outcome& o) {
  const auto sim = benchmark_simulation();
  const auto labels = benchmark_labels(sim.series);
  const ModelFactory factory = [](const WindowDataset& data, std::uint64_t seed) {
    ModelTrainConfig cfg;
    cfg.train.max_epochs = 10;
    cfg.train.seed = seed;
    cfg.train.class_weight = nn::balanced_class_weight(std::span(data.labels).first(data.train_end));
    return train_model(ArchitectureSpec::defaults(ModelKind::lstm).reduced(8), data, cfg, seed);
  };
  const auto a = heatmap(factory, sim.series, labels, {}, 7);
  const auto b = heatmap(factory, sim.series, labels, {}, 7);
  o.require(a.cells.size() == 16 && b.cells.size() == 16, "16 cells");
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < std::min(a.cells.size(), b.cells.size()); ++i) {
    const auto& ca = a.cells[i];
    const auto& cb = b.cells[i];
    if (!ca.accuracy || !cb.accuracy) {
      o.require(false, "cell D=" + std::to_string(ca.detect) + " K=" + std::to_string(ca.lookahead) + ": " +
                           ca.failure);
      continue;
    }
    o.require(*ca.accuracy >= 0.0 && *ca.accuracy <= 1.0, "value in [0, 1]");
    o.require(same_bits(*ca.accuracy, *cb.accuracy), "bit-identical rerun");
    lo = std::min(lo, *ca.accuracy);
    hi = std::max(hi, *ca.accuracy);
  }
  o.detail << "accuracy range [" << lo << ", " << hi << "]";
}

// 7. SMO on XOR blobs and RBF kernel positive semidefiniteness.
void svm_correctness(Outcome& o) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd(0.0, 0.15);
  std::vector<double> x;
  std::vector<int> y;
  const double cx[4] = {1, -1, -1, 1}, cy[4] = {1, 1, -1, -1};
  for (int i = 0; i < 25; ++i)
    for (int k = 0; k < 4; ++k) {
      x.push_back(cx[k] + nd(gen));
      x.push_back(cy[k] + nd(gen));
      y.push_back(cx[k] * cy[k] > 0 ? 1 : -1);
    }
  SvmParams params;
  params.c = 10.0;
  params.gamma = 1.0;
  const auto r = svm_train(x, 2, y, params);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += svm_predict(r.model, std::span(x).subspan(2 * i, 2)).label == y[i];
  const auto audit = audit_kkt(x, 2, y, r, 1e-3);
  o.require(correct == y.size(), "training accuracy");
  o.require(audit.violations == 0 && audit.alpha_in_box, "KKT conditions");

  std::normal_distribution<double> unit;
  double worst = 1.0;
  for (int set = 0; set < 50; ++set) {
    const std::size_t n = 20, dim = 3;
    std::vector<double> pts(n * dim);
    for (auto& v : pts) v = unit(gen);
    Eigen::MatrixXd K(n, n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      rbf_kernel_row(pts, dim, i, 0.7, row, ExecutionPolicy::serial);
      for (std::size_t j = 0; j < n; ++j) K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    worst = std::min(worst, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff());
  }
  o.require(worst >= -1e-10, "kernel eigenvalues");
  o.detail << "train accuracy " << correct << "/" << y.size() << ", KKT violations " << audit.violations
           << ", min eigenvalue " << worst;
}

// 8. Scripted validation losses: stop after patience, restore best weights.
void early_stopping(Outcome& o) {
  std::mt19937_64 gen(7);
  std::vector<Sample> samples(60);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].input = normals(gen, 8);
    samples[i].label = static_cast<int>(i % 2);
    samples[i].origin = static_cast<std::int64_t>(i) * 60;
  }
  WindowSpec spec;
  spec.model_len = 4;
  const auto data = split_normalize(samples, spec, DatasetMode::detect, make_minute(2024, 1, 1));
  nn::Network net(nn::Shape{4, 2});
  net.add(std::make_unique<nn::Flatten>(nn::Shape{4, 2}));
  net.add(std::make_unique<nn::Dense>(nn::Shape{1, 8}, 1, nn::Activation::sigmoid));
  net.initialize(8);

  const std::vector<double> script{1.0, 0.9, 0.95, 0.96, 0.97, 0.5, 0.4};
  std::vector<std::uint64_t> hashes;
  nn::FitHooks hooks;
  hooks.val_loss_override = [&](int epoch, double) { return script[static_cast<std::size_t>(epoch - 1)]; };
  hooks.on_epoch_end = [&](int, const nn::Network& n) { hashes.push_back(nn::parameter_hash(n)); };
  nn::TrainConfig cfg;
  cfg.patience = 3;
  cfg.batch_size = 8;
  cfg.seed = 3;
  const auto h = nn::fit(net, data, cfg, hooks);
  o.require(h.epochs.size() == 5, "stops after epoch 5");
  o.require(h.best_epoch == 2, "best epoch 2");
  o.require(hashes.size() == 5 && nn::parameter_hash(net) == hashes[1], "restored epoch-2 weights");
  o.require(hashes.size() == 5 && hashes[1] != hashes[4], "weights changed after the best epoch");
  o.detail << "epochs " << h.epochs.size() << ", best " << h.best_epoch;
}

// 9. Forward fill on punched gaps and bit-exact dense round trip.
void resampling_contract(Outcome& o) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  const Minute t0 = make_minute(2024, 1, 1);
  std::size_t filled = 0;
  bool fill_ok = true, dense_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 10 + gen() % 300;
    std::vector<double> full(n);
    for (auto& v : full) v = u(gen);
    const double keep = 0.1 + 0.8 * std::uniform_real_distribution<double>()(gen);
    RawSeries raw;
    std::vector<bool> kept(n);
    for (std::size_t i = 0; i < n; ++i) {
      kept[i] = std::bernoulli_distribution(keep)(gen);
      if (kept[i]) raw.points.push_back({t0 + static_cast<std::int64_t>(i), full[i]});
    }
    if (raw.points.empty()) {
      kept[n / 2] = true;
      raw.points.push_back({t0 + static_cast<std::int64_t>(n / 2), full[n / 2]});
    }
    const auto f = resample_fill(raw, t0, t0 + (static_cast<std::int64_t>(n) - 1));
    if (f.values.size() != n) {
      fill_ok = false;
      continue;
    }
    const std::size_t first = static_cast<std::size_t>(std::find(kept.begin(), kept.end(), true) - kept.begin());
    std::size_t last = first;
    for (std::size_t i = 0; i < n; ++i) {
      if (kept[i]) last = i;
      const double want = i < first ? full[first] : full[last];
      fill_ok = fill_ok && same_bits(f.values[i], want);
      filled += !kept[i];
    }

    std::vector<double> op(n), pv(n);
    for (std::size_t i = 0; i < n; ++i) {
      op[i] = full[i];
      pv[i] = full[n - 1 - i] * 1e-7;
    }
    RawSeries dense_op, dense_pv;
    dense_pv.kind = SignalKind::pv;
    for (std::size_t i = 0; i < n; ++i) {
      dense_op.points.push_back({t0 + static_cast<std::int64_t>(i), op[i]});
      dense_pv.points.push_back({t0 + static_cast<std::int64_t>(i), pv[i]});
    }
    const auto merged = merge_op_pv(dense_op, dense_pv);
    std::stringstream buf;
    write_unified(buf, merged);
    const auto back = read_unified(buf);
    dense_ok = dense_ok && back.size() == n;
    for (std::size_t i = 0; dense_ok && i < n; ++i)
      dense_ok = same_bits(back.op[i], op[i]) && same_bits(back.pv[i], pv[i]) &&
                 back.op_fill[i] == FillFlag::observed && back.pv_fill[i] == FillFlag::observed;
  }
  o.require(fill_ok, "filled values");
  o.require(dense_ok, "dense round trip");
  o.detail << filled << " filled minutes checked over 1000 patterns";
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"metric arithmetic fixed points", metric_fixed_points},
      {"gradient correctness", gradient_checks},
      {"labeling oracles", labeling_oracles},
      {"windowing brute-force equivalence", windowing_equivalence},
      {"end-to-end synthetic detection", end_to_end_detection},
      {"heatmap grid", heatmap_grid},
      {"SVM correctness", svm_correctness},
      {"early stopping semantics", early_stopping},
      {"resampling contract", resampling_contract},
  };
  int failures = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << index << " " << name << ": " << o.detail.str()
              << " (" << secs << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
