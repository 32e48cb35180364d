#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "stiction/error.hpp"
#include "stiction/windowing.hpp"

using namespace stiction;

namespace {

// PV carries the absolute minute, OP its negative, so every input row
// reveals where it came from.
UniformSeries minute_series(std::size_t windows, int base = 60) {
  const std::size_t n = windows * static_cast<std::size_t>(base);
  std::vector<double> op(n), pv(n);
  for (std::size_t i = 0; i < n; ++i) {
    pv[i] = static_cast<double>(i);
    op[i] = -static_cast<double>(i);
  }
  return UniformSeries::dense(make_minute(2024, 1, 1), op, pv);
}

std::vector<LabeledWindow> window_labels(const std::vector<int>& y, int base = 60) {
  std::vector<LabeledWindow> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i].window_index = i;
    out[i].start_minute = static_cast<std::int64_t>(i) * base;
    out[i].label = y[i];
  }
  return out;
}

std::vector<Sample> scalar_samples(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd(5.0, 2.0);
  std::vector<Sample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].input = {nd(gen), 10.0 * nd(gen), nd(gen), 10.0 * nd(gen)};
    out[i].label = static_cast<int>(i % 2);
    out[i].origin = static_cast<std::int64_t>(i) * 60;
  }
  return out;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("windowing") {

TEST_CASE("decimation keeps evenly spaced rows") {
  const std::vector<std::size_t> expected{0,  3,  5,  8,  10, 13, 15, 18, 21, 23, 26, 28,
                                          31, 33, 36, 38, 41, 44, 46, 49, 51, 54, 56, 59};
  CHECK(decimation_indices(60, 24) == expected);
  CHECK(decimation_indices(60, 2) == std::vector<std::size_t>{0, 59});
  const auto id = decimation_indices(60, 60);
  for (std::size_t i = 0; i < 60; ++i) CHECK(id[i] == i);
}

TEST_CASE("decimating a window picks rows") {
  std::vector<double> w(120);
  for (std::size_t i = 0; i < 60; ++i) {
    w[2 * i] = static_cast<double>(i);
    w[2 * i + 1] = 100.0 + static_cast<double>(i);
  }
  const auto d = decimate_window(w, 24);
  REQUIRE(d.size() == 48);
  CHECK(d[2] == 3.0);
  CHECK(d[3] == 103.0);
  CHECK(d[46] == 59.0);
}

TEST_CASE("detection samples follow the label windows") {
  const auto series = minute_series(10);
  const auto labels = window_labels({0, 1, 0, 0, 1, 1, 0, 0, 0, 1});
  WindowSpec spec;
  const auto s = segment_detection_samples(series, labels, spec);
  REQUIRE(s.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(s[i].label == labels[i].label);
    CHECK(s[i].origin == static_cast<std::int64_t>(60 * i));
    CHECK(s[i].input.size() == 48);
    CHECK(s[i].input[0] == static_cast<double>(60 * i));  // PV first
    CHECK(s[i].input[1] == -static_cast<double>(60 * i));
  }
  spec.detect = 3;
  const auto s3 = segment_detection_samples(series, labels, spec);
  REQUIRE(s3.size() == 8);
  CHECK(s3[0].label == labels[2].label);
  CHECK(s3[0].origin == 0);
  CHECK(s3[0].input.size() == 144);
}

TEST_CASE("misaligned labels are rejected") {
  const auto series = minute_series(5);
  auto labels = window_labels({0, 1, 0, 1});
  try {
    segment_detection_samples(series, labels, {});
    FAIL("expected LabelMisalignment");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LabelMisalignment);
  }
  labels = window_labels({0, 1, 0, 1, 0});
  labels[3].start_minute = 200;
  CHECK_THROWS_AS(pair_detect_lookahead(series, labels, {}), Error);
}

TEST_CASE("lookahead pairing on a small example") {
  const std::vector<int> w{0, 0, 1, 0, 0, 0, 1, 0, 0, 0};
  const auto y = lookahead_labels(w, 2, 3);
  CHECK(y == std::vector<int>{1, 0, 1, 1, 1, 0});
  CHECK(y == oracle::any_of_next(w, 2, 3));
}

TEST_CASE("lookahead pairing matches brute force for all 16 pairs") {
  std::mt19937_64 gen(77);
  std::vector<int> w(200);
  for (auto& v : w) v = static_cast<int>(gen() % 4 == 0);
  for (int d = 1; d <= 4; ++d)
    for (int k = 1; k <= 4; ++k) {
      const auto y = lookahead_labels(w, d, k);
      CHECK(y.size() == 200u - static_cast<unsigned>(d + k) + 1u);
      CHECK(y == oracle::any_of_next(w, d, k));
    }
  CHECK_THROWS_AS(lookahead_labels(std::vector<int>(4, 0), 2, 3), Error);
}

TEST_CASE("every input span precedes its lookahead span") {
  const std::size_t n = 40;
  const auto series = minute_series(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>((i * 7) % 5 == 0);
  const auto labels = window_labels(y);
  for (int d = 1; d <= 4; ++d)
    for (int k = 1; k <= 4; ++k) {
      WindowSpec spec;
      spec.detect = d;
      spec.lookahead = k;
      const auto samples = pair_detect_lookahead(series, labels, spec);
      const auto expected = oracle::any_of_next(y, d, k);
      REQUIRE(samples.size() == expected.size());
      for (std::size_t p = 0; p < samples.size(); ++p) {
        const auto lookahead_start = static_cast<double>((p + static_cast<std::size_t>(d)) * 60);
        double last_input_minute = -1.0;
        for (std::size_t r = 0; r < samples[p].input.size(); r += 2)
          last_input_minute = std::max(last_input_minute, samples[p].input[r]);
        CHECK(last_input_minute < lookahead_start);
        CHECK(samples[p].origin == static_cast<std::int64_t>(p * 60));
        CHECK(samples[p].label == expected[p]);
      }
    }
}

TEST_CASE("chronological 60:20:20 split") {
  std::mt19937_64 gen(1);
  const auto samples = scalar_samples(8760, gen);
  const auto ds = split_normalize(samples, {}, DatasetMode::detect, make_minute(2024, 1, 1));
  CHECK(ds.train_end == 5256);
  CHECK(ds.val_end - ds.train_end == 1752);
  CHECK(ds.size() - ds.val_end == 1752);
  CHECK_THROWS_AS(split_normalize(std::span(samples).first(4), {}, DatasetMode::detect, ds.t0), Error);
}

TEST_CASE("training block is standardised") {
  std::mt19937_64 gen(2);
  const auto samples = scalar_samples(500, gen);
  const auto ds = split_normalize(samples, {}, DatasetMode::detect, make_minute(2024, 1, 1));
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0.0, ss = 0.0;
    const std::size_t values = ds.train_end * ds.rows;
    for (std::size_t i = 0; i < values; ++i) m += ds.inputs[i * 2 + c];
    m /= static_cast<double>(values);
    for (std::size_t i = 0; i < values; ++i) ss += (ds.inputs[i * 2 + c] - m) * (ds.inputs[i * 2 + c] - m);
    CHECK(std::abs(m) < 1e-12);
    CHECK(std::sqrt(ss / static_cast<double>(values)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("constant channel normalises to zero") {
  std::vector<Sample> samples(20);
  for (std::size_t i = 0; i < 20; ++i) samples[i].input = {3.0, static_cast<double>(i)};
  const auto ds = split_normalize(samples, {}, DatasetMode::detect, make_minute(2024, 1, 1));
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(ds.inputs[i * 2] == 0.0);
}

TEST_CASE("test-block values do not leak into the statistics") {
  std::mt19937_64 gen(3);
  auto samples = scalar_samples(100, gen);
  const auto a = split_normalize(samples, {}, DatasetMode::detect, make_minute(2024, 1, 1));
  for (std::size_t i = a.val_end; i < samples.size(); ++i)
    for (auto& v : samples[i].input) v += 1000.0;
  const auto b = split_normalize(samples, {}, DatasetMode::detect, make_minute(2024, 1, 1));
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(a.norm[c].mean == b.norm[c].mean);
    CHECK(a.norm[c].std == b.norm[c].std);
  }
}

TEST_CASE("dataset file round trip") {
  std::mt19937_64 gen(4);
  WindowSpec spec;
  spec.detect = 2;
  spec.lookahead = 3;
  spec.model_len = 2;
  auto samples = scalar_samples(37, gen);
  for (auto& smp : samples) {
    const auto copy = smp.input;
    smp.input.insert(smp.input.end(), copy.begin(), copy.end());  // D*L = 4 rows
  }
  const auto ds = split_normalize(samples, spec, DatasetMode::predict, make_minute(2024, 7, 1, 6, 0));
  std::stringstream buf;
  write_dataset(buf, ds);
  const auto back = read_dataset(buf);
  CHECK(back.mode == DatasetMode::predict);
  CHECK(back.spec.detect == 2);
  CHECK(back.spec.lookahead == 3);
  CHECK(back.spec.model_len == spec.model_len);
  CHECK(back.t0 == ds.t0);
  CHECK(back.rows == ds.rows);
  CHECK(back.train_end == ds.train_end);
  CHECK(back.val_end == ds.val_end);
  CHECK(back.labels == ds.labels);
  CHECK(back.origins == ds.origins);
  REQUIRE(back.inputs.size() == ds.inputs.size());
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) CHECK(same_bits(back.inputs[i], ds.inputs[i]));
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(same_bits(back.norm[c].mean, ds.norm[c].mean));
    CHECK(same_bits(back.norm[c].std, ds.norm[c].std));
  }
}

TEST_CASE("corrupt dataset files are rejected") {
  std::istringstream bad("XXXX0000");
  CHECK_THROWS_AS(read_dataset(bad), Error);
}

}  // TEST_SUITE
