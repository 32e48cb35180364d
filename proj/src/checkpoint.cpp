#include "stiction/checkpoint.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "stiction/binio.hpp"
#include "stiction/config.hpp"
#include "stiction/error.hpp"

namespace stiction {
namespace {

void write_sizes(std::ostream& out, const std::vector<std::size_t>& v) {
  binio::write_u32(out, static_cast<std::uint32_t>(v.size()));
  for (auto x : v) binio::write_u64(out, x);
}

std::vector<std::size_t> read_sizes(std::istream& in) {
  const auto n = binio::read_u32(in);
  if (n > 64) fail(ErrorKind::FormatError, "too many layers in architecture descriptor");
  std::vector<std::size_t> v(n);
  for (auto& x : v) {
    x = binio::read_u64(in);
    if (x == 0 || x > (1u << 20)) fail(ErrorKind::FormatError, "layer width out of range");
  }
  return v;
}

void write_network(std::ostream& out, const Model& m) {
  using namespace binio;
  write_magic(out, "SGN1");
  write_u32(out, 1);
  write_u32(out, static_cast<std::uint32_t>(m.spec.kind));
  write_u64(out, m.input_rows);
  write_u64(out, kChannels);
  write_sizes(out, m.spec.conv_filters);
  write_u64(out, m.spec.kernel_width);
  write_sizes(out, m.spec.dense_units);
  write_sizes(out, m.spec.lstm_units);
  write_u64(out, m.spec.lstm_dense);
  write_u8(out, m.spec.pooling ? 1 : 0);
  write_u64(out, m.seed);
  write_u64(out, m.network.layer_count());
  for (std::size_t l = 0; l < m.network.layer_count(); ++l) {
    const auto& layer = m.network.layer(l);
    write_u32(out, static_cast<std::uint32_t>(layer.kind()));
    write_u64(out, layer.params().size());
    write_f64s(out, layer.params());
  }
  write_u32(out, static_cast<std::uint32_t>(m.history.best_epoch));
  write_u8(out, m.history.stopped_early ? 1 : 0);
  write_string(out, history_table(m.history));
}

Model read_network(std::istream& in) {
  using namespace binio;
  expect_magic(in, "SGN1");
  if (read_u32(in) != 1) fail(ErrorKind::FormatError, "unsupported network version");
  Model m;
  const auto kind = read_u32(in);
  if (kind > 2) fail(ErrorKind::UnknownKind, "unknown architecture kind in checkpoint");
  m.spec.kind = static_cast<ModelKind>(kind);
  m.input_rows = read_u64(in);
  if (read_u64(in) != kChannels) fail(ErrorKind::FormatError, "checkpoint must have 2 input channels");
  m.spec.conv_filters = read_sizes(in);
  m.spec.kernel_width = read_u64(in);
  m.spec.dense_units = read_sizes(in);
  m.spec.lstm_units = read_sizes(in);
  m.spec.lstm_dense = read_u64(in);
  m.spec.pooling = read_u8(in) != 0;
  m.seed = read_u64(in);
  if (m.input_rows == 0 || m.input_rows > (1u << 20)) fail(ErrorKind::FormatError, "input rows out of range");
  m.network = build(m.spec, m.input_rows, m.seed);
  if (read_u64(in) != m.network.layer_count()) fail(ErrorKind::FormatError, "layer count does not match architecture");
  for (std::size_t l = 0; l < m.network.layer_count(); ++l) {
    auto& layer = m.network.layer(l);
    if (read_u32(in) != static_cast<std::uint32_t>(layer.kind()) || read_u64(in) != layer.params().size())
      fail(ErrorKind::FormatError, "layer " + std::to_string(l) + " does not match architecture");
    const auto p = read_f64s(in, layer.params().size());
    std::copy(p.begin(), p.end(), layer.params().begin());
  }
  const auto best = read_u32(in);
  const bool stopped = read_u8(in) != 0;
  m.history = parse_history_table(read_string(in));
  m.history.best_epoch = static_cast<int>(best);
  m.history.stopped_early = stopped;
  return m;
}

}  // namespace

std::string history_table(const nn::TrainHistory& history) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss\n";
  for (const auto& e : history.epochs)
    out << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss) << '\n';
  return out.str();
}

nn::TrainHistory parse_history_table(const std::string& text) {
  nn::TrainHistory h;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) fail(ErrorKind::FormatError, "bad history row");
    const auto e = parse_int(line.substr(0, a));
    const auto tl = parse_double(line.substr(a + 1, b - a - 1));
    const auto vl = parse_double(line.substr(b + 1));
    if (!e || !tl || !vl) fail(ErrorKind::FormatError, "bad history row");
    h.epochs.push_back({static_cast<int>(*e), *tl, *vl});
  }
  return h;
}

void save_model(std::ostream& out, const Model& model) {
  if (model.spec.kind == ModelKind::cnn_svm) {
    if (!model.svm) fail(ErrorKind::InvalidArgument, "cnn_svm model has no SVM head");
    binio::write_magic(out, "SGS1");
    binio::write_u32(out, 1);
    write_network(out, model);
    write_svm(out, *model.svm);
  } else {
    write_network(out, model);
  }
  if (!out) fail(ErrorKind::IoFailure, "failed writing checkpoint");
}

Model load_model(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) fail(ErrorKind::FormatError, "checkpoint is truncated");
  const std::string tag(magic, 4);
  in.seekg(-4, std::ios::cur);
  if (tag == "SGN1") {
    Model m = read_network(in);
    if (m.spec.kind == ModelKind::cnn_svm) fail(ErrorKind::FormatError, "cnn_svm network without SVM container");
    return m;
  }
  if (tag != "SGS1") fail(ErrorKind::FormatError, "unknown checkpoint magic");
  binio::expect_magic(in, "SGS1");
  if (binio::read_u32(in) != 1) fail(ErrorKind::FormatError, "unsupported checkpoint version");
  Model m = read_network(in);
  if (m.spec.kind != ModelKind::cnn_svm) fail(ErrorKind::FormatError, "SGS1 container must hold a cnn_svm network");
  m.svm = read_svm(in);
  return m;
}

}  // namespace stiction
