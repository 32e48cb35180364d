#include "stiction/loopsim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "stiction/rng.hpp"

namespace stiction {
namespace {

double clamp_span(double v) { return std::clamp(v, 0.0, 100.0); }

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace

void StictionParams::validate() const {
  require(deadband >= 0.0 && slip_jump >= 0.0, "stiction parameters must be non-negative");
  require(slip_jump <= deadband, "slip jump must not exceed the deadband");
}

double valve_step(double demand, double last_moved, const StictionParams& p) {
  demand = clamp_span(demand);
  const double gap = demand - last_moved;
  if (std::abs(gap) <= p.deadband) return last_moved;
  const double sign = gap > 0.0 ? 1.0 : -1.0;
  return clamp_span(demand - sign * (p.deadband - p.slip_jump));
}

void SetpointSchedule::validate() const {
  if (random) {
    require(random->period >= 1, "setpoint period must be at least 1 minute");
    require(random->high > random->low, "setpoint range is empty");
    require(random->min_step >= 0.0 && random->min_step < random->high - random->low,
            "setpoint min_step must be smaller than the range");
    return;
  }
  require(!steps.empty(), "setpoint schedule is empty");
  for (std::size_t i = 1; i < steps.size(); ++i)
    require(steps[i].minute > steps[i - 1].minute, "setpoint steps must be strictly increasing");
}

std::vector<double> SetpointSchedule::expand(std::int64_t duration, std::uint64_t seed) const {
  std::vector<double> sp(static_cast<std::size_t>(std::max<std::int64_t>(duration, 0)));
  if (random) {
    Rng rng(seed ^ kSetpointStream);
    const auto& r = *random;
    double level = rng.uniform(r.low, r.high);
    for (std::size_t t = 0; t < sp.size(); ++t) {
      if (t > 0 && static_cast<std::int64_t>(t) % r.period == 0) {
        double next = rng.uniform(r.low, r.high);
        while (std::abs(next - level) < r.min_step) next = rng.uniform(r.low, r.high);
        level = next;
      }
      sp[t] = level;
    }
    return sp;
  }
  std::size_t k = 0;
  double level = steps.front().value;
  for (std::size_t t = 0; t < sp.size(); ++t) {
    while (k < steps.size() && steps[k].minute <= static_cast<std::int64_t>(t)) level = steps[k++].value;
    sp[t] = level;
  }
  return sp;
}

void LoopConfig::validate() const {
  require(ti > 0.0, "ti must be positive");
  require(process_tau > 0.0, "process_tau must be positive");
  require(duration >= 1, "duration must be at least 1 minute");
  require(noise_sigma >= 0.0, "noise_sigma must be non-negative");
  require(kp != 0.0 && std::isfinite(kp), "kp must be finite and nonzero");
  require(process_gain != 0.0 && std::isfinite(process_gain), "process_gain must be finite and nonzero");
  setpoint.validate();
}

LoopState steady_state(const LoopConfig& cfg, double setpoint) {
  LoopState s;
  s.valve = clamp_span(setpoint / cfg.process_gain);
  s.process_output = cfg.process_gain * s.valve;
  s.integral = s.valve / cfg.kp;
  return s;
}

Minute default_start() { return make_minute(2024, 1, 1); }

SimulationResult simulate_loop(const LoopConfig& cfg, const StictionParams& stiction, Minute start) {
  cfg.validate();
  const auto sp = cfg.setpoint.expand(1, cfg.seed);
  return simulate_loop(cfg, stiction, steady_state(cfg, sp.front()), start);
}

SimulationResult simulate_loop(const LoopConfig& cfg, const StictionParams& stiction,
                               const LoopState& initial, Minute start) {
  cfg.validate();
  stiction.validate();
  const auto sp = cfg.setpoint.expand(cfg.duration, cfg.seed);
  const auto n = sp.size();
  const double alpha = std::min(1.0, 1.0 / cfg.process_tau);

  Rng noise(cfg.seed);
  LoopState st = initial;
  std::vector<double> op(n), pv(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double measured = cfg.noise_sigma > 0.0 ? st.process_output + cfg.noise_sigma * noise.normal()
                                                   : st.process_output;
    const double error = sp[t] - measured;
    const double integral = st.integral + error / cfg.ti;
    double out = cfg.kp * (error + integral);
    if (out >= 0.0 && out <= 100.0) {
      st.integral = integral;
    } else {
      out = clamp_span(cfg.kp * (error + st.integral));
    }
    st.valve = valve_step(out, st.valve, stiction);
    st.process_output += alpha * (cfg.process_gain * st.valve - st.process_output);
    op[t] = out;
    pv[t] = measured;
  }

  SimulationResult r;
  r.series = UniformSeries::dense(start, std::move(op), std::move(pv));
  r.ground_truth.assign(n, stiction.active() ? 1 : 0);
  r.final_state = st;
  return r;
}

SimulatedDataset make_dataset(std::span<const Episode> episodes, Minute start) {
  if (episodes.empty()) fail(ErrorKind::EmptyInput, "no episodes");
  std::vector<const Episode*> order;
  for (const auto& e : episodes) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const Episode* a, const Episode* b) { return a->start_offset < b->start_offset; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto prev_end = order[i - 1]->start_offset + order[i - 1]->loop.duration;
    if (order[i]->start_offset < prev_end)
      fail(ErrorKind::OverlappingEpisodes,
           "episode starting at minute " + std::to_string(order[i]->start_offset) +
               " overlaps the previous episode ending at minute " + std::to_string(prev_end));
  }

  SimulatedDataset ds;
  ds.series.t0 = start + order.front()->start_offset;
  std::optional<LoopState> state;
  for (const Episode* e : order) {
    e->loop.validate();
    const Minute ep_start = start + e->start_offset;
    // Bridge a gap by repeating the last sample.
    while (!ds.series.op.empty() && ds.series.time_at(ds.series.size()) < ep_start) {
      ds.series.op.push_back(ds.series.op.back());
      ds.series.pv.push_back(ds.series.pv.back());
      ds.series.op_fill.push_back(FillFlag::forward_filled);
      ds.series.pv_fill.push_back(FillFlag::forward_filled);
      ds.ground_truth.push_back(0);
    }
    if (!state) state = steady_state(e->loop, e->loop.setpoint.expand(1, e->loop.seed).front());
    auto run = simulate_loop(e->loop, e->stiction, *state, ep_start);
    state = run.final_state;

    EpisodeBoundary b;
    b.begin = ds.series.size();
    b.end = b.begin + run.series.size();
    b.stiction = e->stiction.active();
    ds.episodes.push_back(b);

    auto append = [](auto& dst, const auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
    append(ds.series.op, run.series.op);
    append(ds.series.pv, run.series.pv);
    append(ds.series.op_fill, run.series.op_fill);
    append(ds.series.pv_fill, run.series.pv_fill);
    append(ds.ground_truth, run.ground_truth);
  }
  return ds;
}

namespace {

SetpointSchedule parse_setpoint(const ConfigSection& sec, SetpointSchedule base) {
  const auto raw = sec.get("setpoint");
  if (raw) {
    if (*raw == "random") {
      base.random = RandomSetpoint{};
    } else {
      base.random.reset();
      base.steps.clear();
      std::string text = *raw;
      std::replace(text.begin(), text.end(), ',', ' ');
      std::istringstream items(text);
      std::string item;
      while (items >> item) {
        const auto colon = item.find(':');
        SetpointStep step;
        if (colon == std::string::npos) {
          step.minute = 0;
          const auto v = parse_double(item);
          if (!v) fail(ErrorKind::FormatError, "bad setpoint value '" + item + "'");
          step.value = *v;
        } else {
          const auto m = parse_int(item.substr(0, colon));
          const auto v = parse_double(item.substr(colon + 1));
          if (!m || !v) fail(ErrorKind::FormatError, "bad setpoint step '" + item + "'");
          step.minute = *m;
          step.value = *v;
        }
        base.steps.push_back(step);
      }
      if (base.steps.empty()) fail(ErrorKind::FormatError, "empty setpoint schedule");
    }
  }
  if (base.random) {
    auto& r = *base.random;
    r.period = sec.get_int("setpoint_period", r.period);
    r.low = sec.get_double("setpoint_low", r.low);
    r.high = sec.get_double("setpoint_high", r.high);
    r.min_step = sec.get_double("setpoint_min_step", r.min_step);
  }
  return base;
}

LoopConfig parse_loop(const ConfigSection& sec, LoopConfig base) {
  base.kp = sec.get_double("kp", base.kp);
  base.ti = sec.get_double("ti", base.ti);
  base.process_gain = sec.get_double("process_gain", base.process_gain);
  base.process_tau = sec.get_double("process_tau", base.process_tau);
  base.noise_sigma = sec.get_double("noise_sigma", base.noise_sigma);
  base.seed = sec.get_u64("seed", base.seed);
  base.duration = sec.get_int("duration", base.duration);
  base.setpoint = parse_setpoint(sec, base.setpoint);
  return base;
}

StictionParams parse_stiction(const ConfigSection& sec, StictionParams base) {
  base.deadband = sec.get_double("deadband", base.deadband);
  base.slip_jump = sec.get_double("slip_jump", base.slip_jump);
  return base;
}

}  // namespace

SimulationPlan parse_simulation_plan(const ConfigDocument& doc) {
  SimulationPlan plan;
  if (const auto* sim = doc.first("simulation")) {
    if (const auto s = sim->get("start")) {
      const auto t = parse_timestamp(*s);
      if (!t) fail(ErrorKind::UnparseableTimestamp, "[simulation] start: '" + *s + "'");
      plan.start = *t;
    }
  }
  LoopConfig loop;
  StictionParams stiction;
  if (const auto* sec = doc.first("loop")) {
    loop = parse_loop(*sec, loop);
    stiction = parse_stiction(*sec, stiction);
  }
  const auto sections = doc.all("episode");
  if (sections.empty()) fail(ErrorKind::FormatError, "configuration defines no [episode] sections");
  std::int64_t next_offset = 0;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto& sec = *sections[i];
    Episode e;
    LoopConfig base = loop;
    base.seed = loop.seed + i;
    e.loop = parse_loop(sec, base);
    e.stiction = parse_stiction(sec, stiction);
    e.start_offset = sec.get_int("offset", next_offset);
    e.loop.validate();
    e.stiction.validate();
    next_offset = e.start_offset + e.loop.duration;
    plan.episodes.push_back(e);
  }
  return plan;
}

void write_ground_truth(std::ostream& out, Minute start, std::span<const std::uint8_t> flags) {
  out << "timestamp,ground_truth\n";
  for (std::size_t i = 0; i < flags.size(); ++i)
    out << format_timestamp(start + static_cast<std::int64_t>(i)) << ',' << int(flags[i] ? 1 : 0) << '\n';
  if (!out) fail(ErrorKind::IoFailure, "failed writing ground truth");
}

std::vector<std::uint8_t> read_ground_truth(std::istream& in, Minute expected_start) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) fail(ErrorKind::EmptyInput, "ground truth file is empty");
  ++lineno;
  std::vector<std::uint8_t> flags;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": missing column");
    const auto t = parse_timestamp(line.substr(0, comma));
    if (!t || *t != expected_start + static_cast<std::int64_t>(flags.size()))
      fail(ErrorKind::LabelMisalignment, "line " + std::to_string(lineno) + ": ground truth axis does not match");
    const auto v = parse_int(line.substr(comma + 1));
    if (!v || (*v != 0 && *v != 1)) fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": flag must be 0 or 1");
    flags.push_back(static_cast<std::uint8_t>(*v));
  }
  return flags;
}

}  // namespace stiction
