#pragma once

// Closed-loop flow simulator used to generate labelled OP/PV data.
//
// Per minute t:
//   measured PV  = y + noise_sigma * N(0, 1)
//   error        = SP(t) - measured PV
//   OP           = kp * (error + I),  I += error / ti  (PI, velocity of I per minute)
//                  the integrator update is discarded when OP would leave [0, 100]
//   valve        = stick-slip response to OP (valve_step)
//   y           += (process_gain * valve - y) / process_tau   (explicit Euler, dt = 1 min;
//                  the factor 1/process_tau is capped at 1)
//
// Noise draws come from Rng(seed). Random setpoint schedules draw from a
// second stream, Rng(seed ^ kSetpointStream), so changing the noise level
// never changes the setpoint path.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "stiction/config.hpp"
#include "stiction/seriesio.hpp"

namespace stiction {

inline constexpr std::uint64_t kSetpointStream = 0x9E3779B97F4A7C15ULL;

struct StictionParams {
  double deadband = 0.0;   // S, percent of span
  double slip_jump = 0.0;  // J, percent of span, J <= S

  bool active() const { return deadband > 0.0 || slip_jump > 0.0; }
  void validate() const;
};

// Returns the new valve position for `demand` given the last position the
// valve moved to. Inside the deadband the valve sticks; outside it slips to
// demand - sign(demand - last) * (S - J). Demand and result are clamped to [0, 100].
double valve_step(double demand, double last_moved, const StictionParams& p);

struct SetpointStep {
  std::int64_t minute = 0;  // offset from the start of the run
  double value = 50.0;
};

// Piecewise-constant level re-drawn uniformly from [low, high] every
// `period` minutes, each new level at least `min_step` away from the last.
struct RandomSetpoint {
  std::int64_t period = 60;
  double low = 30.0;
  double high = 70.0;
  double min_step = 10.0;
};

struct SetpointSchedule {
  std::vector<SetpointStep> steps{{0, 50.0}};
  std::optional<RandomSetpoint> random;

  // One setpoint per minute. `seed` feeds the random stream only.
  std::vector<double> expand(std::int64_t duration, std::uint64_t seed) const;
  void validate() const;
};

struct LoopConfig {
  double kp = 1.1;
  double ti = 5.0;
  double process_gain = 1.0;
  double process_tau = 5.0;
  SetpointSchedule setpoint;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  std::int64_t duration = 1440;

  void validate() const;
};

struct LoopState {
  double process_output = 0.0;
  double integral = 0.0;
  double valve = 0.0;  // last moved position
};

// Equilibrium with PV at `setpoint` and zero error.
LoopState steady_state(const LoopConfig& cfg, double setpoint);

struct SimulationResult {
  UniformSeries series;
  std::vector<std::uint8_t> ground_truth;  // 1 on minutes with active stiction
  LoopState final_state;
};

Minute default_start();  // 2024-01-01T00:00

// Starts from steady state at the first setpoint.
SimulationResult simulate_loop(const LoopConfig& cfg, const StictionParams& stiction,
                               Minute start = default_start());

SimulationResult simulate_loop(const LoopConfig& cfg, const StictionParams& stiction,
                               const LoopState& initial, Minute start);

struct Episode {
  LoopConfig loop;
  StictionParams stiction;
  std::int64_t start_offset = 0;  // minutes from the dataset start time
};

struct EpisodeBoundary {
  std::size_t begin = 0;  // first sample index
  std::size_t end = 0;    // one past the last sample index
  bool stiction = false;
};

struct SimulatedDataset {
  UniformSeries series;
  std::vector<std::uint8_t> ground_truth;
  std::vector<EpisodeBoundary> episodes;
};

// Runs episodes in start order, carrying the loop state from one episode to
// the next. Minutes between episodes repeat the last sample (marked
// forward-filled, ground truth 0). Throws Error(OverlappingEpisodes).
SimulatedDataset make_dataset(std::span<const Episode> episodes, Minute start = default_start());

struct SimulationPlan {
  Minute start = default_start();
  std::vector<Episode> episodes;
};

// Reads a [simulation] / [loop] / [episode]... configuration. Keys of
// [loop] are defaults for every episode; an [episode] may override any of
// them. Episodes without an explicit `offset` follow the previous one, and
// without an explicit `seed` use loop seed + episode index.
SimulationPlan parse_simulation_plan(const ConfigDocument& doc);

void write_ground_truth(std::ostream& out, Minute start, std::span<const std::uint8_t> flags);
std::vector<std::uint8_t> read_ground_truth(std::istream& in, Minute expected_start);

}  // namespace stiction
