// planecast: host, simulator, replay and statistics front end.
//
//   planecast serve    --port 7400 --technique pivot --log session.jsonl
//   planecast simulate --technique free --seed 3 --out trials.csv --trace trace.jsonl
//   planecast replay   --trace trace.jsonl --out trials.csv
//   planecast stats    --input trials.csv --factor technique --measure mt

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>

#include "CLI11.hpp"
#include "planecast/analytics.hpp"
#include "planecast/host.hpp"
#include "planecast/session.hpp"
#include "planecast/sim.hpp"
#include "planecast/task.hpp"

namespace {

using namespace planecast;

struct SessionFlags {
  std::string technique = "pivot";
  std::uint64_t seed = 1;
  std::optional<double> gain;
  std::size_t filter_window = 30;
  double mt_threshold_deg = 3.6;
  double reset_tolerance_deg = 5.0;
  double box_cm = 8.0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--technique", technique, "Technique of the first block (pivot|free)")
        ->check(CLI::IsMember({"pivot", "free"}));
    cmd.add_option("--seed", seed, "Session plan seed");
    cmd.add_option("--gain", gain, "Touch gain in cm/px (default: 40 cm / screen width)")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--filter-window", filter_window, "Moving-average window in samples")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--mt-threshold-deg", mt_threshold_deg, "Rotation that starts the MT clock")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--reset-tolerance-deg", reset_tolerance_deg,
                   "Max tilt from flat for a trial to become ready")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--box-cm", box_cm, "Edge of the cursor/target bounding cubes")
        ->check(CLI::PositiveNumber);
  }

  SessionConfig config() const {
    SessionConfig cfg;
    cfg.seed = seed;
    cfg.order = order_starting_with(technique_from_string(technique));
    cfg.gain = gain;
    cfg.filter.window = filter_window;
    cfg.filter.mt_threshold_deg = mt_threshold_deg;
    cfg.filter.reset_tolerance_deg = reset_tolerance_deg;
    cfg.box_half_extent_cm = box_cm / 2.0;
    return cfg;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return f;
}

void write_records(const std::string& path, const std::vector<TrialRecord>& records) {
  auto f = open_out(path);
  write_trials_csv(f, records);
}

int serve(const SessionFlags& flags, std::uint16_t port, const std::string& bind,
          const std::string& device_frame, const std::string& log_path,
          const std::string& out_path, const std::string& plan_path) {
  HostOptions opts;
  opts.bind_address = bind;
  opts.port = port;
  opts.session = flags.config();
  opts.session.device_frame = device_frame_from_string(device_frame);

  std::ofstream log;
  if (!log_path.empty()) {
    log = open_out(log_path);
    opts.log = &log;
  }
  std::vector<TrialRecord> records;
  opts.on_record = [&](const TrialRecord& r) {
    records.push_back(r);
    std::cout << "trial " << r.trial_id << " done: mt " << r.mt_ms << " ms, d " << r.d_cm
              << " cm, T " << r.t_px << " px" << std::endl;
    if (!out_path.empty()) write_records(out_path, records);
  };
  if (!plan_path.empty()) {
    auto f = open_out(plan_path);
    write_plan_csv(f, make_session_plan(opts.session.seed, opts.session.order));
  }

  boost::asio::io_context io;
  Host host(io, opts);
  host.start();
  std::cout << "listening on " << bind << ':' << host.port() << " (raw lines or websocket)"
            << std::endl;

  boost::asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) {
    host.stop();
    io.stop();
  });
  io.run();
  return 0;
}

int simulate(const SessionFlags& flags, const sim::ControllerConfig& controller,
             const std::string& out_path, const std::string& trace_path,
             const std::string& plan_path) {
  sim::HeadlessOptions opts;
  opts.session = flags.config();
  opts.controller = controller;

  std::ofstream trace;
  if (!trace_path.empty()) {
    trace = open_out(trace_path);
    opts.log = &trace;
  }
  const auto plan = make_session_plan(opts.session.seed, opts.session.order);
  if (!plan_path.empty()) {
    auto f = open_out(plan_path);
    write_plan_csv(f, plan);
  }
  const sim::HeadlessRun run = sim::run_headless(plan, opts);
  if (!out_path.empty()) write_records(out_path, run.records);
  std::cout << run.records.size() << "/" << plan.size() << " trials completed, "
            << run.messages << " messages, " << run.simulated_ms / 1000.0 << " s simulated"
            << std::endl;
  return run.records.size() == plan.size() ? 0 : 1;
}

int replay(const std::string& trace_path, const std::string& out_path) {
  auto f = open_in(trace_path);
  const ReplayResult r = replay_log(f);
  if (!out_path.empty()) write_records(out_path, r.records);
  std::cout << r.records.size() << " trials replayed, " << r.snapshots.size() << " snapshots, "
            << r.errors << " rejected records" << std::endl;
  return 0;
}

int stats(const std::vector<std::string>& inputs, const std::string& factor,
          const std::string& measure, const std::string& export_path) {
  analytics::TrialTable table;
  for (const std::string& path : inputs) {
    auto f = open_in(path);
    auto rows = analytics::read_trials_csv(f, std::filesystem::path(path).stem().string());
    table.insert(table.end(), rows.begin(), rows.end());
  }
  const auto fac = analytics::factor_from_string(factor);
  const auto mea = analytics::measure_from_string(measure);
  std::cout << analytics::report(table, fac, mea);
  if (!export_path.empty()) {
    auto f = open_out(export_path);
    analytics::write_summary_csv(f, fac, mea, analytics::summarize(table, fac, mea));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-Casting 3D cursor host, simulator and analysis tools"};
  app.require_subcommand(1);

  SessionFlags serve_flags;
  std::uint16_t port = 7400;
  std::string bind = "0.0.0.0";
  std::string device_frame = "phone";
  std::string log_path;
  std::string serve_out;
  std::string serve_plan;
  auto* serve_cmd = app.add_subcommand("serve", "Run the live host");
  serve_flags.add_to(*serve_cmd);
  serve_cmd->add_option("--port", port, "TCP port (raw lines and websocket)");
  serve_cmd->add_option("--bind", bind, "Listen address");
  serve_cmd->add_option("--device-frame", device_frame,
                        "Axes of incoming orientation (phone|world)")
      ->check(CLI::IsMember({"phone", "world"}));
  serve_cmd->add_option("--log", log_path, "Session event log (JSONL)");
  serve_cmd->add_option("--out", serve_out, "Trial CSV, rewritten after every trial");
  serve_cmd->add_option("--plan", serve_plan, "Write the session plan CSV here");

  SessionFlags sim_flags;
  sim::ControllerConfig controller;
  std::string sim_out;
  std::string sim_trace;
  std::string sim_plan;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a headless session with a synthetic user");
  sim_flags.add_to(*sim_cmd);
  sim_cmd->add_option("--sample-rate", controller.sample_rate_hz, "Orientation rate (Hz)")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--rotation-speed", controller.rotation_speed_deg_s, "deg/s")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--swipe-speed", controller.swipe_speed_px_s, "px/s")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--stop-distance", controller.stop_distance_cm, "cm")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--out", sim_out, "Trial CSV");
  sim_cmd->add_option("--trace", sim_trace, "Replayable session log (JSONL)");
  sim_cmd->add_option("--plan", sim_plan, "Write the session plan CSV here");

  std::string replay_trace;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a session log");
  replay_cmd->add_option("--trace", replay_trace, "Session log (JSONL)")->required();
  replay_cmd->add_option("--out", replay_out, "Trial CSV");

  std::vector<std::string> stats_inputs;
  std::string factor = "technique";
  std::string measure = "mt";
  std::string stats_export;
  auto* stats_cmd = app.add_subcommand("stats", "Per-level means and repeated-measures ANOVA");
  stats_cmd
      ->add_option("--input", stats_inputs,
                   "Trial CSV; repeat per subject or add a leading subject_id column")
      ->required();
  stats_cmd->add_option("--factor", factor, "technique|radius|condition|position")
      ->check(CLI::IsMember({"technique", "radius", "condition", "position"}));
  stats_cmd->add_option("--measure", measure, "mt|d|t")->check(CLI::IsMember({"mt", "d", "t"}));
  stats_cmd->add_option("--export", stats_export, "Write the per-level summary CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) {
      return serve(serve_flags, port, bind, device_frame, log_path, serve_out, serve_plan);
    }
    if (*sim_cmd) return simulate(sim_flags, controller, sim_out, sim_trace, sim_plan);
    if (*replay_cmd) return replay(replay_trace, replay_out);
    if (*stats_cmd) return stats(stats_inputs, factor, measure, stats_export);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
