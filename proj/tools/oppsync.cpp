// Copyright 2026 The oppsync Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// oppsync: generate scenarios, simulate them, and report on the results.
//
// Exit codes: 0 ok, 1 usage error, 2 input error, 3 invariant violation.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "oppsync/oppsync.hpp"

namespace fs = std::filesystem;
using namespace oppsync;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInput = 2;
constexpr int kInvariant = 3;

// Raised for bad files and unusable option combinations found after parsing.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot read " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

Scenario load_scenario(const fs::path& p) {
  auto in = open_in(p);
  try {
    return read_scenario(in);
  } catch (const ParseError& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

struct GenOptions {
  std::string shape = "churn";
  std::size_t replicas = 5;
  std::size_t relays = 10;
  double rate = 0.01;
  double duration = 18'000.0;
  std::optional<double> update_start;
  std::optional<double> update_end;
  double update_period = 60.0;
  double timestep = 1.0;
  std::uint64_t seed = 1;
  std::string streets;
};

struct SimOptions {
  std::string trace;
  std::string app;
  std::optional<double> relay_ratio;
  std::uint64_t seed = 1;
  std::string mode = "enhanced";
  std::string propagation = "immediate";
  double period = 10.0;
  std::string selection = "singles";
  std::int64_t latency_base = 50;
  double latency_per_byte = 0.0;
  std::string payload = "ormap";
  std::size_t map_keys = 32;
  bool check_invariants = false;
};

int run_gen(const GenOptions& o, const fs::path& out_dir) {
  ShapeConfig cfg;
  cfg.shape = parse_shape(o.shape);
  cfg.replicas = o.replicas;
  cfg.relays = o.relays;
  cfg.rate = o.rate;
  cfg.duration = o.duration;
  // Warm-up and cool-down default to 1/60 and 1/10 of the run.
  cfg.update_start = o.update_start.value_or(o.duration / 60.0);
  cfg.update_end = o.update_end.value_or(o.duration * 0.9);
  cfg.update_period = o.update_period;
  cfg.timestep = o.timestep;
  cfg.seed = o.seed;
  if (!o.streets.empty()) {
    auto in = open_in(o.streets);
    cfg.streets = StreetGraph::parse(in);
  }
  const auto g = generate(cfg);
  {
    auto f = open_out(out_dir / "contacts.trace");
    f << "# oppsync contact trace: shape=" << o.shape << " seed=" << o.seed << '\n';
    write_scenario(f, g.contacts);
  }
  {
    auto f = open_out(out_dir / "app.scenario");
    f << "# oppsync application scenario: shape=" << o.shape << " seed=" << o.seed << '\n';
    write_scenario(f, g.app);
  }
  std::cout << "wrote " << g.contacts.size() << " contact events and " << g.app.size() << " updates to "
            << out_dir.string() << '\n';
  return kOk;
}

int run_sim(const SimOptions& o, const fs::path& out_dir) {
  SimConfig cfg;
  cfg.protocol = o.mode == "basic" ? ProtocolConfig::basic() : ProtocolConfig::enhanced();
  if (o.mode == "enhanced") {
    cfg.protocol.propagation = o.propagation == "periodic" ? Propagation::periodic : Propagation::immediate;
  }
  cfg.protocol.selection.singles_first = o.selection == "singles";
  cfg.tick_period_ms = to_millis(o.period);
  cfg.latency_base_ms = o.latency_base;
  cfg.latency_per_byte_ms = o.latency_per_byte;
  cfg.roles = o.relay_ratio ? RoleAssignment::ratio(*o.relay_ratio) : RoleAssignment::from_trace();
  cfg.payload = o.payload == "counter"       ? PayloadKind::counter
                : o.payload == "ormap-delwins" ? PayloadKind::or_map_del_wins
                                               : PayloadKind::or_map;
  cfg.map_keys = static_cast<std::uint32_t>(o.map_keys);
  cfg.seed = o.seed;
  cfg.check_invariants = o.check_invariants;

  const Scenario contacts = load_scenario(o.trace);
  const Scenario app = o.app.empty() ? Scenario{} : load_scenario(o.app);
  auto log = open_out(out_dir / "events.log");
  const SimResult res = simulate(contacts, app, cfg, &log);
  nlohmann::ordered_json stats;
  stats["updates"] = res.stats.updates;
  stats["messages_sent"] = res.stats.messages_sent;
  stats["messages_delivered"] = res.stats.messages_delivered;
  stats["messages_dropped"] = res.stats.messages_dropped;
  stats["states_sent"] = res.stats.states_sent;
  stats["contacts_replica_replica"] = res.stats.contacts_replica_replica;
  stats["contacts_replica_relay"] = res.stats.contacts_replica_relay;
  stats["contacts_relay_relay"] = res.stats.contacts_relay_relay;
  stats["global"] = res.global.to_string();
  auto f = open_out(out_dir / "stats.json");
  f << stats.dump(2) << '\n';
  std::cout << "simulated " << res.stats.updates << " updates, " << res.stats.messages_sent << " messages; log in "
            << (out_dir / "events.log").string() << '\n';
  return kOk;
}

int run_report(const fs::path& log_dir, const fs::path& out_dir) {
  auto in = open_in(log_dir / "events.log");
  const auto rep = summarize(read_convergence_log(in));
  write_report(rep, out_dir);
  std::cout << "mean latency: "
            << (rep.mean_latency_ms ? std::to_string(*rep.mean_latency_ms / 1000.0) + " s" : std::string("undefined"))
            << ", undefined latencies: " << rep.latency_undefined << '\n';
  return kOk;
}

int run_check(const fs::path& log_dir) {
  auto in = open_in(log_dir / "events.log");
  const auto violations = check_event_log(in);
  for (const auto& v : violations) {
    std::cerr << "line " << v.line << ": " << v.invariant << ": " << v.detail << '\n';
  }
  if (!violations.empty()) {
    std::cout << "FAIL: " << violations.size() << " violation(s)\n";
    return kInvariant;
  }
  std::cout << "PASS\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate CRDT replica synchronization over opportunistic contacts"};
  app.set_config("--config", "", "Config file mirroring the flags (TOML/INI, one [section] per subcommand)");
  app.require_subcommand(1);

  std::string out = ".";
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("-o,--out", out, "Output directory")->envname("OPPSYNC_OUT")->capture_default_str();
  };

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a contact trace and an application scenario");
  g->add_option("--shape", gen.shape, "churn | bus | disaster | bridge")
      ->check(CLI::IsMember({"churn", "bus", "disaster", "bridge"}))
      ->capture_default_str();
  g->add_option("--replicas", gen.replicas, "Replica nodes (bridge always has 2)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  g->add_option("--relays", gen.relays, "Relay nodes (bus, disaster)")->capture_default_str();
  g->add_option("--rate", gen.rate, "Pedestrian entry rate, nodes/s (churn)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  g->add_option("--duration", gen.duration, "Scenario length, s")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--update-start", gen.update_start, "First update time, s (default duration/60)");
  g->add_option("--update-end", gen.update_end, "No updates after this time, s (default 0.9*duration)");
  g->add_option("--update-period", gen.update_period, "Seconds between updates of one replica")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  g->add_option("--timestep", gen.timestep, "Contact sampling step, s")
      ->check(CLI::Range(0.1, 3600.0))
      ->capture_default_str();
  g->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  g->add_option("--streets", gen.streets, "Street graph file (churn)");
  add_out(g);

  SimOptions sim;
  auto* s = app.add_subcommand("sim", "Run one simulation; writes events.log and stats.json");
  s->add_option("--trace", sim.trace, "Contact trace")->required();
  s->add_option("--app", sim.app, "Application scenario (updates)");
  s->add_option("--relay-ratio", sim.relay_ratio, "Assign relay roles to arriving non-replica nodes at this ratio")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--seed", sim.seed, "RNG seed for payload updates")->capture_default_str();
  s->add_option("--mode", sim.mode, "basic | enhanced")
      ->check(CLI::IsMember({"basic", "enhanced"}))
      ->capture_default_str();
  s->add_option("--propagation", sim.propagation, "immediate | periodic (enhanced mode)")
      ->check(CLI::IsMember({"immediate", "periodic"}))
      ->capture_default_str();
  s->add_option("--period", sim.period, "Periodic propagation interval, s")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--selection", sim.selection,
                "singles (single inflators, then greedy, then drop redundant picks) | greedy (plain greedy)")
      ->check(CLI::IsMember({"singles", "greedy"}))
      ->capture_default_str();
  s->add_option("--latency-base", sim.latency_base, "Per-message latency, ms")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  s->add_option("--latency-per-byte", sim.latency_per_byte, "Extra latency per byte, ms")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  s->add_option("--payload", sim.payload, "ormap | ormap-delwins | counter")
      ->check(CLI::IsMember({"ormap", "ormap-delwins", "counter"}))
      ->capture_default_str();
  s->add_option("--map-keys", sim.map_keys, "Distinct keys touched by map updates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_flag("--check-invariants", sim.check_invariants, "Abort on the first invariant violation");
  add_out(s);

  std::string log_dir;
  auto* r = app.add_subcommand("report", "Compute latency/distance/store/transfer metrics from a run");
  r->add_option("--log-dir", log_dir, "Directory holding events.log")->required();
  add_out(r);

  std::string check_dir;
  auto* c = app.add_subcommand("check", "Replay events.log and verify the protocol invariants");
  c->add_option("--log-dir", check_dir, "Directory holding events.log")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*g) return run_gen(gen, out);
    if (*s) return run_sim(sim, out);
    if (*r) return run_report(log_dir, r->count("--out") || std::getenv("OPPSYNC_OUT") ? out : log_dir);
    if (*c) return run_check(check_dir);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kUsage;
}
