#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "llpm/emit.hpp"
#include "llpm/interp.hpp"
#include "llpm/system.hpp"

// Exit codes: 0 success, 1 validation or check failure, 2 I/O or schema
// error (including bad command lines). Diagnostics go to stderr, one per
// line, prefixed "error:" or "warning:".

namespace {

using namespace llpm;

void print_errors(const std::string& text) {
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::cerr << "error: " << text.substr(pos, nl - pos) << "\n";
    pos = nl + 1;
  }
}

struct Args {
  std::string input;
  std::string output;
  std::string stimulus;
  std::string latency;
  std::vector<std::string> expose;
  std::vector<double> capacity;
  uint64_t steps = 0;
  uint64_t trials = 100;
  uint64_t seed = 0;
  uint64_t cycles = 0;
  uint32_t k = 1;
};

int cmd_check(const Args& a) {
  Package p = package_from_json(read_json_file(a.input));
  auto diags = validate(p.module);
  for (const Diagnostic& d : diags) std::cerr << "error: " << d.to_string() << "\n";
  return diags.empty() ? 0 : 1;
}

int cmd_interp(const Args& a) {
  Package p = load_package(a.input);
  Stimulus stim = stimulus_from_json(read_json_file(a.stimulus), p.module.ports);
  TokenStreams out = run(p.module, stim.inputs, a.steps);
  write_json_file(a.output, streams_to_json(out, p.module.ports));
  return 0;
}

int cmd_pipeline(const Args& a) {
  Package p = load_package(a.input);
  LatencyTable table;
  if (!a.latency.empty()) table = latency_from_json(read_json_file(a.latency));
  PipelinedNetlist n = pipeline(p.module, table);
  write_json_file(a.output, netlist_to_json(n));
  return 0;
}

int cmd_verify(const Args& a) {
  Package p = load_package(a.input);
  PipelinedNetlist n = pipeline(p.module);
  EquivResult r = equivalence_check(p.module, n, a.trials, a.seed);
  if (!r.pass) {
    print_errors(r.message);
    return 1;
  }
  std::cout << "verify: pass (" << a.trials << " trials)\n";
  return 0;
}

// assembled documents embed their packages; loose system designs are
// assembled on the fly with packages resolved next to the file
AssembledSystem load_assembled(const std::string& path, const Json& j) {
  std::string kind = j.contains("kind") && j.at("kind").is_string()
                         ? j.at("kind").get<std::string>()
                         : "";
  if (kind == "assembled") return assembled_from_json(j);
  LoadedSystem ls = load_system(path);
  return assemble(ls.design, ls.packages);
}

int cmd_emit(const Args& a) {
  Json j = read_json_file(a.input);
  std::string kind = j.contains("kind") && j.at("kind").is_string()
                         ? j.at("kind").get<std::string>()
                         : "";
  if (kind == "netlist") {
    write_text_file(a.output, emit_module(netlist_from_json(j)));
    return 0;
  }
  if (kind != "system" && kind != "assembled")
    throw SchemaError("$.kind", "expected 'netlist', 'system' or 'assembled', got '" + kind + "'");
  AssembledSystem sys = load_assembled(a.input, j);
  auto findings = check_deadlock(sys);
  if (!findings.empty()) {
    for (const std::string& f : findings) print_errors(f);
    return 1;
  }
  std::string base = std::filesystem::path(a.input).parent_path().string();
  EmittedSystem es = emit_system(sys, base);
  write_text_file(a.output, es.verilog);
  return 0;
}

int cmd_assemble(const Args& a) {
  LoadedSystem ls = load_system(a.input);
  AssembledSystem sys = assemble(ls.design, ls.packages);
  auto findings = check_deadlock(sys);
  if (!findings.empty()) { // findings veto the output file
    for (const std::string& f : findings) print_errors(f);
    return 1;
  }
  for (const std::string& line : sys.report) std::cout << line << "\n";
  if (!a.output.empty()) write_json_file(a.output, assembled_to_json(sys));
  return 0;
}

int cmd_sim(const Args& a) {
  AssembledSystem sys = assembled_from_json(read_json_file(a.input));
  std::vector<Port> ports;
  for (const ExportedPort& e : sys.exports) ports.push_back({e.name, e.dir, e.type});
  Stimulus stim = stimulus_from_json(read_json_file(a.stimulus), ports);
  stim.cycles = a.cycles;
  stim.seed = a.seed;
  Trace tr = simulate(sys, stim);
  std::map<std::string, HWType> types;
  for (const Channel& ch : sys.channels) types[ch.name] = ch.type;
  for (const ExportedPort& e : sys.exports) types[e.name] = e.type;
  write_json_file(a.output, trace_to_json(tr, types));
  return 0;
}

int cmd_bridge(const Args& a) {
  AssembledSystem sys = assembled_from_json(read_json_file(a.input));
  HostBridgeMap map = synth_host_bridge(sys, a.expose);
  write_json_file(a.output, bridge_to_json(map));
  return 0;
}

int cmd_partition(const Args& a) {
  LoadedSystem ls = load_system(a.input);
  PartitionSpec spec{a.k, a.capacity, a.seed};
  PartitionResult r = partition(ls.design, ls.packages, spec);
  write_json_file(a.output, partition_to_json(r, spec));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"compiler and assembler for latency-insensitive streaming hardware"};
  app.require_subcommand(1);
  Args a;

  auto* check = app.add_subcommand("check", "validate a package manifest");
  check->add_option("package", a.input, "package manifest JSON")->required();

  auto* interp = app.add_subcommand("interp", "run the untimed interpreter");
  interp->add_option("package", a.input, "package manifest JSON")->required();
  interp->add_option("--stimulus", a.stimulus, "stimulus JSON with input token streams")
      ->required();
  interp->add_option("--steps", a.steps, "number of lockstep firings")->required();
  interp->add_option("-o,--output", a.output, "output streams JSON")->required();

  auto* pipe = app.add_subcommand("pipeline", "schedule a module into a pipelined netlist");
  pipe->add_option("package", a.input, "package manifest JSON")->required();
  pipe->add_option("--latency", a.latency, "operator latency table JSON");
  pipe->add_option("-o,--output", a.output, "output netlist JSON")->required();

  auto* verify = app.add_subcommand("verify", "check the pipeline against the interpreter");
  verify->add_option("package", a.input, "package manifest JSON")->required();
  verify->add_option("--trials", a.trials, "random trials to run")->capture_default_str();
  verify->add_option("--seed", a.seed, "base seed for trial streams")->capture_default_str();

  auto* emit = app.add_subcommand("emit", "emit synthesizable Verilog");
  emit->add_option("input", a.input, "netlist, system or assembled JSON")->required();
  emit->add_option("-o,--output", a.output, "output Verilog file")->required();

  auto* assemble = app.add_subcommand("assemble", "assemble a system design");
  assemble->add_option("system", a.input, "system design JSON")->required();
  assemble->add_option("-o,--output", a.output, "output assembled JSON");

  auto* sim = app.add_subcommand("sim", "simulate an assembled system");
  sim->add_option("assembled", a.input, "assembled system JSON")->required();
  sim->add_option("--stimulus", a.stimulus, "stimulus JSON for exported channels")->required();
  sim->add_option("--cycles", a.cycles, "cycles to simulate")->required();
  sim->add_option("--seed", a.seed, "seed for source/sink processes")->capture_default_str();
  sim->add_option("-o,--output", a.output, "output trace JSON")->required();

  auto* bridge = app.add_subcommand("bridge", "map exported channels onto the host bus");
  bridge->add_option("assembled", a.input, "assembled system JSON")->required();
  bridge->add_option("--expose", a.expose, "exported channel names")
      ->required()
      ->delimiter(',');
  bridge->add_option("-o,--output", a.output, "output API map JSON")->required();

  auto* part = app.add_subcommand("partition", "assign instances to devices");
  part->add_option("system", a.input, "system design JSON")->required();
  part->add_option("-k", a.k, "number of devices")->required();
  part->add_option("--capacity", a.capacity, "area capacity per device")
      ->required()
      ->delimiter(',');
  part->add_option("--seed", a.seed, "seed for heuristic restarts")->capture_default_str();
  part->add_option("-o,--output", a.output, "output partition JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help lands here
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(check)) return cmd_check(a);
    if (app.got_subcommand(interp)) return cmd_interp(a);
    if (app.got_subcommand(pipe)) return cmd_pipeline(a);
    if (app.got_subcommand(verify)) return cmd_verify(a);
    if (app.got_subcommand(emit)) return cmd_emit(a);
    if (app.got_subcommand(assemble)) return cmd_assemble(a);
    if (app.got_subcommand(sim)) return cmd_sim(a);
    if (app.got_subcommand(bridge)) return cmd_bridge(a);
    if (app.got_subcommand(part)) return cmd_partition(a);
  } catch (const IoError& e) {
    print_errors(e.what());
    return 2;
  } catch (const SchemaError& e) {
    print_errors(e.what());
    return 2;
  } catch (const ParseError& e) {
    print_errors(e.what());
    return 2;
  } catch (const Error& e) {
    print_errors(e.what());
    return 1;
  }
  return 2; // unreachable with require_subcommand(1)
}
