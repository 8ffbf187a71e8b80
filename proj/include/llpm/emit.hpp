#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "llpm/system.hpp"

namespace llpm {

namespace vdetail {

// Verilog-2001 reserved words that could leak in through module, system,
// instance, domain or export names. Port-derived signals always carry a
// _data/_valid/_ready suffix, so they cannot collide.
inline bool is_verilog_keyword(const std::string& s) {
  static const std::set<std::string> kw = {
      "always",   "and",      "assign",   "begin",    "buf",      "case",     "casex",
      "casez",    "deassign", "default",  "defparam", "disable",  "edge",     "else",
      "end",      "endcase",  "endfunction", "endgenerate", "endmodule", "endprimitive",
      "endspecify", "endtable", "endtask", "event",   "for",      "force",    "forever",
      "fork",     "function", "generate", "genvar",   "if",       "initial",  "inout",
      "input",    "integer",  "join",     "localparam", "module", "nand",     "negedge",
      "nor",      "not",      "or",       "output",   "parameter", "posedge", "primitive",
      "reg",      "release",  "repeat",   "signed",   "specify",  "supply0",  "supply1",
      "table",    "task",     "time",     "tri",      "tri0",     "tri1",     "wait",
      "while",    "wire",     "xnor",     "xor"};
  return kw.count(s) != 0;
}

inline void check_rtl_name(const std::string& s, const std::string& what) {
  if (!is_identifier(s)) throw Error(what + " '" + s + "' is not an identifier");
  if (is_verilog_keyword(s)) throw Error(what + " '" + s + "' is a Verilog keyword");
}

inline std::string range_of(uint32_t w) {
  return w > 1 ? "[" + std::to_string(w - 1) + ":0] " : "";
}

inline std::string hex_const(const BitVector& bits) {
  return std::to_string(bits.size()) + "'h" + (bits.size() ? bits.to_hex() : "0");
}

inline std::string dec_const(uint32_t width, uint64_t v) {
  return std::to_string(width) + "'d" + std::to_string(v);
}

// bit offset of field i in the canonical struct layout (field 0 at LSB)
inline uint32_t field_offset(const HWType& st, size_t i) {
  uint32_t off = 0;
  for (size_t k = 0; k < i; ++k) off += bit_width(st.fields()[k].type);
  return off;
}

} // namespace vdetail

// One latency-insensitive module from a pipelined netlist. Handshake per
// port: <name>_data (omitted at width 0), <name>_valid, <name>_ready.
// Reset is synchronous, active high, and clears only the valid chain, the
// done bits and Delay state; data registers are qualified by valid.
inline std::string emit_module(const PipelinedNetlist& n) {
  vdetail::check_rtl_name(n.name, "module name");
  const DataflowGraph& g = n.graph;
  auto width = [&](NodeId id) { return bit_width(n.types[id]); };
  auto wire_of = [&](NodeId id) { return "n" + std::to_string(id); };

  // reading an edge: through its chain registers if any, else the wire
  std::vector<std::vector<size_t>> chain_of(g.size());
  for (const Node& nd : g.nodes()) chain_of[nd.id].assign(nd.inputs.size(), SIZE_MAX);
  for (size_t c = 0; c < n.chains.size(); ++c)
    chain_of[n.chains[c].consumer][n.chains[c].input_index] = c;
  auto read_edge = [&](NodeId consumer, size_t k) -> std::string {
    size_t c = chain_of[consumer][k];
    const RegChain& ch = n.chains[c];
    if (ch.regs() == 0) return wire_of(ch.producer);
    return "c" + std::to_string(c) + "_r" + std::to_string(ch.regs());
  };

  std::vector<size_t> ins, outs;
  for (size_t pi = 0; pi < n.ports.size(); ++pi)
    (n.ports[pi].dir == Direction::In ? ins : outs).push_back(pi);
  std::map<std::string, NodeId> out_node; // output port -> OutputPort node
  std::map<std::string, NodeId> in_node;
  for (const Node& nd : g.nodes()) {
    if (nd.kind == OpKind::OutputPort) out_node[nd.name] = nd.id;
    if (nd.kind == OpKind::InputPort) in_node[nd.name] = nd.id;
  }

  std::string s;
  s += "// latency " + std::to_string(n.sched.total_latency) + ", initiation interval 1\n";
  s += "module " + n.name + " (\n";
  s += "  input clk,\n  input rst";
  for (const Port& p : n.ports) {
    uint32_t w = bit_width(p.type);
    bool in = p.dir == Direction::In;
    s += ",\n";
    if (w > 0)
      s += std::string("  ") + (in ? "input " : "output ") + vdetail::range_of(w) + p.name +
           "_data,\n";
    s += std::string("  ") + (in ? "input " : "output ") + p.name + "_valid,\n";
    s += std::string("  ") + (in ? "output " : "input ") + p.name + "_ready";
  }
  s += "\n);\n";

  // declarations
  for (size_t d = 1; d <= n.depth; ++d) s += "  reg vb" + std::to_string(d) + ";\n";
  for (size_t pi : outs) s += "  reg done_" + n.ports[pi].name + ";\n";
  for (size_t c = 0; c < n.chains.size(); ++c) {
    const RegChain& ch = n.chains[c];
    uint32_t w = width(ch.producer);
    if (w == 0) continue;
    for (uint32_t r = 1; r <= ch.regs(); ++r)
      s += "  reg " + vdetail::range_of(w) + "c" + std::to_string(c) + "_r" + std::to_string(r) +
           ";\n";
  }
  for (const Node& nd : g.nodes()) {
    if (nd.kind == OpKind::OutputPort || width(nd.id) == 0) continue;
    s += std::string("  ") + (nd.kind == OpKind::Delay ? "reg " : "wire ") +
         vdetail::range_of(width(nd.id)) + wire_of(nd.id) + ";\n";
  }

  // control
  s += "\n";
  s += "  wire all_valid = ";
  if (ins.empty()) {
    s += "1'b1";
  } else {
    for (size_t i = 0; i < ins.size(); ++i)
      s += (i ? " && " : "") + n.ports[ins[i]].name + "_valid";
  }
  s += ";\n";
  s += "  wire stall = vb" + std::to_string(n.depth) + " && (";
  for (size_t o = 0; o < outs.size(); ++o) {
    const std::string& nm = n.ports[outs[o]].name;
    if (o) s += " || ";
    s += "(!done_" + nm + " && !" + nm + "_ready)";
  }
  s += ");\n";
  for (size_t i = 0; i < ins.size(); ++i) {
    s += "  assign " + n.ports[ins[i]].name + "_ready = !stall";
    for (size_t j = 0; j < ins.size(); ++j)
      if (j != i) s += " && " + n.ports[ins[j]].name + "_valid";
    s += ";\n";
  }

  // combinational nodes
  s += "\n";
  for (const Node& nd : g.nodes()) {
    if (nd.kind == OpKind::OutputPort || nd.kind == OpKind::Delay || width(nd.id) == 0) continue;
    auto in_t = [&](size_t k) -> const HWType& { return n.types[nd.inputs[k]]; };
    auto x = [&](size_t k) { return read_edge(nd.id, k); };
    std::string e;
    switch (nd.kind) {
      case OpKind::InputPort: e = nd.name + "_data"; break;
      case OpKind::Const: e = vdetail::hex_const(encode(nd.value, nd.type)); break;
      case OpKind::Add: e = x(0) + " + " + x(1); break;
      case OpKind::Sub: e = x(0) + " - " + x(1); break;
      case OpKind::Mul: e = x(0) + " * " + x(1); break;
      case OpKind::And: e = x(0) + " & " + x(1); break;
      case OpKind::Or: e = x(0) + " | " + x(1); break;
      case OpKind::Xor: e = x(0) + " ^ " + x(1); break;
      case OpKind::Not: e = "~" + x(0); break;
      case OpKind::Eq:
        e = bit_width(in_t(0)) == 0 ? "1'b1" : x(0) + " == " + x(1);
        break;
      case OpKind::Lt:
        if (in_t(0).kind() == TypeKind::SInt)
          e = "$signed(" + x(0) + ") < $signed(" + x(1) + ")";
        else
          e = x(0) + " < " + x(1);
        break;
      case OpKind::Mux: e = x(0) + " ? " + x(1) + " : " + x(2); break;
      case OpKind::StructPack:
      case OpKind::ArrayPack: {
        // canonical layout: entry 0 at the LSB, so concat order reverses
        std::vector<std::string> parts;
        for (size_t k = nd.inputs.size(); k-- > 0;)
          if (bit_width(in_t(k)) > 0) parts.push_back(x(k));
        if (parts.size() == 1) {
          e = parts[0];
        } else {
          e = "{";
          for (size_t k = 0; k < parts.size(); ++k) e += (k ? ", " : "") + parts[k];
          e += "}";
        }
        break;
      }
      case OpKind::FieldExtract: {
        const HWType& st = in_t(0);
        size_t i = static_cast<size_t>(st.entry_index(nd.name));
        e = x(0) + "[" + std::to_string(vdetail::field_offset(st, i)) + " +: " +
            std::to_string(width(nd.id)) + "]";
        break;
      }
      case OpKind::ArrayIndex: {
        const HWType& at = in_t(0);
        uint32_t we = bit_width(at.elem());
        uint32_t last = at.count() - 1;
        uint32_t iw = bit_width(in_t(1));
        // out-of-range indices clamp to the last element
        std::string idx = at.count() > 1 ? "(" + x(1) + " > " + vdetail::dec_const(iw, last) +
                                               " ? " + vdetail::dec_const(iw, last) + " : " +
                                               x(1) + ")"
                                         : std::string("1'd0");
        e = x(0) + "[" + idx + " * " + std::to_string(we) + " +: " + std::to_string(we) + "]";
        break;
      }
      case OpKind::UnionPack: {
        const HWType& ut = nd.type;
        uint32_t tw = ut.tag_width();
        uint32_t total = width(nd.id);
        uint32_t idx = static_cast<uint32_t>(ut.entry_index(nd.name));
        uint32_t wp = bit_width(in_t(0));
        std::vector<std::string> parts; // MSB first
        uint32_t pad = total - tw - wp;
        if (pad > 0) parts.push_back(std::to_string(pad) + "'d0");
        if (wp > 0) parts.push_back(x(0));
        if (tw > 0) parts.push_back(vdetail::dec_const(tw, idx));
        if (parts.size() == 1) {
          e = parts[0];
        } else {
          e = "{";
          for (size_t k = 0; k < parts.size(); ++k) e += (k ? ", " : "") + parts[k];
          e += "}";
        }
        break;
      }
      case OpKind::TagOf: {
        uint32_t tw = in_t(0).tag_width();
        e = tw == 0 ? "1'b0" : x(0) + "[" + std::to_string(tw - 1) + ":0]";
        break;
      }
      case OpKind::UnwrapVariant: {
        // mismatched tags reinterpret the stored payload bits; the low
        // slice equals the canonical re-encoding because every variant is
        // zero-padded to the same payload field
        uint32_t tw = in_t(0).tag_width();
        e = x(0) + "[" + std::to_string(tw) + " +: " + std::to_string(width(nd.id)) + "]";
        break;
      }
      case OpKind::OutputPort:
      case OpKind::Delay: break;
    }
    s += "  assign " + wire_of(nd.id) + " = " + e + ";\n";
  }

  // outputs read their edge at the last slot
  s += "\n";
  for (size_t pi : outs) {
    const Port& p = n.ports[pi];
    NodeId id = out_node.at(p.name);
    if (bit_width(p.type) > 0)
      s += "  assign " + p.name + "_data = " + read_edge(id, 0) + ";\n";
    s += "  assign " + p.name + "_valid = vb" + std::to_string(n.depth) + " && !done_" + p.name +
         ";\n";
  }

  // sequential: valid chain, done bits, data chains, delay state
  s += "\n  always @(posedge clk) begin\n";
  s += "    if (rst) begin\n";
  for (size_t d = 1; d <= n.depth; ++d) s += "      vb" + std::to_string(d) + " <= 1'b0;\n";
  for (size_t pi : outs) s += "      done_" + n.ports[pi].name + " <= 1'b0;\n";
  for (const DelaySlot& d : n.delays) {
    const Node& nd = g.node(d.node);
    if (width(d.node) == 0) continue;
    s += "      " + wire_of(d.node) + " <= " + vdetail::hex_const(encode(nd.value, nd.type)) +
         ";\n";
  }
  s += "    end else if (!stall) begin\n";
  s += "      vb1 <= all_valid;\n";
  for (size_t d = 2; d <= n.depth; ++d)
    s += "      vb" + std::to_string(d) + " <= vb" + std::to_string(d - 1) + ";\n";
  for (size_t pi : outs) s += "      done_" + n.ports[pi].name + " <= 1'b0;\n";
  for (size_t c = 0; c < n.chains.size(); ++c) {
    const RegChain& ch = n.chains[c];
    if (width(ch.producer) == 0) continue;
    std::string base = "c" + std::to_string(c) + "_r";
    for (uint32_t r = ch.regs(); r >= 2; --r)
      s += "      " + base + std::to_string(r) + " <= " + base + std::to_string(r - 1) + ";\n";
    if (ch.regs() >= 1) s += "      " + base + "1 <= " + wire_of(ch.producer) + ";\n";
  }
  for (const DelaySlot& d : n.delays) {
    if (width(d.node) == 0) continue;
    std::string gate = d.write_slot == 0 ? "all_valid" : "vb" + std::to_string(d.write_slot);
    s += "      if (" + gate + ") " + wire_of(d.node) + " <= " + read_edge(d.node, 0) + ";\n";
  }
  s += "    end else begin\n";
  for (size_t pi : outs) {
    const std::string& nm = n.ports[pi].name;
    s += "      done_" + nm + " <= done_" + nm + " | " + nm + "_ready;\n";
  }
  s += "    end\n  end\nendmodule\n";
  return s;
}

inline std::string emit_module(const Module& m, const LatencyTable& table = {}) {
  if (m.is_extern())
    throw Error("module '" + m.name + "' is extern; its RTL comes from the package files");
  return emit_module(pipeline(m, table));
}

// ---- support modules ----

// synchronous single-clock fifo, DEPTH >= 1 (any value)
inline std::string emit_fifo_def() {
  return R"(module llpm_fifo #(parameter WIDTH = 8, DEPTH = 2, AW = 1) (
  input clk,
  input rst,
  input [WIDTH-1:0] in_data,
  input in_valid,
  output in_ready,
  output [WIDTH-1:0] out_data,
  output out_valid,
  input out_ready
);
  reg [WIDTH-1:0] mem [0:DEPTH-1];
  reg [AW:0] count;
  reg [AW-1:0] rp, wp;
  assign in_ready = count != DEPTH;
  assign out_valid = count != 0;
  assign out_data = mem[rp];
  wire push = in_valid && in_ready;
  wire pop = out_valid && out_ready;
  always @(posedge clk) begin
    if (rst) begin
      count <= 0;
      rp <= 0;
      wp <= 0;
    end else begin
      if (push) begin
        mem[wp] <= in_data;
        wp <= (wp == DEPTH - 1) ? {AW{1'b0}} : wp + 1'b1;
      end
      if (pop) rp <= (rp == DEPTH - 1) ? {AW{1'b0}} : rp + 1'b1;
      if (push && !pop) count <= count + 1'b1;
      else if (!push && pop) count <= count - 1'b1;
    end
  end
endmodule
)";
}

// asynchronous fifo, capacity 2**AW, gray-coded pointers crossed through
// two-flop synchronizers; rst must be asserted long enough to cover both
// domains
inline std::string emit_cdc_fifo_def() {
  return R"(module llpm_cdc_fifo #(parameter WIDTH = 8, AW = 2) (
  input wr_clk,
  input rd_clk,
  input rst,
  input [WIDTH-1:0] in_data,
  input in_valid,
  output in_ready,
  output [WIDTH-1:0] out_data,
  output out_valid,
  input out_ready
);
  reg [WIDTH-1:0] mem [0:(1 << AW) - 1];
  reg [AW:0] wr_bin, rd_bin;
  reg [AW:0] wr_gray, rd_gray;
  reg [AW:0] rd_gray_w1, rd_gray_w2;
  reg [AW:0] wr_gray_r1, wr_gray_r2;
  wire [AW:0] wr_bin_n = wr_bin + (in_valid && in_ready);
  wire [AW:0] rd_bin_n = rd_bin + (out_valid && out_ready);
  wire [AW:0] wr_gray_n = (wr_bin_n >> 1) ^ wr_bin_n;
  wire [AW:0] rd_gray_n = (rd_bin_n >> 1) ^ rd_bin_n;
  assign in_ready = wr_gray != {~rd_gray_w2[AW:AW-1], rd_gray_w2[AW-2:0]};
  assign out_valid = rd_gray != wr_gray_r2;
  assign out_data = mem[rd_bin[AW-1:0]];
  always @(posedge wr_clk) begin
    if (rst) begin
      wr_bin <= 0;
      wr_gray <= 0;
      rd_gray_w1 <= 0;
      rd_gray_w2 <= 0;
    end else begin
      if (in_valid && in_ready) mem[wr_bin[AW-1:0]] <= in_data;
      wr_bin <= wr_bin_n;
      wr_gray <= wr_gray_n;
      rd_gray_w1 <= rd_gray;
      rd_gray_w2 <= rd_gray_w1;
    end
  end
  always @(posedge rd_clk) begin
    if (rst) begin
      rd_bin <= 0;
      rd_gray <= 0;
      wr_gray_r1 <= 0;
      wr_gray_r2 <= 0;
    end else begin
      rd_bin <= rd_bin_n;
      rd_gray <= rd_gray_n;
      wr_gray_r1 <= wr_gray;
      wr_gray_r2 <= wr_gray_r1;
    end
  end
endmodule
)";
}

// ---- system emission ----

struct EmittedSystem {
  std::string verilog;
  std::vector<std::string> extern_files; // sources the build must add
};

namespace vdetail {

inline uint32_t clog2(uint32_t v) {
  uint32_t w = 0;
  while ((1u << w) < v) ++w;
  return w;
}

struct SigNames {
  std::string data, valid, ready;
};

// RTL signal names an instance port is wired through at the top level
inline SigNames top_wires(const std::string& inst, const std::string& port) {
  std::string base = inst + "__" + port;
  return {base + "_data", base + "_valid", base + "_ready"};
}

} // namespace vdetail

// One self-contained top plus every IR module definition and any fifo
// helpers it uses. Extern modules are instantiated against their declared
// signal mapping; their source files are resolved relative to base_dir and
// returned for the caller's build. Extern tops must expose clk and rst.
inline EmittedSystem emit_system(const AssembledSystem& sys, const std::string& base_dir = "") {
  vdetail::check_rtl_name(sys.name, "system name");
  for (const auto& inst : sys.instances) vdetail::check_rtl_name(inst.name, "instance name");

  EmittedSystem out;

  // clock domains, sorted for a stable port order
  std::vector<std::string> domains;
  for (const auto& inst : sys.instances) domains.push_back(inst.clock_domain);
  std::sort(domains.begin(), domains.end());
  domains.erase(std::unique(domains.begin(), domains.end()), domains.end());
  if (domains.empty()) domains.push_back("clk0");
  for (const auto& d : domains) vdetail::check_rtl_name(d, "clock domain");
  std::map<std::string, std::string> domain_clk;
  for (const auto& d : domains) domain_clk[d] = "clk_" + d;
  auto clk_of = [&](const std::string& inst_name) {
    return domain_clk.at(sys.find_instance(inst_name)->clock_domain);
  };

  // module definitions, deduplicated by name; same name must mean same text
  std::map<std::string, std::string> defs;
  std::map<std::string, const Module*> mod_of; // instance -> module
  bool any_fifo = false, any_cdc = false;
  for (const auto& inst : sys.instances) {
    const Package& pkg = sys.package_of(inst);
    const Module& m = pkg.module;
    mod_of[inst.name] = &m;
    if (m.is_extern()) {
      vdetail::check_rtl_name(m.extern_body().top, "extern top");
      for (const std::string& f : m.extern_body().files) {
        std::filesystem::path p = f;
        if (p.is_relative()) {
          std::filesystem::path key = inst.package;
          std::filesystem::path dir =
              base_dir.empty() ? key.parent_path()
                               : (std::filesystem::path(base_dir) / key).parent_path();
          p = dir / p;
        }
        if (!std::filesystem::exists(p))
          throw Error("extern module '" + m.name + "': file '" + p.string() + "' not found");
        std::string resolved = p.string();
        if (std::find(out.extern_files.begin(), out.extern_files.end(), resolved) ==
            out.extern_files.end())
          out.extern_files.push_back(resolved);
      }
      continue;
    }
    std::string text = emit_module(m);
    auto it = defs.find(m.name);
    if (it == defs.end())
      defs[m.name] = std::move(text);
    else if (it->second != text)
      throw Error("two different modules are both named '" + m.name + "'");
  }
  for (const auto& [name, _] : defs) {
    if (name == sys.name) throw Error("module '" + name + "' collides with the system name");
    if (name == "llpm_fifo" || name == "llpm_cdc_fifo")
      throw Error("module name '" + name + "' is reserved for generated fifos");
  }
  for (const Channel& c : sys.channels) {
    if (c.depth == 0) continue;
    (c.cdc ? any_cdc : any_fifo) = true;
  }

  std::set<std::string> bridged;
  if (sys.bridge) {
    for (const auto& bc : sys.bridge->channels) bridged.insert(bc.name);
    if (sys.bridge->span_bytes() > 65536)
      throw Error("host bridge register map exceeds the 16-bit address space");
  }
  auto export_of = [&](const std::string& name) -> const ExportedPort& {
    for (const auto& e : sys.exports)
      if (e.name == name) return e;
    throw Error("no exported channel named '" + name + "'");
  };
  if (sys.bridge) {
    // the host bus is synchronous to the first domain's clock
    for (const auto& bc : sys.bridge->channels) {
      const ExportedPort& e = export_of(bc.name);
      if (sys.find_instance(e.inst)->clock_domain != domains[0])
        throw Error("bridged channel '" + bc.name + "' is not in the host clock domain '" +
                    domains[0] + "'");
    }
  }

  std::string s;
  s += "// system " + sys.name + "\n";
  s += "module " + sys.name + " (\n";
  for (const auto& d : domains) s += "  input " + domain_clk[d] + ",\n";
  s += "  input rst";
  for (const auto& e : sys.exports) {
    if (bridged.count(e.name)) continue;
    vdetail::check_rtl_name(e.name, "export name");
    uint32_t w = bit_width(e.type);
    bool in = e.dir == Direction::In;
    s += ",\n";
    if (w > 0)
      s += std::string("  ") + (in ? "input " : "output ") + vdetail::range_of(w) + e.name +
           "_data,\n";
    s += std::string("  ") + (in ? "input " : "output ") + e.name + "_valid,\n";
    s += std::string("  ") + (in ? "output " : "input ") + e.name + "_ready";
  }
  if (sys.bridge) {
    s += ",\n  input host_en,\n  input host_we,\n  input [15:0] host_addr,\n";
    s += "  input [31:0] host_wdata,\n  output reg [31:0] host_rdata";
  }
  s += "\n);\n";

  // per-instance port wires
  for (const auto& inst : sys.instances) {
    for (const Port& p : mod_of.at(inst.name)->ports) {
      auto w = vdetail::top_wires(inst.name, p.name);
      uint32_t bw = bit_width(p.type);
      if (bw > 0) s += "  wire " + vdetail::range_of(bw) + w.data + ";\n";
      s += "  wire " + w.valid + ";\n";
      s += "  wire " + w.ready + ";\n";
    }
  }

  // instances
  for (const auto& inst : sys.instances) {
    const Module& m = *mod_of.at(inst.name);
    std::string top = m.is_extern() ? m.extern_body().top : m.name;
    s += "\n  " + top + " u_" + inst.name + " (\n";
    s += "    .clk(" + clk_of(inst.name) + "),\n    .rst(rst)";
    for (const Port& p : m.ports) {
      auto w = vdetail::top_wires(inst.name, p.name);
      SignalMap sig{p.name + "_data", p.name + "_valid", p.name + "_ready"};
      if (m.is_extern()) {
        auto it = m.extern_body().mapping.find(p.name);
        if (it != m.extern_body().mapping.end()) sig = it->second;
      }
      if (bit_width(p.type) > 0) s += ",\n    ." + sig.data + "(" + w.data + ")";
      s += ",\n    ." + sig.valid + "(" + w.valid + ")";
      s += ",\n    ." + sig.ready + "(" + w.ready + ")";
    }
    s += "\n  );\n";
  }

  // channels
  for (size_t ci = 0; ci < sys.channels.size(); ++ci) {
    const Channel& c = sys.channels[ci];
    auto sw = vdetail::top_wires(c.src_inst, c.src_port);
    auto dw = vdetail::top_wires(c.dst_inst, c.dst_port);
    uint32_t w = bit_width(c.type);
    s += "\n  // " + c.name + "\n";
    if (c.depth == 0) {
      if (w > 0) s += "  assign " + dw.data + " = " + sw.data + ";\n";
      s += "  assign " + dw.valid + " = " + sw.valid + ";\n";
      s += "  assign " + sw.ready + " = " + dw.ready + ";\n";
    } else if (!c.cdc) {
      uint32_t aw = std::max(1u, vdetail::clog2(c.depth));
      s += "  llpm_fifo #(.WIDTH(" + std::to_string(std::max(1u, w)) + "), .DEPTH(" +
           std::to_string(c.depth) + "), .AW(" + std::to_string(aw) + ")) u_ch" +
           std::to_string(ci) + " (\n";
      s += "    .clk(" + clk_of(c.src_inst) + "),\n    .rst(rst),\n";
      s += "    .in_data(" + (w > 0 ? sw.data : std::string("1'b0")) + "),\n";
      s += "    .in_valid(" + sw.valid + "),\n    .in_ready(" + sw.ready + "),\n";
      s += "    .out_data(" + (w > 0 ? dw.data : std::string("")) + "),\n";
      s += "    .out_valid(" + dw.valid + "),\n    .out_ready(" + dw.ready + ")\n  );\n";
    } else {
      // capacity rounds up to a power of two
      uint32_t aw = std::max(1u, vdetail::clog2(c.depth));
      s += "  llpm_cdc_fifo #(.WIDTH(" + std::to_string(std::max(1u, w)) + "), .AW(" +
           std::to_string(aw) + ")) u_ch" + std::to_string(ci) + " (\n";
      s += "    .wr_clk(" + clk_of(c.src_inst) + "),\n";
      s += "    .rd_clk(" + clk_of(c.dst_inst) + "),\n    .rst(rst),\n";
      s += "    .in_data(" + (w > 0 ? sw.data : std::string("1'b0")) + "),\n";
      s += "    .in_valid(" + sw.valid + "),\n    .in_ready(" + sw.ready + "),\n";
      s += "    .out_data(" + (w > 0 ? dw.data : std::string("")) + "),\n";
      s += "    .out_valid(" + dw.valid + "),\n    .out_ready(" + dw.ready + ")\n  );\n";
    }
  }

  // exported streams; bridged ones are backed by the register file below
  for (const auto& e : sys.exports) {
    auto w = vdetail::top_wires(e.inst, e.port);
    uint32_t bw = bit_width(e.type);
    s += "\n  // export " + e.name + "\n";
    if (bridged.count(e.name)) {
      if (bw > 0) s += "  wire " + vdetail::range_of(bw) + e.name + "_data;\n";
      s += "  wire " + e.name + "_valid;\n";
      s += "  wire " + e.name + "_ready;\n";
    }
    if (e.dir == Direction::In) {
      if (bw > 0) s += "  assign " + w.data + " = " + e.name + "_data;\n";
      s += "  assign " + w.valid + " = " + e.name + "_valid;\n";
      s += "  assign " + e.name + "_ready = " + w.ready + ";\n";
    } else {
      if (bw > 0) s += "  assign " + e.name + "_data = " + w.data + ";\n";
      s += "  assign " + e.name + "_valid = " + w.valid + ";\n";
      s += "  assign " + w.ready + " = " + e.name + "_ready;\n";
    }
  }

  // perf taps: 32-bit wrapping counters at the source side of the channel
  std::vector<std::string> taps = sys.taps;
  std::sort(taps.begin(), taps.end());
  for (size_t ti = 0; ti < taps.size(); ++ti) {
    std::string v, r, clk = domain_clk.at(domains[0]);
    bool found = false;
    for (const Channel& c : sys.channels)
      if (c.name == taps[ti]) {
        auto sw = vdetail::top_wires(c.src_inst, c.src_port);
        v = sw.valid;
        r = sw.ready;
        clk = clk_of(c.src_inst);
        found = true;
      }
    if (!found)
      for (const auto& e : sys.exports)
        if (e.name == taps[ti]) {
          v = e.name + "_valid";
          r = e.name + "_ready";
          clk = clk_of(e.inst);
          found = true;
        }
    if (!found) throw Error("no channel named '" + taps[ti] + "'");
    std::string base = "tap" + std::to_string(ti);
    s += "\n  // tap " + taps[ti] + "\n";
    s += "  reg [31:0] " + base + "_transfers;\n";
    s += "  reg [31:0] " + base + "_stalls;\n";
    s += "  reg [31:0] " + base + "_idles;\n";
    s += "  always @(posedge " + clk + ") begin\n";
    s += "    if (rst) begin\n";
    s += "      " + base + "_transfers <= 32'd0;\n";
    s += "      " + base + "_stalls <= 32'd0;\n";
    s += "      " + base + "_idles <= 32'd0;\n";
    s += "    end else begin\n";
    s += "      if (" + v + " && " + r + ") " + base + "_transfers <= " + base +
         "_transfers + 32'd1;\n";
    s += "      if (" + v + " && !" + r + ") " + base + "_stalls <= " + base +
         "_stalls + 32'd1;\n";
    s += "      if (!" + v + ") " + base + "_idles <= " + base + "_idles + 32'd1;\n";
    s += "    end\n  end\n";
  }

  // host bridge register file
  if (sys.bridge) {
    const HostBridgeMap& br = *sys.bridge;
    std::string clk = domain_clk.at(domains[0]);
    s += "\n  // host bridge, word bus on " + clk + "\n";
    s += "  wire [13:0] host_word = host_addr[15:2];\n";
    for (const auto& bc : br.channels) {
      const ExportedPort& e = export_of(bc.name);
      std::string base = bc.name + "_b";
      uint32_t dw = bc.data_words;
      if (e.dir == Direction::In) {
        if (dw > 0) s += "  reg [" + std::to_string(dw * 32 - 1) + ":0] " + base + "_data;\n";
        s += "  reg " + base + "_pend;\n";
        if (bit_width(e.type) > 0)
          s += "  assign " + bc.name + "_data = " + base + "_data[" +
               std::to_string(bit_width(e.type) - 1) + ":0];\n";
        s += "  assign " + bc.name + "_valid = " + base + "_pend;\n";
      } else {
        if (dw > 0) s += "  reg [" + std::to_string(dw * 32 - 1) + ":0] " + base + "_data;\n";
        s += "  reg " + base + "_full;\n";
        s += "  assign " + bc.name + "_ready = !" + base + "_full;\n";
      }
    }
    s += "  always @(posedge " + clk + ") begin\n";
    s += "    if (rst) begin\n";
    for (const auto& bc : br.channels) {
      const ExportedPort& e = export_of(bc.name);
      s += "      " + bc.name + "_b_" + (e.dir == Direction::In ? "pend" : "full") +
           " <= 1'b0;\n";
    }
    s += "      host_rdata <= 32'd0;\n";
    s += "    end else begin\n";
    for (const auto& bc : br.channels) {
      const ExportedPort& e = export_of(bc.name);
      std::string base = bc.name + "_b";
      if (e.dir == Direction::In) {
        s += "      if (" + base + "_pend && " + bc.name + "_ready) " + base +
             "_pend <= 1'b0;\n";
      } else {
        std::string capture = base + "_full <= 1'b1;";
        if (bc.data_words > 0) {
          uint32_t w = bit_width(e.type), dw = bc.data_words;
          std::string padded = w == dw * 32
                                   ? bc.name + "_data"
                                   : "{" + std::to_string(dw * 32 - w) + "'d0, " + bc.name +
                                         "_data}";
          capture = base + "_data <= " + padded + "; " + capture;
        }
        s += "      if (" + bc.name + "_valid && !" + base + "_full) begin " + capture +
             " end\n";
      }
    }
    // writes
    s += "      if (host_en && host_we) begin\n";
    for (const auto& bc : br.channels) {
      const ExportedPort& e = export_of(bc.name);
      std::string base = bc.name + "_b";
      uint32_t w0 = bc.base / 4;
      for (uint32_t k = 0; k < bc.data_words; ++k)
        if (e.dir == Direction::In)
          s += "        if (host_word == 14'd" + std::to_string(w0 + k) + ") " + base +
               "_data[" + std::to_string(k * 32 + 31) + ":" + std::to_string(k * 32) +
               "] <= host_wdata;\n";
      std::string ctrl = std::to_string(w0 + bc.data_words + 1);
      if (e.dir == Direction::In)
        s += "        if (host_word == 14'd" + ctrl + " && host_wdata[0]) " + base +
             "_pend <= 1'b1;\n";
      else
        s += "        if (host_word == 14'd" + ctrl + " && host_wdata[0]) " + base +
             "_full <= 1'b0;\n";
    }
    s += "      end\n";
    // reads
    s += "      if (host_en && !host_we) begin\n";
    s += "        host_rdata <= 32'd0;\n";
    for (const auto& bc : br.channels) {
      const ExportedPort& e = export_of(bc.name);
      std::string base = bc.name + "_b";
      uint32_t w0 = bc.base / 4;
      for (uint32_t k = 0; k < bc.data_words; ++k)
        s += "        if (host_word == 14'd" + std::to_string(w0 + k) + ") host_rdata <= " +
             base + "_data[" + std::to_string(k * 32 + 31) + ":" + std::to_string(k * 32) +
             "];\n";
      std::string status = std::to_string(w0 + bc.data_words);
      if (e.dir == Direction::In)
        s += "        if (host_word == 14'd" + status + ") host_rdata <= {30'd0, " + bc.name +
             "_ready, " + base + "_pend};\n";
      else
        s += "        if (host_word == 14'd" + status + ") host_rdata <= {31'd0, " + base +
             "_full};\n";
    }
    for (const auto& bt : br.taps) {
      size_t ti = SIZE_MAX;
      for (size_t k = 0; k < taps.size(); ++k)
        if (taps[k] == bt.channel) ti = k;
      if (ti == SIZE_MAX) throw Error("bridge tap '" + bt.channel + "' has no counter block");
      uint32_t w0 = bt.base / 4;
      std::string base = "tap" + std::to_string(ti);
      s += "        if (host_word == 14'd" + std::to_string(w0) + ") host_rdata <= " + base +
           "_transfers;\n";
      s += "        if (host_word == 14'd" + std::to_string(w0 + 1) + ") host_rdata <= " +
           base + "_stalls;\n";
      s += "        if (host_word == 14'd" + std::to_string(w0 + 2) + ") host_rdata <= " +
           base + "_idles;\n";
    }
    s += "      end\n";
    s += "    end\n  end\n";
  }

  s += "endmodule\n";

  // file layout: support fifos, module definitions, then the top
  std::string file;
  if (any_fifo) file += emit_fifo_def() + "\n";
  if (any_cdc) file += emit_cdc_fifo_def() + "\n";
  for (const auto& [_, text] : defs) file += text + "\n";
  file += s;
  out.verilog = std::move(file);
  return out;
}

// ---- lint ----

namespace vdetail {

// strip // and /* */ comments and string literals
inline std::string strip_comments(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size();) {
    if (text.compare(i, 2, "//") == 0) {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (text.compare(i, 2, "/*") == 0) {
      i += 2;
      while (i + 1 < text.size() && text.compare(i, 2, "*/") != 0) ++i;
      i = std::min(text.size(), i + 2);
    } else if (text[i] == '"') {
      ++i;
      while (i < text.size() && text[i] != '"') ++i;
      if (i < text.size()) ++i;
      out += ' ';
    } else {
      out += text[i++];
    }
  }
  return out;
}

} // namespace vdetail

// Structural checks over generated Verilog: module/endmodule balance,
// one assign per net within a module, and the _valid/_ready pairing of
// handshake ports.
inline std::vector<std::string> lint_verilog(const std::string& text) {
  std::vector<std::string> findings;
  std::string src = vdetail::strip_comments(text);

  size_t pos = 0;
  int open = 0;
  std::string current;
  std::map<std::string, int> assigns;
  std::vector<std::string> ports;
  auto ident_at = [&](size_t i) {
    size_t j = i;
    while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
      ++j;
    return src.substr(i, j - i);
  };
  auto close_module = [&]() {
    for (const auto& [net, cnt] : assigns)
      if (cnt > 1)
        findings.push_back("module " + current + ": net '" + net + "' assigned " +
                           std::to_string(cnt) + " times");
    std::set<std::string> have(ports.begin(), ports.end());
    for (const auto& p : ports) {
      if (p.size() > 6 && p.ends_with("_valid")) {
        std::string stem = p.substr(0, p.size() - 6);
        if (!have.count(stem + "_ready"))
          findings.push_back("module " + current + ": port '" + p + "' has no '" + stem +
                             "_ready'");
      }
    }
    assigns.clear();
    ports.clear();
  };

  while (pos < src.size()) {
    if (std::isalpha(static_cast<unsigned char>(src[pos])) || src[pos] == '_') {
      std::string word = ident_at(pos);
      size_t next = pos + word.size();
      if (word == "module") {
        if (open > 0) findings.push_back("nested module at offset " + std::to_string(pos));
        ++open;
        while (next < src.size() && std::isspace(static_cast<unsigned char>(src[next]))) ++next;
        current = ident_at(next);
        next += current.size();
      } else if (word == "endmodule") {
        if (open == 0)
          findings.push_back("endmodule without module at offset " + std::to_string(pos));
        else
          close_module();
        --open;
      } else if (word == "assign" && open == 1) {
        while (next < src.size() && std::isspace(static_cast<unsigned char>(src[next]))) ++next;
        std::string lhs = ident_at(next);
        if (!lhs.empty()) ++assigns[lhs];
        next += lhs.size();
      } else if ((word == "input" || word == "output" || word == "inout") && open == 1) {
        // port name is the last identifier before the following , or )
        size_t stop = src.find_first_of(",;)", next);
        if (stop != std::string::npos) {
          size_t e = stop;
          while (e > next && std::isspace(static_cast<unsigned char>(src[e - 1]))) --e;
          size_t b = e;
          while (b > next &&
                 (std::isalnum(static_cast<unsigned char>(src[b - 1])) || src[b - 1] == '_'))
            --b;
          if (b < e) ports.push_back(src.substr(b, e - b));
          next = stop;
        }
      }
      pos = next;
    } else {
      ++pos;
    }
  }
  if (open > 0) findings.push_back("unbalanced module/endmodule");
  return findings;
}

} // namespace llpm
