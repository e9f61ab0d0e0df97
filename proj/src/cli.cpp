#include "evsem/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "evsem/densem.hpp"
#include "evsem/equiv.hpp"
#include "evsem/opsem.hpp"
#include "evsem/quantum.hpp"

namespace evsem {

namespace {

struct RunConfig {
  std::string flavor;
  std::size_t depth = 4;
  std::optional<std::size_t> unroll;
  double tol = kDefaultTolerance;
  int qubit_cap = 6;
  std::string state;
  std::string gates;
  std::uint64_t seed = 42;
  std::string format = "text";
  std::size_t count = 100;
  int size = 6;

  std::size_t unroll_depth() const { return unroll.value_or(depth); }
};

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

GateTable load_table(const RunConfig& cfg) {
  GateTable t = GateTable::builtin();
  if (!cfg.gates.empty()) {
    std::ifstream in(cfg.gates);
    if (!in) throw Error(ErrorCode::kInvalidInput, "cannot read gate file " + cfg.gates);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidInput, std::string("gate file: ") + e.what());
    }
    load_gate_json(t, j, cfg.tol);
  }
  return t;
}

struct Program {
  Command cmd;
  Flavor flavor;
};

// Without --flavor the first flavor that accepts the source wins.
Program load_program(const std::string& source, const RunConfig& cfg,
                     const GateTable& table) {
  auto attempt = [&](Flavor f) {
    Command c = parse(source, f, table.signature());
    check_well_formed(c, f, table.signature());
    return Program{c, f};
  };
  if (!cfg.flavor.empty()) return attempt(parse_flavor(cfg.flavor));
  std::optional<Error> first;
  for (Flavor f : {Flavor::kNonDet, Flavor::kProb, Flavor::kQuantum}) {
    try {
      return attempt(f);
    } catch (const SyntaxError& e) {
      if (!first) first = e;
    } catch (const Error& e) {
      if (!first) first = e;
    }
  }
  throw *first;
}

QuantumContext make_context(const Command& c, const RunConfig& cfg, GateTable table) {
  QuantumContext ctx = QuantumContext::for_program(c, std::move(table), cfg.tol);
  if (ctx.n_qubits() > cfg.qubit_cap) {
    throw Error(ErrorCode::kInvalidInput,
                "program uses " + std::to_string(ctx.n_qubits()) +
                    " qubits; the cap is " + std::to_string(cfg.qubit_cap));
  }
  return ctx;
}

Matrix initial_state(const QuantumContext& ctx, const RunConfig& cfg) {
  std::string spec = cfg.state;
  if (spec.empty()) spec = "ket:" + std::string(ctx.n_qubits(), '0');
  Matrix rho = parse_density(spec, ctx.n_qubits());
  if (!is_density(rho, cfg.tol)) {
    throw Error(ErrorCode::kInvalidInput, "state is not a trace-1 density matrix");
  }
  return rho;
}

std::string matrix_text(const Matrix& m) {
  std::ostringstream s;
  for (int r = 0; r < m.rows(); ++r) {
    s << "   ";
    for (int c = 0; c < m.cols(); ++c) {
      const Complex z = m(r, c);
      s << " " << fmt12(z.real());
      if (z.imag() != 0.0) s << (z.imag() < 0 ? "-" : "+") << fmt12(std::abs(z.imag())) << "i";
    }
    s << "\n";
  }
  return s.str();
}

int cmd_denote(const std::string& source, const RunConfig& cfg, std::ostream& out) {
  GateTable table = load_table(cfg);
  Program p = load_program(source, cfg, table);
  std::optional<QuantumContext> ctx;
  if (p.flavor == Flavor::kQuantum) ctx = make_context(p.cmd, cfg, table);
  EventStructure es = interpret(p.cmd, p.flavor, {}, cfg.unroll_depth(),
                                ctx ? &*ctx : nullptr);
  if (cfg.format == "dot" || cfg.format == "text") out << to_dot(es);
  if (cfg.format == "json" || cfg.format == "text") out << to_json(es).dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string& source, const RunConfig& cfg, std::ostream& out) {
  GateTable table = load_table(cfg);
  Program p = load_program(source, cfg, table);
  const bool json = cfg.format == "json";
  nlohmann::json rows = nlohmann::json::array();
  switch (p.flavor) {
    case Flavor::kNonDet:
      for (const auto& w : words(p.cmd, p.flavor, cfg.depth)) {
        if (json) {
          rows.push_back({{"word", word_string(w.word)}, {"terminal", w.terminal}});
        } else {
          out << word_string(w.word) << (w.terminal ? "  done" : "") << "\n";
        }
      }
      break;
    case Flavor::kProb:
      for (const auto& w : prob_words(p.cmd, cfg.depth)) {
        if (json) {
          rows.push_back({{"word", word_string(w.word)},
                          {"probability", to_string(w.probability)},
                          {"terminal", w.terminal},
                          {"residual", w.residual}});
        } else {
          out << word_string(w.word) << "  " << to_string(w.probability)
              << (w.terminal ? "  done" : "") << "\n";
        }
      }
      break;
    case Flavor::kQuantum: {
      QuantumContext ctx = make_context(p.cmd, cfg, table);
      Matrix rho = initial_state(ctx, cfg);
      for (const auto& w : words(p.cmd, p.flavor, cfg.depth)) {
        Matrix fin = apply_word(w.word, rho, ctx);
        double tr = fin.trace().real();
        if (json) {
          nlohmann::json row{{"word", word_string(w.word)},
                             {"trace", fmt12(tr)},
                             {"terminal", w.terminal}};
          if (w.terminal) row["state"] = matrix_to_json(fin);
          rows.push_back(row);
        } else {
          out << word_string(w.word) << "  " << fmt12(tr) << (w.terminal ? "  done" : "")
              << "\n";
          if (w.terminal) out << matrix_text(fin);
        }
      }
      break;
    }
  }
  if (json) out << rows.dump(2) << "\n";
  return 0;
}

void print_report(const EquivReport& r, const RunConfig& cfg, std::ostream& out) {
  if (cfg.format == "json") {
    out << r.to_json().dump() << "\n";
    return;
  }
  auto list = [](const std::vector<Word>& ws) {
    std::string s;
    for (const auto& w : ws) s += (s.empty() ? "" : ", ") + word_string(w);
    return s.empty() ? std::string("none") : s;
  };
  out << "program: " << r.program << "\n"
      << "flavor: " << flavor_name(r.flavor) << "\n"
      << "depth: " << r.depth << "\n"
      << "verdict: " << (r.pass() ? "pass" : "fail") << "\n"
      << "missing_in_denotation: " << list(r.missing_in_denotation) << "\n"
      << "missing_in_operational: " << list(r.missing_in_operational) << "\n";
  for (const auto& m : r.probability_mismatches) {
    out << "mismatch: " << word_string(m.word) << " operational " << m.operational
        << " denotational " << m.denotational << "\n";
  }
  if (!r.error.empty()) out << "error: " << r.error << "\n";
  out << r.to_json().dump() << "\n";
}

int cmd_check(const std::string& source, const RunConfig& cfg, std::ostream& out) {
  GateTable table = load_table(cfg);
  Program p = load_program(source, cfg, table);
  EquivReport r;
  switch (p.flavor) {
    case Flavor::kNonDet:
      r = check_nondet(p.cmd, cfg.depth, cfg.unroll_depth());
      break;
    case Flavor::kProb:
      r = check_prob(p.cmd, cfg.depth, cfg.unroll_depth());
      break;
    case Flavor::kQuantum: {
      QuantumContext ctx = make_context(p.cmd, cfg, table);
      Matrix rho = initial_state(ctx, cfg);
      r = check_quantum(p.cmd, cfg.depth, rho, ctx, cfg.unroll_depth());
      break;
    }
  }
  r.program = source;
  print_report(r, cfg, out);
  return r.pass() ? 0 : kExitFail;
}

int cmd_fuzz(const RunConfig& cfg, std::ostream& out) {
  std::vector<Flavor> flavors;
  if (cfg.flavor.empty()) {
    flavors = {Flavor::kNonDet, Flavor::kProb, Flavor::kQuantum};
  } else {
    flavors = {parse_flavor(cfg.flavor)};
  }
  std::size_t total = 0, passed = 0;
  nlohmann::json failures = nlohmann::json::array();
  for (Flavor f : flavors) {
    std::size_t ok = 0;
    auto reports = fuzz(f, cfg.count, cfg.size, cfg.depth, cfg.seed);
    for (const auto& r : reports) {
      if (r.pass()) {
        ++ok;
      } else if (cfg.format == "json") {
        failures.push_back(r.to_json());
      } else {
        out << "FAIL " << flavor_name(f) << " " << r.to_json().dump() << "\n";
      }
    }
    if (cfg.format != "json") {
      out << flavor_name(f) << ": " << ok << "/" << reports.size() << " pass\n";
    }
    total += reports.size();
    passed += ok;
  }
  if (cfg.format == "json") {
    out << nlohmann::json{{"total", total}, {"passed", passed}, {"failures", failures}}.dump(2)
        << "\n";
  }
  out << passed << "/" << total << " pass\n";
  return passed == total ? 0 : kExitFail;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-structure semantics toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string source;
  std::size_t unroll = 0;

  auto common = [&](CLI::App* sub, bool needs_source) {
    if (needs_source) sub->add_option("source", source, "program text")->required();
    sub->add_option("--flavor", cfg.flavor, "nondet, prob or quantum")
        ->check(CLI::IsMember({"nondet", "prob", "quantum"}));
    sub->add_option("--depth", cfg.depth, "word length bound");
    sub->add_option("--unroll", unroll, "loop unrolling (default: depth)");
    sub->add_option("--state", cfg.state, "initial state: ket:..., JSON matrix or file");
    sub->add_option("--gates", cfg.gates, "JSON gate table");
    sub->add_option("--tol", cfg.tol, "numeric tolerance");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--qubits", cfg.qubit_cap, "largest register accepted");
    sub->add_option("--format", cfg.format, "dot, json or text")
        ->check(CLI::IsMember({"dot", "json", "text"}));
  };
  CLI::App* denote = app.add_subcommand("denote", "print the event structure of a program");
  CLI::App* run = app.add_subcommand("run", "list operational words");
  CLI::App* check = app.add_subcommand("check", "compare operational and denotational words");
  CLI::App* fz = app.add_subcommand("fuzz", "check random programs");
  common(denote, true);
  common(run, true);
  common(check, true);
  common(fz, false);
  fz->add_option("--count", cfg.count, "programs per flavor");
  fz->add_option("--size", cfg.size, "operators per program");
  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }
  bool depth_given = false;
  for (auto* s : {denote, run, check, fz}) {
    if (s->parsed() && s->get_option("--depth")->count() > 0) depth_given = true;
  }
  if (!depth_given) cfg.depth = fz->parsed() ? 5 : 4;
  for (auto* s : {denote, run, check, fz}) {
    if (s->parsed() && s->get_option("--unroll")->count() > 0) cfg.unroll = unroll;
  }

  try {
    if (denote->parsed()) return cmd_denote(source, cfg, out);
    if (run->parsed()) return cmd_run(source, cfg, out);
    if (check->parsed()) return cmd_check(source, cfg, out);
    return cmd_fuzz(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace evsem
