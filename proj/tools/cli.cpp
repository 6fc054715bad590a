#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hamverify/hamverify.hpp"

namespace hamverify::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* to_string(Command c) {
  switch (c) {
    case Command::Validate: return "validate";
    case Command::Factorize: return "factorize";
    case Command::Criteria: return "criteria";
    case Command::Bounds: return "bounds";
    case Command::PlateSpectrum: return "plate-spectrum";
    case Command::PlateSolve: return "plate-solve";
    case Command::PlateVerify: return "plate-verify";
    case Command::Render: return "render";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Argument parsing.

namespace {

struct HelpRequested {
  std::string text;
};

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InputError("bad " + what + " '" + text + "'");
  }
  if (used != text.size()) throw InputError("bad " + what + " '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char ch) { return std::isspace(ch); }),
               item.end());
    if (item.empty()) throw InputError("empty entry in list '" + text + "'");
    out.push_back(item);
  }
  if (out.empty()) throw InputError("empty list");
  return out;
}

}  // namespace

Scalar parse_complex(const std::string& raw) {
  std::string t;
  for (char ch : raw)
    if (!std::isspace(static_cast<unsigned char>(ch))) t.push_back(ch);
  if (t.empty()) throw InputError("empty complex literal");
  if (t.back() != 'i') return {parse_double(t, "complex literal"), 0.0};
  t.pop_back();
  // split before the last sign that is not part of an exponent
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;) {
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  const std::string re = split == std::string::npos ? "" : t.substr(0, split);
  std::string im = split == std::string::npos ? t : t.substr(split);
  double imag = 0.0;
  if (im.empty() || im == "+") imag = 1.0;
  else if (im == "-") imag = -1.0;
  else imag = parse_double(im, "complex literal '" + raw + "'");
  const double real = re.empty() ? 0.0 : parse_double(re, "complex literal '" + raw + "'");
  return {real, imag};
}

std::vector<Scalar> parse_complex_list(const std::string& text) {
  std::vector<Scalar> out;
  for (const auto& item : split_list(text)) out.push_back(parse_complex(item));
  return out;
}

RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Numerical verification of Hamiltonian operator matrices", "hamverify"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string builtin, lambda, n_sched, l_sched, out, format = "both", a, b, c, d, config;
  double tol = 0.0;
  std::vector<std::string> reports;

  const std::vector<std::pair<Command, std::string>> commands{
      {Command::Validate, "check block structure and JH = (JH)*"},
      {Command::Factorize, "Frobenius-Schur and JH factorizations"},
      {Command::Criteria, "direct, range and Schur-complement criteria"},
      {Command::Bounds, "relative-bound estimates and sufficient conditions"},
      {Command::PlateSpectrum, "spectrum of the truncated plate Hamiltonian"},
      {Command::PlateSolve, "manufactured plate solves per mode"},
      {Command::PlateVerify, "all plate checks"},
      {Command::Render, "turn JSON reports into CSV tables"},
  };
  std::map<CLI::App*, Command> which;
  for (const auto& [cmd, help] : commands) {
    auto* sub = app.add_subcommand(to_string(cmd), help);
    which[sub] = cmd;
    if (cmd == Command::Render) {
      sub->add_option("reports", reports, "report files or directories (default: --out)");
      sub->add_option("--out", out, "output directory");
      continue;
    }
    sub->add_option("--builtin", builtin, "built-in operator")->check(CLI::IsMember({"plate", "example31", "random"}));
    sub->add_option("--modes", cfg.modes, "truncation N / random block size")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "seed for --builtin random");
    sub->add_option("--lambda", lambda, "comma list of complex literals a+bi");
    sub->add_option("--n-schedule,--N", n_sched, "increasing truncations, comma separated");
    sub->add_option("--lambda-schedule", l_sched, "increasing positive lambdas, comma separated");
    sub->add_option("--tol", tol, "tolerance override");
    sub->add_option("--out", out, "output directory (default $HAMVERIFY_OUT or .)");
    sub->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
    sub->add_option("--a", a, "Matrix Market file for block A");
    sub->add_option("--b", b, "Matrix Market file for block B");
    sub->add_option("--c", c, "Matrix Market file for block C");
    sub->add_option("--d", d, "Matrix Market file for block D (optional)");
    sub->add_option("--config", config, "plate problem file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* shown = &app;
    for (const auto& [sub, cmd] : which)
      if (sub->parsed()) shown = sub;
    throw HelpRequested{shown->help()};
  } catch (const CLI::ParseError& e) {
    throw InputError(e.what());
  }

  for (const auto& [sub, cmd] : which)
    if (sub->parsed()) cfg.command = cmd;
  auto given = [&](const char* name) {
    for (const auto& [sub, cmd] : which)
      if (sub->parsed() && sub->get_option_no_throw(name) && sub->get_option_no_throw(name)->count() > 0) return true;
    return false;
  };

  if (given("--builtin")) cfg.builtin = builtin;
  if (given("--a")) cfg.a = a;
  if (given("--b")) cfg.b = b;
  if (given("--c")) cfg.c = c;
  if (given("--d")) cfg.d = d;
  if (given("--config")) cfg.config = config;
  if (given("--lambda")) cfg.lambdas = parse_complex_list(lambda);
  if (given("--n-schedule")) {
    for (const auto& item : split_list(n_sched)) {
      const double v = parse_double(item, "N schedule entry");
      if (v < 1 || v != std::floor(v)) throw InputError("N schedule entries must be positive integers");
      cfg.n_schedule.push_back(static_cast<std::size_t>(v));
    }
    for (std::size_t k = 1; k < cfg.n_schedule.size(); ++k)
      if (cfg.n_schedule[k] <= cfg.n_schedule[k - 1]) throw InputError("N schedule must be strictly increasing");
  }
  if (given("--lambda-schedule")) {
    for (const auto& item : split_list(l_sched)) cfg.lambda_schedule.push_back(parse_double(item, "lambda schedule entry"));
    if (cfg.lambda_schedule.front() <= 0.0) throw InputError("lambda schedule must be positive");
    for (std::size_t k = 1; k < cfg.lambda_schedule.size(); ++k)
      if (cfg.lambda_schedule[k] <= cfg.lambda_schedule[k - 1])
        throw InputError("lambda schedule must be strictly increasing");
  }
  if (given("--tol")) {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw InputError("--tol must be positive");
    cfg.tol = tol;
  }
  if (given("--out")) {
    cfg.out = out;
  } else if (const char* env = std::getenv("HAMVERIFY_OUT"); env && *env) {
    cfg.out = env;
  }
  cfg.format = format == "json" ? Format::Json : format == "csv" ? Format::Csv : Format::Both;
  for (const auto& r : reports) cfg.reports.emplace_back(r);

  if (cfg.builtin && cfg.has_files()) throw InputError("--builtin and matrix files are mutually exclusive");
  if (cfg.has_files() && !(cfg.a && cfg.b && cfg.c)) throw InputError("file input needs --a, --b and --c");
  const bool plate_cmd = cfg.command == Command::PlateSpectrum || cfg.command == Command::PlateSolve ||
                         cfg.command == Command::PlateVerify;
  if (plate_cmd && (cfg.has_files() || (cfg.builtin && *cfg.builtin != "plate")))
    throw InputError(std::string(to_string(cfg.command)) + " works on the plate operator only");
  if (cfg.config && cfg.command != Command::PlateSolve) throw InputError("--config applies to plate-solve only");
  return cfg;
}

// ---------------------------------------------------------------------------
// Reports.

namespace {

json complex_json(Scalar z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json check(const std::string& criterion, const std::string& anchor, std::optional<Scalar> lambda, double deviation,
           bool pass, json margins = json::object()) {
  json j;
  j["criterion"] = criterion;
  j["anchor"] = anchor;
  j["lambda"] = lambda ? complex_json(*lambda) : json(nullptr);
  j["deviation"] = deviation;
  j["pass"] = pass;
  j["margins"] = std::move(margins);
  return j;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct Table {
  std::string suffix;  ///< appended to the report stem, empty for the checks table
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) s += (k ? "," : "") + cells[k];
      s += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s;
  }
};

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return std::to_string(v.get<long long>());
  if (v.is_number()) return num(v.get<double>());
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return v.dump();
}

/// Plot-ready tables derived from a report document.
std::vector<Table> tables_from_report(const json& doc) {
  std::vector<Table> out;
  Table checks{"", {"criterion", "lambda_re", "lambda_im", "deviation", "pass"}, {}};
  for (const auto& c : doc.at("checks")) {
    const auto& l = c.at("lambda");
    checks.rows.push_back({cell(c.at("criterion")), l.is_null() ? "" : cell(l.at("re")),
                           l.is_null() ? "" : cell(l.at("im")), cell(c.at("deviation")), cell(c.at("pass"))});
  }
  out.push_back(std::move(checks));

  if (doc.contains("bounds")) {
    Table t{".bounds", {"family", "lambda", "N", "value"}, {}};
    for (const auto& est : doc.at("bounds")) {
      const auto& ls = est.at("lambdas");
      const auto& ns = est.at("ns");
      const auto& grid = est.at("grid");
      for (std::size_t i = 0; i < ls.size(); ++i)
        for (std::size_t j = 0; j < ns.size(); ++j)
          t.rows.push_back({cell(est.at("family")), cell(ls[i]), cell(ns[j]), cell(grid[i][j])});
    }
    out.push_back(std::move(t));
  }
  if (doc.contains("spectrum")) {
    Table t{".spectrum", {"index", "re", "im", "reference"}, {}};
    const auto& comp = doc.at("spectrum").at("computed");
    const auto& ref = doc.at("spectrum").at("reference");
    for (std::size_t k = 0; k < comp.size(); ++k)
      t.rows.push_back({std::to_string(k), cell(comp[k].at("re")), cell(comp[k].at("im")),
                        k < ref.size() ? cell(ref[k]) : ""});
    out.push_back(std::move(t));
  }
  if (doc.contains("trajectories")) {
    Table t{".trajectory", {"mode", "x", "u1", "u2", "u3", "u4", "u1_exact", "u2_exact", "u3_exact", "u4_exact"}, {}};
    for (const auto& tr : doc.at("trajectories")) {
      const auto& xs = tr.at("x");
      for (std::size_t k = 0; k < xs.size(); ++k) {
        std::vector<std::string> row{cell(tr.at("mode")), cell(xs[k])};
        for (const auto& v : tr.at("state")[k]) row.push_back(cell(v));
        for (const auto& v : tr.at("exact")[k]) row.push_back(cell(v));
        t.rows.push_back(std::move(row));
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inputs.

struct Loaded {
  std::string label;
  std::optional<HamiltonianOp> h;
  std::optional<BlockOp> raw;
  json structure;
  bool structure_ok = true;
  std::optional<HamiltonianFamily> family;  ///< relative-bound family, when known
};

HamiltonianFamily constant_family(const std::string& label, const HamiltonianOp& h) {
  HamiltonianBlocks blk{h.a(), h.b(), h.c()};
  return HamiltonianFamily{label, [blk](std::size_t) { return std::vector<HamiltonianBlocks>{blk}; }};
}

json structure_check(const OperatorRep& a, const OperatorRep& b, const OperatorRep& c, const OperatorRep* d,
                     double tol, bool& ok) {
  json m;
  const double db = hermitian_deviation(b);
  const double dc = hermitian_deviation(c);
  double dd = 0.0;
  m["b_hermitian_deviation"] = db;
  m["c_hermitian_deviation"] = dc;
  if (d) {
    dd = operator_norm(Matrix(d->entries() + a.entries().adjoint())) / std::max(operator_norm(a), 1.0);
    m["d_plus_a_adjoint_deviation"] = dd;
  }
  const double worst = std::max({db, dc, dd});
  ok = worst <= tol;
  return check("structure", "B = B*, C = C*, D = -A*", std::nullopt, worst, ok, std::move(m));
}

Loaded load_input(const RunConfig& cfg, double struct_tol) {
  Loaded in;
  if (cfg.has_files()) {
    auto a = read_matrix_market(*cfg.a);
    auto b = read_matrix_market(*cfg.b);
    auto c = read_matrix_market(*cfg.c);
    std::optional<OperatorRep> d;
    if (cfg.d) d = read_matrix_market(*cfg.d);
    const Index n = a.rows();
    for (const auto* m : {&a, &b, &c})
      if (m->rows() != n || m->cols() != n) throw DimensionError("blocks A, B, C must be square and of equal size");
    if (d && (d->rows() != n || d->cols() != n)) throw DimensionError("block D must match A");
    in.label = "files";
    in.structure = structure_check(a, b, c, d ? &*d : nullptr, struct_tol, in.structure_ok);
    in.raw = BlockOp(a, b, c, d ? *d : -adjoint(a));
    if (in.structure_ok) {
      in.h = HamiltonianOp(a, b, c, struct_tol);
      in.family = constant_family("files", *in.h);
    }
    return in;
  }
  const std::string which = cfg.builtin.value_or("plate");
  in.label = which;
  if (which == "plate") {
    in.h = plate::build_plate_hamiltonian(cfg.modes);
    in.family = plate::plate_family();
  } else if (which == "example31") {
    in.h = example31_build(plate::build_A(cfg.modes));
    in.family = plate::example31_family();
  } else {
    in.h = random_hamiltonian(cfg.seed, static_cast<Index>(cfg.modes));
    in.family = constant_family("random", *in.h);
  }
  in.raw = in.h->block();
  in.structure = structure_check(in.h->a(), in.h->b(), in.h->c(), nullptr, struct_tol, in.structure_ok);
  return in;
}

json input_json(const RunConfig& cfg) {
  json j;
  if (cfg.has_files()) {
    j["source"] = "files";
    j["a"] = cfg.a->string();
    j["b"] = cfg.b->string();
    j["c"] = cfg.c->string();
    j["d"] = cfg.d ? json(cfg.d->string()) : json(nullptr);
  } else {
    j["source"] = "builtin";
    j["builtin"] = cfg.builtin.value_or("plate");
    j["modes"] = cfg.modes;
  }
  j["seed"] = cfg.seed;
  if (cfg.config) j["config"] = cfg.config->string();
  json ls = json::array();
  for (auto z : cfg.lambdas) ls.push_back(complex_json(z));
  j["lambda"] = ls;
  j["n_schedule"] = cfg.n_schedule;
  j["lambda_schedule"] = cfg.lambda_schedule;
  j["tol"] = cfg.tol ? json(*cfg.tol) : json(nullptr);
  return j;
}

std::vector<Scalar> lambdas_for(const RunConfig& cfg, const HamiltonianOp& h) {
  if (!cfg.lambdas.empty()) return cfg.lambdas;
  const auto d = default_lambdas(h);
  return {d[0], d[1]};
}

// ---------------------------------------------------------------------------
// Commands. Each fills `checks` and may add data sections to `doc`.

struct Outcome {
  json checks = json::array();
  json doc = json::object();  ///< extra sections
};

void cmd_validate(const RunConfig& cfg, Outcome& o) {
  const double tol = cfg.tol.value_or(kDefaultCriterionTolerance);
  auto in = load_input(cfg, tol);
  o.checks.push_back(in.structure);
  const auto direct = symplectic_selfadjoint_direct(*in.raw, tol);
  o.checks.push_back(check("symplectic-direct", "JH = (JH)*", std::nullopt, direct.deviation, direct.pass));
}

bool require_structure(Loaded& in, Outcome& o) {
  o.checks.push_back(in.structure);
  return in.structure_ok;
}

void cmd_factorize(const RunConfig& cfg, Outcome& o) {
  const double tol = cfg.tol.value_or(1e-12);
  auto in = load_input(cfg, kDefaultStructureTolerance);
  if (!require_structure(in, o)) return;
  const auto& h = *in.h;
  for (const auto lambda : lambdas_for(cfg, h)) {
    for (auto kind : {SchurKind::First, SchurKind::Second}) {
      const auto f = frobenius_schur_factorize(h.block(), lambda, kind);
      const std::string name = std::string("frobenius-schur-") + to_string(kind);
      const std::string anchor = kind == SchurKind::First ? "H - l = L diag(S1(l), D - l) R"
                                                          : "H - l = L diag(A - l, S2(l)) R";
      o.checks.push_back(check(name, anchor, lambda, f.residual, f.residual <= tol));
    }
    const auto jh = jh_factorization(h, lambda);
    o.checks.push_back(check("jh-minus", "JH - lJ = L1 diag(-S2(l), -A + l) R1", lambda, jh.minus.residual,
                             jh.minus.residual <= tol));
    o.checks.push_back(check("jh-plus", "JH + conj(l)J = L2 diag(S1(-conj(l)), -A* + conj(l)) R2", lambda,
                             jh.plus.residual, jh.plus.residual <= tol));
    const double ctol = cfg.tol.value_or(kDefaultCriterionTolerance);
    o.checks.push_back(check("jh-middle-adjoint", "-S2(l) = S1(-conj(l))*", lambda, jh.middle_deviation,
                             jh.middle_deviation <= ctol));
  }
}

void cmd_criteria(const RunConfig& cfg, Outcome& o) {
  const double tol = cfg.tol.value_or(kDefaultCriterionTolerance);
  auto in = load_input(cfg, kDefaultStructureTolerance);
  if (!require_structure(in, o)) return;
  const auto& h = *in.h;
  const auto direct = symplectic_selfadjoint_direct(h, tol);
  o.checks.push_back(check("symplectic-direct", "JH = (JH)*", std::nullopt, direct.deviation, direct.pass));
  const auto range = range_criterion(h, tol);
  o.checks.push_back(check("range", "H + iJ and H - iJ are onto", std::nullopt,
                           std::min(range.margin_plus, range.margin_minus), range.pass,
                           json{{"sigma_min_plus", range.margin_plus},
                                {"sigma_min_minus", range.margin_minus},
                                {"threshold", range.threshold}}));
  for (const auto lambda : lambdas_for(cfg, h)) {
    const auto t31 = thm31_criterion(h, lambda, tol);
    o.checks.push_back(check("thm31", "A* + l + C(A - l)^-1 B = (A + conj(l) + B(A* - conj(l))^-1 C)*", lambda,
                             std::max(t31.deviation_2, t31.deviation_3), t31.pass,
                             json{{"deviation_2", t31.deviation_2}, {"deviation_3", t31.deviation_3}}));
    try {
      const auto t32 = thm32_criterion(h, lambda, tol);
      o.checks.push_back(check("thm32", "C + l + A*(B - l)^-1 A and B + l + A(C - l)^-1 A* are symmetric in l", lambda,
                               std::max(t32.deviation_2, t32.deviation_3), t32.pass,
                               json{{"deviation_2", t32.deviation_2}, {"deviation_3", t32.deviation_3}}));
    } catch (const LambdaInSpectrum& e) {
      // B - l or C - l singular: the criterion is not defined at this point
      o.checks.push_back(check("thm32", "C + l + A*(B - l)^-1 A and B + l + A(C - l)^-1 A* are symmetric in l", lambda,
                               0.0, true, json{{"skipped", e.what()}, {"resolvent_margin", e.margin()}}));
    }
  }
}

json estimate_json(const RelBoundEstimate& e) {
  json j;
  j["family"] = e.family;
  j["lambdas"] = e.lambdas;
  j["ns"] = e.ns;
  j["grid"] = e.grid;
  j["n_limit"] = e.n_limit;
  j["tail_gap"] = e.tail_gap;
  j["tail_resolved"] = e.tail_resolved;
  j["bound"] = e.extrapolated_bound;
  j["resolved"] = e.resolved;
  j["monotone_in_N"] = e.monotone_in_N;
  j["classification"] = to_string(e.classification);
  return j;
}

json hypothesis_json(const HypothesisReport& r) {
  json j;
  j["family"] = r.family;
  j["regime"] = to_string(r.regime);
  j["accretive_a"] = r.accretive_a.is_accretive;
  j["accretive_neg_a"] = r.accretive_neg_a.is_accretive;
  j["a_self_adjoint"] = r.a_self_adjoint;
  j["conclusion_deviation"] = r.conclusion.deviation;
  j["conclusion_pass"] = r.conclusion.pass;
  json cases = json::array();
  for (const auto& c : r.cases)
    cases.push_back({{"id", c.id}, {"statement", c.statement}, {"regime_ok", c.regime_ok},
                     {"side_condition", c.side_condition}, {"hypotheses_met", c.hypotheses_met},
                     {"applies", c.applies}, {"conclusion_pass", c.conclusion_pass}, {"sound", c.sound}});
  j["cases"] = cases;
  j["applicable"] = r.applicable();
  j["sound"] = r.sound;
  return j;
}

// Estimates are measurements, not checks: an unresolved or unbounded
// estimate is a legitimate outcome and does not fail the run.
void add_estimate(json& bounds, const RelBoundEstimate& e) { bounds.push_back(estimate_json(e)); }

void cmd_bounds(const RunConfig& cfg, Outcome& o) {
  auto in = load_input(cfg, kDefaultStructureTolerance);
  if (!require_structure(in, o)) return;
  const auto& ls = cfg.lambda_schedule.empty() ? default_lambda_schedule() : cfg.lambda_schedule;
  const auto& ns = cfg.n_schedule.empty() ? default_n_schedule() : cfg.n_schedule;
  json bounds = json::array();

  if (in.label == "plate") {
    for (const char* which : {"A", "zero", "identity"})
      add_estimate(bounds, relative_bound_estimate(plate::plate_operator_family(which), ls, ns));
  }
  const auto rep = corollary_hypothesis_report(*in.h, *in.family, ls, ns);
  for (const auto* e : {&rep.c_by_a, &rep.b_by_as, &rep.a_by_c, &rep.as_by_b}) add_estimate(bounds, *e);
  o.checks.push_back(check("hypothesis-soundness", "a satisfied sufficient condition implies JH = (JH)*",
                           std::nullopt, rep.conclusion.deviation, rep.sound,
                           json{{"applicable", rep.applicable()}}));
  o.doc["bound"] = rep.c_by_a.extrapolated_bound;
  o.doc["classification"] = to_string(rep.c_by_a.classification);
  o.doc["bounds"] = bounds;
  o.doc["hypotheses"] = hypothesis_json(rep);

  if (in.label == "example31") {
    std::vector<std::size_t> wn;
    for (auto n : ns)
      if (n <= 1024) wn.push_back(n);
    if (wn.empty()) wn = {100, 400};
    const OperatorSequence seq{"plate A", [](std::size_t n) { return plate::build_A(n); }};
    const auto w = nonclosedness_witness(seq, wn);
    double worst = 0.0;
    for (std::size_t k = 0; k < wn.size(); ++k) {
      const double expect = plate::kPi * plate::kPi * static_cast<double>(wn[k]);
      worst = std::max(worst, std::abs(w.domain_norm_divergence[k] - expect) / expect);
    }
    o.checks.push_back(check("nonclosedness", "||A x_N||^2 = pi^2 N grows while H u_N = 0", std::nullopt, worst,
                             w.closure_defective && worst <= 1e-10,
                             json{{"slope", w.slope}, {"threshold", w.threshold}}));
    o.doc["nonclosedness"] = json{{"ns", w.ns},
                                  {"domain_norm_divergence", w.domain_norm_divergence},
                                  {"image_norm", w.image_norm},
                                  {"x_norm_sq", w.x_norm_sq},
                                  {"spectral_radius", w.spectral_radius},
                                  {"slope", w.slope},
                                  {"closure_defective", w.closure_defective}};
  }
}

json spectrum_json(const plate::SpectrumReport& s) {
  json comp = json::array();
  for (auto z : s.computed) comp.push_back(complex_json(z));
  json mult = json::array();
  for (const auto& m : s.multiplicities) mult.push_back({{"value", complex_json(m.value)}, {"count", m.count}});
  return json{{"n_modes", s.n_modes}, {"computed", comp}, {"reference", s.reference}, {"multiplicities", mult},
              {"max_abs_error", s.max_abs_error}, {"max_imag", s.max_imag},
              {"symmetry_defect", s.symmetry_defect}, {"max_residual", s.max_residual}};
}

void spectrum_checks(const RunConfig& cfg, const HamiltonianOp& h, Outcome& o) {
  const auto s = plate::spectrum(h);
  const double tol = cfg.tol.value_or(1e-8);
  o.checks.push_back(check("spectrum", "sigma(H) = {k pi : k in Z}, each twice", std::nullopt, s.max_abs_error,
                           s.max_abs_error <= tol, json{{"max_imag", s.max_imag}, {"max_residual", s.max_residual}}));
  o.checks.push_back(check("spectral-symmetry", "sigma(H) = -conj(sigma(H))", std::nullopt, s.symmetry_defect,
                           s.symmetry_defect <= 1e-9));
  o.doc["spectrum"] = spectrum_json(s);
}

void cmd_plate_spectrum(const RunConfig& cfg, Outcome& o, const fs::path& out_dir) {
  const auto h = plate::build_plate_hamiltonian(cfg.modes);
  spectrum_checks(cfg, h, o);
  std::ostringstream mm;
  format_matrix_market(mm, h.dense().entries());
  write_atomic(out_dir / "plate-spectrum.H.mtx", mm.str());
}

plate::PlateProblem default_problem() {
  plate::PlateProblem p;
  p.n_modes = 3;
  p.span_h = 1.0;
  p.rigidity_D = 1.0;
  p.profile[1] = Polynomial{0.0, 0.0, 1.0};                          // x^2
  p.profile[2] = Polynomial{0.0, -1.0, 0.0, 1.0};                    // x^3 - h x
  p.profile[3] = Polynomial{0.5, -1.0, 0.0, 2.0, 0.0, -0.5, 0.25};   // degree 6
  return p;
}

void manufactured_checks(const plate::PlateProblem& p, Outcome& o, bool keep_trajectories) {
  json trajs = json::array();
  for (const auto& [n, profile] : p.load)
    if (!p.profile.count(n)) throw InputError("mode " + std::to_string(n) + " has a load but no profile");
  for (const auto& [n, profile] : p.profile) {
    const auto f = plate::manufactured_fields(n, profile, p.rigidity_D);
    const auto sys = plate::build_mode_system(n);
    const auto traj = plate::solve_mode_ivp(sys, f.state(0.0), p.span_h, f.forcing_polynomials());
    const Vector exact = f.state(p.span_h);
    const double err = (traj.states.back() - exact).norm() / std::max(exact.norm(), 1e-300);
    const std::string mode = "mode " + std::to_string(n);
    o.checks.push_back(check("manufactured-ivp:" + std::to_string(n), "u' = Hu + f reproduces u*(h), " + mode,
                             std::nullopt, err, err <= 1e-8));

    const auto q = p.load.count(n) ? p.load.at(n) : f.load;
    const double res = plate::pde_residual(n, profile, q, p.rigidity_D, p.span_h);
    const double qinf = plate::sup_norm(q, p.span_h);
    o.checks.push_back(check("pde-residual:" + std::to_string(n), "D (d_xx + d_yy)^2 w = q, " + mode, std::nullopt,
                             res, res <= 1e-8 * qinf, json{{"q_sup", qinf}}));

    const auto edge = p.edges.count(n) ? p.edges.at(n) : plate::EdgeData{};
    const double w0 = edge.w0.value_or(profile(0.0));
    const double wh = edge.wh.value_or(profile(p.span_h));
    const auto w = plate::reconstruct_displacement(n, f.u[0], w0, wh, p.span_h);
    double werr = 0.0;
    for (double x : plate::uniform_grid(p.span_h, 33)) werr = std::max(werr, std::abs(w(x) - profile(x)));
    const double scale = std::max(1.0, plate::sup_norm(profile, p.span_h));
    const double ode = plate::reconstruction_residual(w, f.u[0]);
    o.checks.push_back(check("reconstruction:" + std::to_string(n), "w'' - (n pi)^2 w = u1 with edge values, " + mode,
                             std::nullopt, werr / scale, werr / scale <= 1e-9,
                             json{{"ode_residual", ode}, {"w0", w0}, {"wh", wh}}));

    if (keep_trajectories) {
      json xs = json::array(), st = json::array(), ex = json::array();
      for (std::size_t k = 0; k < traj.xs.size(); ++k) {
        xs.push_back(traj.xs[k]);
        json a = json::array(), b = json::array();
        const Vector e = f.state(traj.xs[k]);
        for (Index c = 0; c < 4; ++c) {
          a.push_back(traj.states[k](c).real());
          b.push_back(e(c).real());
        }
        st.push_back(a);
        ex.push_back(b);
      }
      trajs.push_back({{"mode", n}, {"x", xs}, {"state", st}, {"exact", ex}});
    }
  }
  if (keep_trajectories) o.doc["trajectories"] = trajs;
}

void cmd_plate_solve(const RunConfig& cfg, Outcome& o) {
  const auto p = cfg.config ? plate::read_plate_problem(*cfg.config) : default_problem();
  o.doc["problem"] = json{{"n_modes", p.n_modes}, {"span_h", p.span_h}, {"rigidity_D", p.rigidity_D}};
  manufactured_checks(p, o, true);
}

void cmd_plate_verify(const RunConfig& cfg, Outcome& o) {
  const auto h = plate::build_plate_hamiltonian(cfg.modes);
  spectrum_checks(cfg, h, o);
  const auto direct = symplectic_selfadjoint_direct(h);
  o.checks.push_back(check("symplectic-direct", "JH = (JH)*", std::nullopt, direct.deviation,
                           direct.deviation <= 1e-13));
  const auto range = range_criterion(h);
  const double rmin = std::min(range.margin_plus, range.margin_minus);
  o.checks.push_back(check("range", "H + iJ and H - iJ are onto", std::nullopt, rmin, rmin >= 0.999,
                           json{{"sigma_min_plus", range.margin_plus}, {"sigma_min_minus", range.margin_minus}}));
  const auto hs = plate::hsquared_check(h);
  o.checks.push_back(check("h-squared-blocks", "H^2 = diag(A^2, A^2)", std::nullopt, hs.block_deviation,
                           hs.block_deviation <= 1e-12));
  o.checks.push_back(check("h-squared-spectrum", "sigma(H^2) = {l^2 : l in sigma(H)}", std::nullopt,
                           std::max(hs.squaring_defect, hs.reference_defect),
                           hs.squaring_defect <= 1e-8 && hs.reference_defect <= 1e-8,
                           json{{"squaring_defect", hs.squaring_defect}, {"reference_defect", hs.reference_defect},
                                {"sigma_min_h2_plus_1", hs.min_singular_h2_plus_1},
                                {"sigma_min_h_minus_i", hs.min_singular_h_minus_i}}));
  double worst = 0.0;
  bool jordan_ok = true;
  for (const auto& sys : plate::mode_decompose(h)) {
    const double a = static_cast<double>(sys.mode_n) * plate::kPi;
    const std::vector<double> points = sys.mode_n == 0 ? std::vector<double>{0.0} : std::vector<double>{a, -a};
    for (double l : points) {
      const auto j = plate::jordan_chains(sys, l);
      worst = std::max(worst, j.max_residual());
      const bool mult_ok = j.algebraic_multiplicity == 2 && (sys.mode_n != 0 || j.geometric_multiplicity == 1);
      jordan_ok = jordan_ok && mult_ok;
    }
  }
  o.checks.push_back(check("jordan-structure", "root vectors of each mode block", std::nullopt, worst,
                           jordan_ok && worst <= 1e-8));
  manufactured_checks(default_problem(), o, false);
}

// ---------------------------------------------------------------------------

json make_doc(const RunConfig& cfg, Outcome& o) {
  json doc;
  doc["schema"] = 1;
  doc["tool"] = "hamverify";
  doc["command"] = to_string(cfg.command);
  doc["timestamp"] = timestamp();
  doc["input"] = input_json(cfg);
  doc["checks"] = o.checks;
  for (auto& [k, v] : o.doc.items()) doc[k] = v;
  bool pass = true;
  for (const auto& c : o.checks) pass = pass && c.at("pass").get<bool>();
  doc["pass"] = pass;
  return doc;
}

void emit(const json& doc, const fs::path& dir, const std::string& stem, Format format) {
  if (format != Format::Csv) write_atomic(dir / (stem + ".json"), doc.dump(2) + "\n");
  if (format != Format::Json)
    for (const auto& t : tables_from_report(doc)) write_atomic(dir / (stem + t.suffix + ".csv"), t.csv());
}

int cmd_render(const RunConfig& cfg, std::ostream& log) {
  std::vector<fs::path> inputs = cfg.reports.empty() ? std::vector<fs::path>{cfg.out} : cfg.reports;
  std::vector<fs::path> files;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  const fs::path dest = cfg.out / "render";
  std::size_t rendered = 0;
  for (const auto& f : files) {
    std::ifstream in(f);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(f.string(), 0, e.what());
    }
    if (!doc.is_object() || !doc.contains("schema") || !doc.contains("checks")) continue;
    if (doc.at("schema") != 1) throw ParseError(f.string(), 0, "unsupported report schema");
    for (const auto& t : tables_from_report(doc)) {
      const auto path = dest / (f.stem().string() + t.suffix + ".csv");
      write_atomic(path, t.csv());
      log << "wrote " << path.string() << "\n";
    }
    ++rendered;
  }
  if (rendered == 0) throw MissingReport("no JSON reports found");
  return kExitPass;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  if (cfg.command == Command::Render) return cmd_render(cfg, log);
  Outcome o;
  switch (cfg.command) {
    case Command::Validate: cmd_validate(cfg, o); break;
    case Command::Factorize: cmd_factorize(cfg, o); break;
    case Command::Criteria: cmd_criteria(cfg, o); break;
    case Command::Bounds: cmd_bounds(cfg, o); break;
    case Command::PlateSpectrum: cmd_plate_spectrum(cfg, o, cfg.out); break;
    case Command::PlateSolve: cmd_plate_solve(cfg, o); break;
    case Command::PlateVerify: cmd_plate_verify(cfg, o); break;
    case Command::Render: break;
  }
  const json doc = make_doc(cfg, o);
  emit(doc, cfg.out, to_string(cfg.command), cfg.format);
  for (const auto& c : doc.at("checks")) {
    log << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("criterion").get<std::string>();
    if (!c.at("lambda").is_null()) log << " lambda=" << num(c["lambda"]["re"]) << (c["lambda"]["im"] < 0 ? "" : "+")
                                       << num(c["lambda"]["im"]) << "i";
    log << " deviation=" << num(c.at("deviation").get<double>()) << "\n";
  }
  return doc.at("pass").get<bool>() ? kExitPass : kExitCheckFailed;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitPass;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  try {
    return run(cfg, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << "\n";
  } catch (const MissingReport& e) {
    err << "missing report: " << e.what() << "\n";
  } catch (const LambdaInSpectrum& e) {
    err << "lambda rejected: " << e.what() << "\n";
  } catch (const BasisMismatch& e) {
    err << "basis mismatch: " << e.what() << "\n";
  } catch (const Error& e) {
    err << "check failed: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
  }
  return kExitInputError;
}

}  // namespace hamverify::cli
