#include "dmfkit/cli.hpp"

#include "dmfkit/optimizer.hpp"
#include "dmfkit/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>

namespace dmfkit {

std::string version() { return DMFKIT_VERSION; }

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SeedFlag {
  std::optional<std::uint64_t> value;

  // --seed, else DMFKIT_SEED, else 0.
  std::uint64_t resolve() const {
    if (value) return *value;
    const char* env = std::getenv("DMFKIT_SEED");
    if (env == nullptr || *env == '\0') return 0;
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end) throw UsageError(std::string("DMFKIT_SEED is not an unsigned integer: ") + env);
    return v;
  }
};

struct SourceFlags {
  std::string basis = "even:10,0.05,2.2";
  std::string integrals;
  std::optional<double> Z;
  std::optional<int> q;

  void add_to(CLI::App* cmd, bool with_q) {
    auto* b = cmd->add_option("--basis", basis, "even:count,alpha0,beta")->capture_default_str();
    auto* f = cmd->add_option("--integrals", integrals, "integral interchange file")->check(CLI::ExistingFile);
    b->excludes(f);
    cmd->add_option("--Z", Z, "nuclear charge");
    if (with_q) cmd->add_option("--q", q, "spin states per particle")->check(CLI::IsMember({1, 2}));
  }

  IntegralSet build(std::optional<int> forced_q = std::nullopt) const {
    if (!integrals.empty()) {
      IntegralSet set = load_interchange(integrals);
      if (Z && std::abs(*Z - set.Z) > 1e-12)
        throw UsageError("--Z " + std::to_string(*Z) + " disagrees with Z in " + integrals);
      if (forced_q) {
        set.q = *forced_q;
      } else if (q && *q != set.q) {
        throw UsageError("--q " + std::to_string(*q) + " disagrees with q in " + integrals);
      }
      return set;
    }
    if (!Z) throw UsageError("--Z is required unless --integrals is given");
    BasisSpec spec;
    try {
      spec = parse_basis(basis);
      spec.Z = *Z;
      spec.q = forced_q ? *forced_q : q.value_or(1);
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return build_even_tempered(spec);
  }

  json describe() const {
    json j;
    if (integrals.empty())
      j["basis"] = basis;
    else
      j["integrals"] = integrals;
    return j;
  }
};

json energy_json(const EnergyBreakdown& e) {
  return {{"one_body_ha", e.one_body},
          {"direct_ha", e.direct},
          {"exchange_x_ha", e.exchange_x},
          {"exchange_hole_ha", e.exchange_hole},
          {"total_ha", e.total}};
}

json result_json(const MinimizeResult& r) {
  return {{"energy", energy_json(r.energy)},
          {"occupations", std::vector<double>(r.occupations.data(), r.occupations.data() + r.occupations.size())},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"trace_electrons", r.trace},
          {"active_trace", r.active_trace},
          {"best_start", r.best_start},
          {"start_energies_ha", r.start_energies}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write to " + path + " failed");
}

// Particle number checks shared by minimize and zscan.
void check_particles(double N, const IntegralSet& set) {
  if (!(N > 0.0)) throw UsageError("--N must be positive");
  if (N > set.q * set.n() + 1e-12) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "N=%g exceeds q*n = %d for this basis", N, set.q * set.n());
    throw UsageError(buf);
  }
  if (set.q == 2 && (N != std::floor(N) || static_cast<long long>(N) % 2 != 0))
    throw UsageError("q=2 needs an even integer N");
}

struct OptimizerFlags {
  std::optional<double> tol;
  int starts = MinimizeOptions{}.starts;
  int max_iter = MinimizeOptions{}.max_iter;
  SeedFlag seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--tol", tol, "step tolerance (Frobenius)")->check(CLI::PositiveNumber);
    cmd->add_option("--starts", starts, "random starts besides aufbau")->check(CLI::Range(1, 1000));
    cmd->add_option("--max-iter", max_iter, "iteration cap per start")->check(CLI::Range(1, 100000000));
    cmd->add_option("--seed", seed.value, "random seed (falls back to DMFKIT_SEED)");
  }

  MinimizeOptions resolve() const {
    MinimizeOptions o;
    if (tol) o.tol_step = *tol;
    o.starts = starts;
    o.max_iter = max_iter;
    o.seed = seed.resolve();
    return o;
  }

  static json describe(const MinimizeOptions& o) {
    return {{"tol_step", o.tol_step},  {"tol_energy", o.tol_energy}, {"max_iter", o.max_iter},
            {"step0", o.step0},        {"backtrack", o.backtrack},   {"armijo", o.armijo},
            {"starts", o.starts},      {"seed", o.seed}};
  }
};

struct VerifyCmd {
  std::string suite = "all";
  std::optional<std::uint64_t> trials;
  std::optional<double> N;
  std::string integrals;
  SeedFlag seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--suite", suite)
        ->check(CLI::IsMember({"lemma", "fdl", "sandwich", "psd", "all"}))
        ->capture_default_str();
    cmd->add_option("--trials", trials, "random trials (lemma pairs or sandwich points)");
    cmd->add_option("--seed", seed.value, "random seed (falls back to DMFKIT_SEED)");
    cmd->add_option("--integrals", integrals, "integral interchange file for psd/sandwich")
        ->check(CLI::ExistingFile);
    cmd->add_option("--N", N, "particle number for the sandwich suite")->check(CLI::PositiveNumber);
  }

  int run(std::ostream& out) const {
    const std::uint64_t s = seed.resolve();
    const bool all = suite == "all";
    std::optional<IntegralSet> file_set;
    if (!integrals.empty()) file_set = load_interchange(integrals);

    bool ok = true;
    auto emit = [&](VerificationReport rep, Clock::time_point t0) {
      json j = rep.to_json();
      j["wall_time_s"] = seconds_since(t0);
      out << j.dump() << "\n";
      ok = ok && rep.passed;
    };

    if (all || suite == "lemma") {
      const auto t0 = Clock::now();
      emit(lemma_suite(trials.value_or(1'000'000), s), t0);
    }
    if (all || suite == "fdl") {
      const auto t0 = Clock::now();
      emit(fdl_suite(s), t0);
    }
    if (all || suite == "psd") {
      const auto t0 = Clock::now();
      emit(psd_suite(file_set ? std::vector<IntegralSet>{*file_set} : builtin_psd_sets()), t0);
    }
    if (all || suite == "sandwich") {
      const auto t0 = Clock::now();
      const IntegralSet set = file_set ? *file_set : build_even_tempered(builtin_basis(8, 2.0, 2));
      const double n_particles = N ? *N : (set.n_hint > 0 ? set.n_hint : 2.0);
      emit(sandwich_suite(set, n_particles, trials.value_or(1000), s), t0);
    }
    return ok ? kExitOk : kExitFailure;
  }
};

std::vector<std::string> command_line(int argc, const char* const* argv) {
  return std::vector<std::string>(argv, argv + argc);
}

struct MinimizeCmd {
  std::string functional;
  std::optional<double> N;
  std::string json_out;
  SourceFlags source;
  OptimizerFlags optimizer;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--functional", functional)->required()->check(CLI::IsMember({"hf", "mueller", "ca"}));
    cmd->add_option("--N", N, "electron count (defaults to Z)");
    cmd->add_option("--json", json_out, "write the run record here");
    source.add_to(cmd, true);
    optimizer.add_to(cmd);
  }

  int run(const std::vector<std::string>& argv, std::ostream& out) const {
    const auto t0 = Clock::now();
    const FunctionalKind kind = *parse_functional(functional);
    const MinimizeOptions opts = optimizer.resolve();
    const IntegralSet set = source.build();
    const double n_particles = N ? *N : (set.n_hint > 0 ? set.n_hint : set.Z);
    check_particles(n_particles, set);

    const MinimizeResult r = minimize_chained(set, n_particles, kind, opts);

    json options = source.describe();
    options.update({{"functional", functional}, {"Z", set.Z}, {"N", n_particles}, {"q", set.q}});
    options.update(OptimizerFlags::describe(opts));
    json record = {{"command", "minimize"},
                   {"command_line", argv},
                   {"options", options},
                   {"provenance", set.provenance},
                   {"result", result_json(r)},
                   {"seed", opts.seed},
                   {"version", version()},
                   {"wall_time_s", seconds_since(t0)}};
    out << record.dump() << "\n";
    if (!json_out.empty()) {
      record["result"]["energy_trace_ha"] = r.energy_trace;
      write_file(json_out, record.dump(2) + "\n");
    }
    return r.converged ? kExitOk : kExitFailure;
  }
};

std::vector<int> parse_z_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("--z expects A..B, got '" + text + "'");
  auto parse_int = [&](std::string_view part) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
      throw UsageError("--z expects integers A..B, got '" + text + "'");
    return v;
  };
  const std::string_view sv(text);
  const int a = parse_int(sv.substr(0, dots));
  const int b = parse_int(sv.substr(dots + 2));
  if (b < a) throw UsageError("empty Z range " + text);
  if (a < 1) throw UsageError("Z range must start at 1 or above");
  std::vector<int> zs;
  for (int z = a; z <= b; ++z) zs.push_back(z);
  return zs;
}

struct ZscanCmd {
  std::string range;
  std::string functional = "all";
  std::string csv;
  std::string basis = "even:10,0.05,2.2";
  int q = 1;
  OptimizerFlags optimizer;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--z", range, "Z range A..B")->required();
    cmd->add_option("--functional", functional)
        ->check(CLI::IsMember({"hf", "mueller", "ca", "all"}))
        ->capture_default_str();
    cmd->add_option("--csv", csv, "output CSV path")->required();
    cmd->add_option("--basis", basis, "even:count,alpha0,beta")->capture_default_str();
    cmd->add_option("--q", q, "spin states per particle")->check(CLI::IsMember({1, 2}))->capture_default_str();
    optimizer.add_to(cmd);
  }

  int run(std::ostream& out) const {
    const auto t0 = Clock::now();
    const std::vector<int> zs = parse_z_range(range);
    std::vector<FunctionalKind> kinds;
    if (functional == "all")
      kinds.assign(std::begin(kAllKinds), std::end(kAllKinds));
    else
      kinds.push_back(*parse_functional(functional));
    BasisSpec base;
    try {
      base = parse_basis(basis);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    for (int z : zs) {
      if (q == 2 && z % 2 != 0) throw UsageError("q=2 needs even Z (neutral atoms have N = Z)");
      if (z > q * base.count) throw UsageError("Z=" + std::to_string(z) + " exceeds q*n for this basis");
    }
    const MinimizeOptions opts = optimizer.resolve();

    std::ofstream f(csv, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + csv + " for writing");

    const auto rows = zscan(kinds, zs, [&](int z) {
      BasisSpec s = base;
      s.Z = z;
      s.q = q;
      return s;
    }, opts);
    write_zscan_csv(rows, f);
    f.flush();
    if (!f) throw IoError("write to " + csv + " failed");

    bool ordering_ok = true, converged = true;
    for (const auto& r : rows) {
      ordering_ok = ordering_ok && r.ordering_ok;
      converged = converged && r.converged;
    }
    out << json{{"command", "zscan"},
                {"csv", csv},
                {"rows", rows.size()},
                {"ordering_ok", ordering_ok},
                {"all_converged", converged},
                {"seed", opts.seed},
                {"version", version()},
                {"wall_time_s", seconds_since(t0)}}
               .dump()
        << "\n";
    return ordering_ok && converged ? kExitOk : kExitFailure;
  }
};

struct Fci2Cmd {
  SourceFlags source;
  OptimizerFlags optimizer;

  void add_to(CLI::App* cmd) {
    source.add_to(cmd, false);
    optimizer.add_to(cmd);
  }

  int run(std::ostream& out) const {
    const auto t0 = Clock::now();
    if (source.integrals.empty()) {
      try {
        if (parse_basis(source.basis).count > kFci2MaxBasis)
          throw UsageError("pair space capped at n = " + std::to_string(kFci2MaxBasis));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    const IntegralSet set = source.build(2);
    if (set.n() > kFci2MaxBasis) throw UsageError("pair space capped at n = " + std::to_string(kFci2MaxBasis));
    const MinimizeOptions opts = optimizer.resolve();

    const double fci = fci2_energy(set);
    const OrderedMinima m = minimize_ordered(set, 2.0, opts);
    const double hf = m.hf.energy.total, ca = m.ca.energy.total, mu = m.mueller.energy.total;
    const bool variational = hf - fci >= -kOrderingTol;
    const bool ordered = mu <= ca + kOrderingTol && ca <= hf + kOrderingTol;
    const bool converged = m.hf.converged && m.ca.converged && m.mueller.converged;

    json options = source.describe();
    options.update({{"Z", set.Z}, {"N", 2}, {"q", 2}});
    options.update(OptimizerFlags::describe(opts));
    out << json{{"command", "fci2"},
                {"options", options},
                {"provenance", set.provenance},
                {"n", set.n()},
                {"fci_ha", fci},
                {"hf_ha", hf},
                {"ca_ha", ca},
                {"mueller_ha", mu},
                {"gap_hf_minus_fci_ha", hf - fci},
                {"gap_ca_minus_fci_ha", ca - fci},
                {"gap_mueller_minus_fci_ha", mu - fci},
                {"variational_ok", variational},
                {"ordering_ok", ordered},
                {"converged", converged},
                {"mueller_below_fci", mu <= fci + kOrderingTol},
                {"seed", opts.seed},
                {"version", version()},
                {"wall_time_s", seconds_since(t0)}}
               .dump()
        << "\n";
    return variational && ordered && converged ? kExitOk : kExitFailure;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hartree-Fock, Mueller and Csanyi-Arias density-matrix functional toolkit", "dmfkit"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  VerifyCmd verify;
  MinimizeCmd minimize;
  ZscanCmd zscan_cmd;
  Fci2Cmd fci2;
  auto* v = app.add_subcommand("verify", "run verification suites, one JSON report per line");
  auto* mz = app.add_subcommand("minimize", "minimize one functional and print the run record");
  auto* zs = app.add_subcommand("zscan", "neutral-atom energies over a Z range as CSV");
  auto* fc = app.add_subcommand("fci2", "two-electron full CI against the three functionals");
  verify.add_to(v);
  minimize.add_to(mz);
  zscan_cmd.add_to(zs);
  fci2.add_to(fc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (v->parsed()) return verify.run(out);
    if (mz->parsed()) return minimize.run(command_line(argc, argv), out);
    if (zs->parsed()) return zscan_cmd.run(out);
    if (fc->parsed()) return fci2.run(out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dmfkit
