#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpcontact/compensation.hpp"
#include "qpcontact/coupling.hpp"
#include "qpcontact/io.hpp"
#include "qpcontact/model_io.hpp"
#include "qpcontact/montecarlo.hpp"
#include "qpcontact/pipeline.hpp"
#include "qpcontact/registry.hpp"

namespace {

using namespace qpcontact;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Validation: return kExitValidation;
    case ErrorCategory::Numeric: return kExitNumeric;
    case ErrorCategory::Io: return kExitIo;
    case ErrorCategory::Usage: return kExitUsage;
  }
  return kExitUsage;
}

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Validation: return "validation";
    case ErrorCategory::Numeric: return "numeric";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Usage: return "usage";
  }
  return "usage";
}

void report_error(std::string_view kind, ErrorCategory cat, const std::string& message, json extra = json::object()) {
  json rec{{"error", kind}, {"category", category_name(cat)}, {"message", message}};
  rec.update(extra);
  std::cerr << rec.dump() << '\n';
}

struct Options {
  std::string model;
  std::string i_range = "1";
  std::string j_range = "1";
  int n_max = 10;
  double tol = kDefaultTolerance;
  std::string method;
  std::string out;
  std::string manifest;
  std::string summary;
  double paths = 1e5;
  std::uint64_t seed = 1;
  double eps = 1e-9;
  double max_steps = 1e7;
  unsigned threads = 0;
  bool two_term = false;
  int order = 32;
};

std::pair<int, int> parse_range(const std::string& s) {
  try {
    const auto colon = s.find(':');
    std::size_t used = 0;
    const int a = std::stoi(s.substr(0, colon), &used);
    if (used != (colon == std::string::npos ? s.size() : colon)) throw std::invalid_argument(s);
    if (colon == std::string::npos) return {a, a};
    const std::string rest = s.substr(colon + 1);
    const int b = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
    return {a, b};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "bad range '" + s + "'; expected a or a:b");
  }
}

Rect start_rect(const Options& o) {
  const auto [i0, i1] = parse_range(o.i_range);
  const auto [j0, j1] = parse_range(o.j_range);
  const Rect r{i0, i1, j0, j1};
  if (r.empty() || i0 < 0 || j0 < 0) throw Error(ErrorKind::InvalidArgument, "start rectangle is empty or leaves the quadrant");
  return r;
}

bool looks_like_path(const std::string& s) {
  return s.find('/') != std::string::npos || s.find('.') != std::string::npos || std::filesystem::exists(s);
}

QuadrantModel resolve_model(const std::string& source) {
  if (source.empty()) throw Error(ErrorKind::InvalidArgument, "--model is required");
  return looks_like_path(source) ? load_model(source) : get_reference(source).model;
}

std::optional<std::function<double(int, int)>> registry_f0(const std::string& source) {
  if (looks_like_path(source)) return std::nullopt;
  ReferenceModel r = get_reference(source);
  if (!r.known_f0) return std::nullopt;
  return r.known_f0;
}

SimConfig sim_config(const Options& o) {
  if (!(o.paths >= 1.0) || !(o.max_steps >= 1.0)) throw Error(ErrorKind::InvalidArgument, "paths and max-steps must be positive");
  return {static_cast<std::uint64_t>(o.paths), o.eps, o.seed, static_cast<std::uint64_t>(o.max_steps), o.threads};
}

// Writes to --out, or stdout when it is empty.
template <class Writer>
void emit(const Options& o, Writer&& write) {
  if (o.out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f = open_output(o.out);
  write(f);
}

void check_common(const Options& o) {
  if (o.n_max < 0) throw Error(ErrorKind::InvalidArgument, "--nmax must be nonnegative");
  if (!(o.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "--tol must be positive");
}

PmfRequest pmf_request(const Options& o) {
  check_common(o);
  PmfRequest req{start_rect(o), o.n_max, o.tol, std::nullopt, sim_config(o)};
  if (!o.method.empty()) req.method = parse_method(o.method);
  return req;
}

ContactPmf compute_pmf(const Options& o, const QuadrantModel& model) {
  PmfRequest req = pmf_request(o);
  if (req.method == PmfMethod::CouplingRecursion) {
    if (auto f0 = registry_f0(o.model)) {
      const Rect margin = required_margin(req.rect, model.origin(), req.n_max);
      return coupling_pmf(model, make_f0_table(model, margin, *f0), req.rect, req.n_max);
    }
  }
  return analytic_pmf(model, req);
}

int run_validate(const Options& o) {
  const QuadrantModel model = resolve_model(o.model);
  const ValidationReport report = validate(model);
  std::cout << report.to_text();
  if (report.usable) return 0;
  report_error("InvalidModel", ErrorCategory::Validation, "model fails its class assumptions",
               {{"failed", report.failed_ids()}});
  return kExitValidation;
}

int run_sequence(const Options& o) {
  const QuadrantModel model = resolve_model(o.model);
  if (o.order < 1) throw Error(ErrorKind::InvalidArgument, "--order must be positive");
  const Compensation comp = build_compensation(model, o.order);
  emit(o, [&](std::ostream& out) { write_sequence_csv(out, comp.series); });
  return 0;
}

int run_pmf(const Options& o, bool cumulative) {
  const QuadrantModel model = resolve_model(o.model);
  const ContactPmf pmf = compute_pmf(o, model);
  emit(o, [&](std::ostream& out) { cumulative ? write_cdf_csv(out, pmf) : write_pmf_csv(out, pmf); });
  return 0;
}

int run_asymptotics(const Options& o) {
  const QuadrantModel model = resolve_model(o.model);
  const Rect rect = start_rect(o);
  const Compensation comp = build_compensation(model, o.order);
  emit(o, [&](std::ostream& out) {
    out.precision(17);
    out << "i,j,rate,constant,regime";
    if (o.two_term) out << ",v_rate,v_amplitude,h_rate,h_amplitude,separated";
    out << '\n';
    for (int i = rect.i0; i <= rect.i1; ++i)
      for (int j = rect.j0; j <= rect.j1; ++j) {
        if (i == 0 && j == 0) continue;
        const TailAsymptotics t = tail_asymptotics(comp.series, comp.products, i, j);
        out << i << ',' << j << ',' << t.rate << ',' << t.constant << ',' << to_string(t.regime);
        if (o.two_term) {
          const TwoTermAsymptotics tt = two_term_asymptotics(comp.series, comp.products, i, j);
          out << ',' << tt.v_rate << ',' << tt.v_amplitude << ',' << tt.h_rate << ',' << tt.h_amplitude << ','
              << (tt.separated ? "true" : "false");
        }
        out << '\n';
      }
  });
  return 0;
}

int run_simulate(const Options& o) {
  const QuadrantModel model = resolve_model(o.model);
  const Rect rect = start_rect(o);
  if (rect.count() != 1) throw Error(ErrorKind::InvalidArgument, "simulate takes a single start point");
  const SimConfig cfg = sim_config(o);
  const SimEstimate est = simulate_contacts(model, rect.i0, rect.j0, cfg);
  emit(o, [&](std::ostream& out) { write_simulation_csv(out, est); });
  if (!o.manifest.empty()) {
    std::ofstream m = open_output(o.manifest);
    m << simulation_manifest(model, cfg, est, rect.i0, rect.j0).dump(2) << '\n';
  }
  return 0;
}

int run_compare(const Options& o) {
  const QuadrantModel model = resolve_model(o.model);
  const Rect rect = start_rect(o);
  if (rect.count() != 1) throw Error(ErrorKind::InvalidArgument, "compare takes a single start point");
  const ContactPmf pmf = compute_pmf(o, model);
  const SimConfig cfg = sim_config(o);
  const SimEstimate est = simulate_contacts(model, rect.i0, rect.j0, cfg);
  double max_z = 0.0;
  double tv = 0.0;
  emit(o, [&](std::ostream& out) {
    out.precision(17);
    out << "n,p,err_bound,p_hat,stderr,z\n";
    const std::size_t N = std::max(est.pmf.size(), static_cast<std::size_t>(o.n_max) + 1);
    for (std::size_t n = 0; n < N; ++n) {
      const double p = n <= static_cast<std::size_t>(o.n_max) ? pmf.at(rect.i0, rect.j0, static_cast<int>(n)) : 0.0;
      const double err = n <= static_cast<std::size_t>(o.n_max) ? pmf.error(rect.i0, rect.j0, static_cast<int>(n)) : 0.0;
      const Estimate e = n < est.pmf.size() ? est.pmf[n] : Estimate{};
      const double z = e.stderr_ > 0.0 ? (e.value - p) / e.stderr_ : 0.0;
      if (n <= static_cast<std::size_t>(o.n_max)) {
        max_z = std::max(max_z, std::abs(z));
        tv += std::abs(e.value - p);
        out << n << ',' << p << ',' << err << ',' << e.value << ',' << e.stderr_ << ',' << z << '\n';
      } else {
        tv += e.value;
      }
    }
  });
  const json summary{{"max_abs_z", max_z},
                     {"total_variation", 0.5 * tv},
                     {"method", to_string(pmf.method())},
                     {"manifest", simulation_manifest(model, cfg, est, rect.i0, rect.j0)}};
  if (o.summary.empty()) {
    std::cerr << summary.dump() << '\n';
  } else {
    std::ofstream s = open_output(o.summary);
    s << summary.dump(2) << '\n';
  }
  return 0;
}

void add_model(CLI::App* cmd, Options& o) {
  cmd->add_option("--model", o.model, "Registry name or model config file")->required();
}

void add_start(CLI::App* cmd, Options& o) {
  cmd->add_option("--i", o.i_range, "Start column, a or a:b");
  cmd->add_option("--j", o.j_range, "Start row, a or a:b");
}

void add_table(CLI::App* cmd, Options& o) {
  cmd->add_option("--nmax", o.n_max, "Largest contact count");
  cmd->add_option("--tol", o.tol, "Truncation tolerance");
  cmd->add_option("--method", o.method,
                  "CompensationSeries | ClosedFormIdentical | FiniteGroupSum | CouplingRecursion | MonteCarlo");
}

void add_sim(CLI::App* cmd, Options& o) {
  cmd->add_option("--paths", o.paths, "Number of simulated paths");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--eps", o.eps, "Escape threshold on alpha_1^i + beta_-1^j");
  cmd->add_option("--max-steps", o.max_steps, "Per-path step cap");
  cmd->add_option("--threads", o.threads, "Worker threads, 0 for all cores")->envname("QPCONTACT_THREADS");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-contact distributions of reflected walks in the quarter plane"};
  app.require_subcommand(1);
  Options o;

  auto* validate_cmd = app.add_subcommand("validate", "Print the assumption report");
  add_model(validate_cmd, o);

  auto* sequence_cmd = app.add_subcommand("sequence", "Compensation sequence as m,alpha,beta");
  add_model(sequence_cmd, o);
  sequence_cmd->add_option("--order", o.order, "Sequence half-length");

  auto* pmf_cmd = app.add_subcommand("pmf", "Contact pmf table");
  auto* cdf_cmd = app.add_subcommand("cdf", "Cumulative contact table");
  for (auto* c : {pmf_cmd, cdf_cmd}) {
    add_model(c, o);
    add_start(c, o);
    add_table(c, o);
    add_sim(c, o);
  }

  auto* asym_cmd = app.add_subcommand("asymptotics", "Geometric tail rate and constant per start");
  add_model(asym_cmd, o);
  add_start(asym_cmd, o);
  asym_cmd->add_option("--order", o.order, "Sequence half-length");
  asym_cmd->add_flag("--two-term", o.two_term, "Also report both geometric components");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo contact counts");
  add_model(sim_cmd, o);
  add_start(sim_cmd, o);
  add_sim(sim_cmd, o);
  sim_cmd->add_option("--manifest", o.manifest, "JSON run manifest path");

  auto* cmp_cmd = app.add_subcommand("compare", "Analytic pmf against simulation");
  add_model(cmp_cmd, o);
  add_start(cmp_cmd, o);
  add_table(cmp_cmd, o);
  add_sim(cmp_cmd, o);
  cmp_cmd->add_option("--summary", o.summary, "JSON summary path (default stderr)");

  for (auto* c : app.get_subcommands({})) c->add_option("--out", o.out, "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", ErrorCategory::Usage, e.what());
    return kExitUsage;
  }

  try {
    if (*validate_cmd) return run_validate(o);
    if (*sequence_cmd) return run_sequence(o);
    if (*pmf_cmd) return run_pmf(o, false);
    if (*cdf_cmd) return run_pmf(o, true);
    if (*asym_cmd) return run_asymptotics(o);
    if (*sim_cmd) return run_simulate(o);
    if (*cmp_cmd) return run_compare(o);
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.category(), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    report_error("Internal", ErrorCategory::Numeric, e.what());
    return kExitNumeric;
  }
  return kExitUsage;
}
