#include <CLI11.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "config.hpp"
#include "fbh/basis.hpp"
#include "fbh/hardy.hpp"
#include "fbh/kernels.hpp"
#include "fbh/maximal.hpp"
#include "fbh/specfun.hpp"
#include "report.hpp"

using namespace fbh;
using namespace fbh::cli;

namespace {

struct Output {
  std::string name;  // file name under --out
  std::string text;
};

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SeriesKernel parse_kernel(std::string s) {
  for (char& c : s) c = c == '-' ? '_' : c;
  for (SeriesKernel k : {SeriesKernel::PoissonMu, SeriesKernel::PoissonLebesgue, SeriesKernel::HeatMu,
                         SeriesKernel::HeatLebesgue, SeriesKernel::DeltaPoisson, SeriesKernel::DxPoissonMu,
                         SeriesKernel::DyPoissonLebesgue}) {
    if (kernel_name(k) == s) return k;
  }
  throw DomainError("unknown kernel '" + s + "'");
}

UchiyamaFamily parse_uchiyama(const std::string& s) {
  for (UchiyamaFamily f : {UchiyamaFamily::NaturalLocal, UchiyamaFamily::LebesgueLocal, UchiyamaFamily::Reparametrized}) {
    if (uchiyama_family_name(f) == s) return f;
  }
  if (s == "natural") return UchiyamaFamily::NaturalLocal;
  if (s == "lebesgue") return UchiyamaFamily::LebesgueLocal;
  if (s == "reparametrized") return UchiyamaFamily::Reparametrized;
  throw DomainError("unknown Uchiyama family '" + s + "'");
}

double sextic_bump(double x, double c, double w) {
  const double u = (x - c) / w;
  return std::fabs(u) < 1.0 ? std::pow(1.0 - u * u, 3) : 0.0;
}

TimeGrid time_grid(const RunConfig& c) { return TimeGrid::geometric(c.t_min, c.t_max, c.t_ratio); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier-Bessel expansions, Poisson and heat semigroups, maximal functions and atomic Hardy spaces "
               "on (0,1)"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<double> nu;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> n_terms;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--nu", nu, "Bessel order nu > -1/2");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out, "output directory (default: standard output)");
  app.add_option("--n-terms", n_terms, "number of Bessel zeros in the eigenbasis");
  app.add_option("--set", overrides, "key=value override of a configuration entry");

  // zeros
  std::size_t count = 10;
  auto* zeros = app.add_subcommand("zeros", "positive zeros of J_nu as CSV");
  zeros->add_option("--count", count, "number of zeros")->check(CLI::Range(1, 2000000));

  // kernel
  std::string kernel_kind = "poisson_mu";
  std::vector<double> kernel_times{0.1, 0.5};
  std::size_t kernel_points = 10;
  auto* kernel = app.add_subcommand("kernel", "series kernel on a grid as t,x,y,value CSV");
  kernel->add_option("--kind", kernel_kind, "kernel name");
  kernel->add_option("--t", kernel_times, "times")->expected(1, 1000);
  kernel->add_option("--grid", kernel_points, "points per space axis")->check(CLI::Range(1, 2000));

  // estimates
  std::string lemma = "sharp-P";
  std::size_t est_points = 10;
  int est_refine = 0;
  auto* estimates = app.add_subcommand("estimates", "sharp kernel estimate report (JSON)");
  estimates->add_option("--lemma", lemma, "lemma identifier or 'all'");
  estimates->add_option("--grid", est_points, "points per axis")->check(CLI::Range(2, 200));
  estimates->add_option("--refine", est_refine, "midpoint refinements")->check(CLI::Range(0, 4));

  // maximal
  std::string max_function = "phi1";
  std::string max_family = "calL";
  auto* maximal = app.add_subcommand("maximal", "maximal function of a named input as x,value CSV");
  maximal->add_option("--function", max_function, "phi1, x(1-x) or bump");
  maximal->add_option("--family", max_family, "calL or L");

  // duhamel
  double duhamel_t = 0.5;
  auto* duhamel = app.add_subcommand("duhamel", "Duhamel residuals for a smooth bump (JSON)");
  duhamel->add_option("--t", duhamel_t, "time in (0, 1)");

  // uchiyama
  std::string uch_family = "natural";
  int uch_j = 1;
  auto* uchiyama = app.add_subcommand("uchiyama", "Uchiyama condition constants (JSON)");
  uchiyama->add_option("--family", uch_family, "natural, lebesgue or reparametrized");
  uchiyama->add_option("--j", uch_j, "dyadic index");

  // atoms
  auto* atoms = app.add_subcommand("atoms", "atom validation, decomposition and random batches");
  atoms->require_subcommand(1);
  std::string atom_profile = "haar";
  std::string atom_family = "calL";
  double atom_lo = 0.5;
  double atom_hi = 0.6;
  int atom_j = 0;
  double atom_height = 1.0;
  double atom_fraction = 0.3;
  int atom_sign = 1;
  auto* validate = atoms->add_subcommand("validate", "check one atom (JSON)");
  validate->add_option("--profile", atom_profile, "haar, tent, two-bar, special or constant");
  validate->add_option("--family", atom_family, "calL or L");
  validate->add_option("--lo", atom_lo, "left end");
  validate->add_option("--hi", atom_hi, "right end");
  validate->add_option("--j", atom_j, "index of a special atom");
  validate->add_option("--height", atom_height, "multiplier applied to the profile");
  validate->add_option("--fraction", atom_fraction, "two-bar split position in (0,1)");
  validate->add_option("--sign", atom_sign, "two-bar sign");
  std::string dec_function = "x(1-x)";
  std::string dec_family = "calL";
  auto* decompose = atoms->add_subcommand("decompose", "atomic decomposition of a named input (JSON)");
  decompose->add_option("--function", dec_function, "phi1, x(1-x) or bump");
  decompose->add_option("--family", dec_family, "calL or L");
  std::string batch_family = "calL";
  auto* batch = atoms->add_subcommand("batch", "maximal norms of seeded random atoms (JSON)");
  batch->add_option("--family", batch_family, "calL or L");

  // h1-report
  std::string h1_function = "phi1";
  std::string h1_family = "calL";
  bool h1_refine = false;
  auto* h1 = app.add_subcommand("h1-report", "maximal and atomic H1 norms of a named input (JSON)");
  h1->add_option("--function", h1_function, "phi1, x(1-x) or bump");
  h1->add_option("--family", h1_family, "calL or L");
  h1->add_flag("--refine", h1_refine, "also report on the refined time grid");

  // dirichlet
  std::string dir_function = "bump";
  std::vector<double> dir_times{0.0, 1e-3, 1e-2, 1e-1};
  auto* dirichlet = app.add_subcommand("dirichlet", "radial Dirichlet heat evolution traces as t,x,value CSV");
  dirichlet->add_option("--function", dir_function, "phi1, x(1-x) or bump");
  dirichlet->add_option("--t", dir_times, "times")->expected(1, 1000);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) load_config_file(cfg, config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (nu) cfg.nu = *nu;
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (n_terms) cfg.n_terms = *n_terms;
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  std::string operation = "cli";
  try {
    const Order order(cfg.nu);
    std::optional<EigenBasis> basis_store;
    auto basis = [&]() -> const EigenBasis& {
      if (!basis_store) basis_store.emplace(order, cfg.n_terms);
      return *basis_store;
    };
    DecompositionOptions dopt;
    dopt.tolerance = cfg.decomposition_tolerance;
    Output result;

    if (*zeros) {
      operation = "zeros";
      const BesselZeroTable t = bessel_zeros(order, count);
      std::ostringstream os;
      os << "n,value\n";
      for (std::size_t n = 1; n <= t.size(); ++n) os << n << "," << num(t.zero(n)) << "\n";
      result = {"zeros.csv", os.str()};
    } else if (*kernel) {
      operation = "kernel";
      const SeriesKernel k = parse_kernel(kernel_kind);
      std::vector<double> xs;
      for (std::size_t i = 0; i < kernel_points; ++i) xs.push_back((i + 0.5) / kernel_points);
      const KernelGrid g = kernel_grid(basis(), k, kernel_times, xs, xs, cfg.series_tolerance);
      std::ostringstream os;
      os << "t,x,y,value\n";
      for (std::size_t a = 0; a < g.ts.size(); ++a) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
          for (std::size_t j = 0; j < xs.size(); ++j) {
            os << num(g.ts[a]) << "," << num(xs[i]) << "," << num(xs[j]) << "," << num(g.at(a, i, j)) << "\n";
          }
        }
      }
      result = {"kernel-" + kernel_kind + ".csv", os.str()};
    } else if (*estimates) {
      operation = "estimates";
      auto one = [&](const std::string& id) {
        EstimateGrid g = default_estimate_grid(id);
        g.points = est_points;
        g.refinement = est_refine;
        return to_json(check_sharp_estimates(basis(), id, g));
      };
      Json j;
      if (lemma == "all") {
        j = Json::array();
        for (const std::string& id : estimate_lemmas()) j.push_back(one(id));
      } else {
        j = one(lemma);
      }
      result = {"estimates-" + slug(lemma) + ".json", dump(j)};
    } else if (*maximal) {
      operation = "maximal";
      const AtomFamily fam = parse_family(max_family);
      const PiecewisePolynomial f = named_function(max_function, basis(), fam);
      const QuadratureRule rule = norm_rule(f.edges(), fam, order, 1.0 / static_cast<double>(cfg.quad_nodes));
      const MaximalFunction m = maximal_function(basis(), family_semigroup(fam), f, time_grid(cfg), rule);
      std::ostringstream os;
      os << "x,value\n";
      for (std::size_t i = 0; i < m.values.size(); ++i) {
        os << num(m.values.nodes()[i]) << "," << num(m.values.values()[i]) << "\n";
      }
      result = {"maximal-" + slug(max_family) + "-" + slug(max_function) + ".csv", os.str()};
    } else if (*duhamel) {
      operation = "duhamel";
      std::vector<double> e;
      for (int k = 0; k <= 16; ++k) e.push_back(0.05 + 0.4 * k / 16.0);
      const PiecewisePolynomial f =
          PiecewisePolynomial::interpolate([](double x) { return sextic_bump(x, 0.25, 0.2); }, e);
      const std::vector<double> edges{0.01, 0.2, 0.4, 0.5, 0.6, 0.8, 0.99};
      const DuhamelResult r = duhamel_residuals(basis(), CutoffRho::standard(), f, duhamel_t, composite(edges, 4));
      result = {"duhamel.json", dump(duhamel_summary(r))};
    } else if (*uchiyama) {
      operation = "uchiyama";
      const UchiyamaReport r = check_uchiyama_conditions(basis(), parse_uchiyama(uch_family), uch_j);
      result = {"uchiyama-" + slug(uch_family) + "-" + std::to_string(uch_j) + ".json", dump(to_json(r))};
    } else if (*validate) {
      operation = "atoms validate";
      const AtomFamily fam = parse_family(atom_family);
      const Interval i{atom_lo, atom_hi};
      Atom a;
      if (atom_profile == "haar") {
        a = haar_atom(fam, order, i);
      } else if (atom_profile == "tent") {
        a = tent_atom(fam, order, i);
      } else if (atom_profile == "two-bar") {
        a = two_bar_atom(fam, order, i, atom_fraction, atom_sign);
      } else if (atom_profile == "special") {
        a = special_atom(fam, order, atom_j);
      } else if (atom_profile == "constant") {
        a = constant_atom(fam, order, i);
      } else {
        throw DomainError("unknown atom profile '" + atom_profile + "'");
      }
      a.profile = a.profile.scaled(atom_height);
      const AtomCheck c = validate_atom(a, order, 1.0, cfg.cancel_tolerance);
      Json j{{"family", std::string(family_name(fam))}, {"profile", atom_profile}, {"atom", to_json(a)},
             {"check", to_json(c)}};
      result = {"atom-check.json", dump(j)};
    } else if (*decompose) {
      operation = "atoms decompose";
      const AtomFamily fam = parse_family(dec_family);
      const PiecewisePolynomial f = named_function(dec_function, basis(), fam);
      const Decomposition d = atomic_decompose(f, fam, order, dopt);
      Json j = to_json(d);
      j["reconstruct_tolerance"] = cfg.reconstruct_tolerance;
      j["reconstructs"] = d.relative_error() < cfg.reconstruct_tolerance;
      result = {"decomposition-" + slug(dec_family) + "-" + slug(dec_function) + ".json", dump(j)};
    } else if (*batch) {
      operation = "atoms batch";
      const AtomFamily fam = parse_family(batch_family);
      const AtomBatchReport r = atom_batch(basis(), fam, cfg.batch_count, cfg.seed, cfg.max_scale, time_grid(cfg));
      result = {"atom-batch-" + slug(batch_family) + ".json", dump(to_json(r))};
    } else if (*h1) {
      operation = "h1-report";
      const AtomFamily fam = parse_family(h1_family);
      const PiecewisePolynomial f = named_function(h1_function, basis(), fam);
      Json j = to_json(h1_norm_report(basis(), f, fam, time_grid(cfg), dopt));
      j["function"] = h1_function;
      if (h1_refine) j["refined"] = to_json(h1_norm_report(basis(), f, fam, time_grid(cfg).refined(), dopt));
      result = {"h1-report-" + slug(h1_family) + "-" + slug(h1_function) + ".json", dump(j)};
    } else if (*dirichlet) {
      operation = "dirichlet";
      const PiecewisePolynomial f = named_function(dir_function, basis(), AtomFamily::Bessel);
      const QuadratureRule rule = make_quadrature(Domain::UnitInterval, cfg.quad_nodes, Measure::Mu, order);
      std::ostringstream os;
      os << "t,x,value\n";
      for (double t : dir_times) {
        if (t < 0.0) throw DomainError("dirichlet: times must be nonnegative");
        std::vector<double> v(rule.size());
        if (t == 0.0) {
          for (std::size_t i = 0; i < rule.size(); ++i) v[i] = f(rule.nodes[i]);
        } else {
          const SampledFunction u = apply_semigroup(basis(), Semigroup::HeatMu, f, t, rule);
          v.assign(u.values().begin(), u.values().end());
        }
        for (std::size_t i = 0; i < rule.size(); ++i) os << num(t) << "," << num(rule.nodes[i]) << "," << num(v[i]) << "\n";
      }
      result = {"dirichlet-" + slug(dir_function) + ".csv", os.str()};
    }

    if (cfg.out.empty()) {
      std::cout << result.text;
    } else {
      write_atomically(std::filesystem::path(cfg.out) / result.name, result.text);
    }
    return 0;
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cout << error_report(e.operation(), e.what()).dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cout << error_report(operation, e.what()).dump(2) << "\n";
    return 1;
  }
}
