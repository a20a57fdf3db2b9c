// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fbh/basis.hpp"
#include "fbh/hardy.hpp"
#include "fbh/kernels.hpp"
#include "fbh/maximal.hpp"
#include "fbh/specfun.hpp"

using namespace fbh;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double spread(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

double rel_change(double a, double b) { return std::fabs(b / a - 1.0); }

double sextic_bump(double x, double c, double w) {
  const double u = (x - c) / w;
  return std::fabs(u) < 1.0 ? std::pow(1.0 - u * u, 3) : 0.0;
}

const EigenBasis& large_basis() {
  static const EigenBasis b(Order(0.0), 200000);
  return b;
}

// ---------------------------------------------------------------- 1

double j0_series(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= -(x * x / 4.0) / (static_cast<double>(k) * k);
    sum += term;
  }
  return sum;
}

double bisect_j0(double a, double b) {
  double fa = j0_series(a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = j0_series(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

Outcome zeros() {
  const auto start = Clock::now();
  const BesselZeroTable half = bessel_zeros(Order(0.5), 50);
  double err = 0.0;
  for (std::size_t n = 1; n <= 50; ++n) err = std::max(err, std::fabs(half.zero(n) - n * pi));
  const BesselZeroTable zero = bessel_zeros(Order(0.0), 2);
  const double e0 = std::max(std::fabs(zero.zero(1) - bisect_j0(2.0, 3.0)), std::fabs(zero.zero(2) - bisect_j0(5.0, 6.0)));
  const double dt = seconds_since(start);
  return {err < 1e-10 && e0 < 1e-10 && dt < 1.0,
          "max |z - n pi| = " + fmt("%.2e", err) + ", nu = 0 vs bisection " + fmt("%.2e", e0) + ", " + fmt("%.3f s", dt)};
}

// ---------------------------------------------------------------- 2

Outcome gram() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (double nu : {0.0, 0.5, 1.0, 2.5}) {
    const Order o(nu);
    const EigenBasis b(o, 20);
    for (Family fam : {Family::Mu, Family::Lebesgue}) {
      auto r = composite(graded_edges(0.0, 1.0, std::vector<double>{0.0}, 1e-9, 1.3), 24);
      if (fam == Family::Mu) r = with_mu_density(std::move(r), o);
      std::vector<double> g(400, 0.0);
      std::vector<double> row(20);
      for (std::size_t i = 0; i < r.size(); ++i) {
        b.row(fam, r.nodes[i], row);
        for (int n = 0; n < 20; ++n) {
          for (int m = 0; m < 20; ++m) g[n * 20 + m] += r.weights[i] * row[n] * row[m];
        }
      }
      for (int n = 0; n < 20; ++n) {
        for (int m = 0; m < 20; ++m) worst = std::max(worst, std::fabs(g[n * 20 + m] - (n == m ? 1.0 : 0.0)));
      }
    }
  }
  const double dt = seconds_since(start);
  return {worst < 1e-8 && dt < 10.0, "max |G - I| = " + fmt("%.2e", worst) + ", " + fmt("%.2f s", dt)};
}

// ---------------------------------------------------------------- 3

Outcome semigroup_identities() {
  double eig = 0.0;
  double ck = 0.0;
  for (double nu : {0.0, 0.5, 2.5}) {
    const Order o(nu);
    const EigenBasis b(o, 3000);
    const QuadratureRule rm = make_quadrature(Domain::UnitInterval, 600, Measure::Mu, o);
    const QuadratureRule rl = make_quadrature(Domain::UnitInterval, 600, Measure::Lebesgue, o);
    for (double x : {0.2, 0.7}) {
      for (std::size_t n = 1; n <= 10; ++n) {
        double s = 0.0;
        for (std::size_t i = 0; i < rm.size(); ++i) s += rm.weights[i] * poisson_kernel_L(b, 0.3, x, rm.nodes[i]).value * b.phi(n, rm.nodes[i]);
        eig = std::max(eig, std::fabs(s - std::exp(-0.3 * b.lambda(n)) * b.phi(n, x)));
        double l = 0.0;
        for (std::size_t i = 0; i < rl.size(); ++i) l += rl.weights[i] * poisson_kernel_Lsq(b, 0.3, x, rl.nodes[i]).value * b.psi(n, rl.nodes[i]);
        eig = std::max(eig, std::fabs(l - std::exp(-0.3 * b.lambda(n)) * b.psi(n, x)));
      }
    }
    const double x = 0.3;
    const double y = 0.8;
    for (double s : {0.2, 0.5}) {
      for (double t : {0.2, 0.5}) {
        double m = 0.0;
        for (std::size_t i = 0; i < rm.size(); ++i) {
          m += rm.weights[i] * poisson_kernel_L(b, s, x, rm.nodes[i]).value * poisson_kernel_L(b, t, rm.nodes[i], y).value;
        }
        ck = std::max(ck, std::fabs(m - poisson_kernel_L(b, s + t, x, y).value));
        double l = 0.0;
        for (std::size_t i = 0; i < rl.size(); ++i) {
          l += rl.weights[i] * poisson_kernel_Lsq(b, s, x, rl.nodes[i]).value *
               poisson_kernel_Lsq(b, t, rl.nodes[i], y).value;
        }
        ck = std::max(ck, std::fabs(l - poisson_kernel_Lsq(b, s + t, x, y).value));
      }
    }
  }
  return {eig < 1e-8 && ck < 1e-7, "eigen-relation " + fmt("%.2e", eig) + ", Chapman-Kolmogorov " + fmt("%.2e", ck)};
}

// ---------------------------------------------------------------- 4

Outcome half_order_closed_forms() {
  const EigenBasis b(Order(0.5), 3000);
  const double exact = 2.0 * std::exp(-pi) / (1.0 - std::exp(-2.0 * pi));
  const double e1 = std::fabs(poisson_kernel_Lsq(b, 1.0, 0.5, 0.5).value - exact);
  double e2 = 0.0;
  const Order half(0.5);
  for (int a = 0; a < 20; ++a) {
    const double t = 1e-3 * std::pow(1e4, a / 19.0);
    for (int i = 0; i < 20; ++i) {
      const double x = 0.05 + 2.95 * i / 19.0;
      for (int k = 0; k < 20; ++k) {
        const double y = 0.05 + 2.95 * k / 19.0;
        const double ref = (std::exp(-(x - y) * (x - y) / (4.0 * t)) - std::exp(-(x + y) * (x + y) / (4.0 * t))) /
                           (x * y * std::sqrt(4.0 * pi * t));
        e2 = std::max(e2, std::fabs(heat_kernel_halfline(half, t, x, y) - ref) / std::max(1.0, std::fabs(ref)));
      }
    }
  }
  return {e1 < 1e-10 && e2 < 1e-10,
          "P_1(1/2,1/2) error " + fmt("%.2e", e1) + ", half-line heat kernel max error " + fmt("%.2e", e2) +
              " (relative above 1)"};
}

// ---------------------------------------------------------------- 5

Outcome sharp_estimates() {
  const auto start = Clock::now();
  const EigenBasis& b = large_basis();
  bool ok = true;
  double worst = 0.0;
  std::string worst_id;
  for (const std::string& id : estimate_lemmas()) {
    EstimateGrid g = default_estimate_grid(id);
    g.points = 10;
    const EstimateReport coarse = check_sharp_estimates(b, id, g);
    g.refinement = 1;
    const EstimateReport fine = check_sharp_estimates(b, id, g);
    for (const EstimateReport* r : {&coarse, &fine}) {
      ok = ok && std::isfinite(r->min_ratio) && std::isfinite(r->max_ratio) && r->max_ratio > 0.0;
      if (r->two_sided) ok = ok && r->min_ratio > 0.0;
    }
    // one-sided bounds: the min ratio is informative only (the kernel may vanish)
    double change = rel_change(coarse.max_ratio, fine.max_ratio);
    if (coarse.two_sided) change = std::max(change, rel_change(coarse.min_ratio, fine.min_ratio));
    if (change > worst) {
      worst = change;
      worst_id = id;
    }
  }
  const double dt = seconds_since(start);
  return {ok && worst < 0.10 && dt < 300.0,
          std::to_string(estimate_lemmas().size()) + " estimates finite; largest change under refinement " +
              fmt("%.2f%%", 100.0 * worst) + " (" + worst_id + "), " + fmt("%.1f s", dt)};
}

// ---------------------------------------------------------------- 6

Outcome duhamel() {
  const EigenBasis b(Order(0.0), 20000);
  const CutoffRho rho = CutoffRho::standard();
  std::vector<double> e;
  for (int k = 0; k <= 16; ++k) e.push_back(0.05 + 0.4 * k / 16.0);
  const PiecewisePolynomial f = PiecewisePolynomial::interpolate([](double x) { return sextic_bump(x, 0.25, 0.2); }, e);
  const std::vector<double> edges{0.01, 0.2, 0.4, 0.5, 0.6, 0.8, 0.99};
  const QuadratureRule out = composite(edges, 4);
  double closure = 0.0;
  for (double t : {0.05, 0.25, 0.5, 0.9}) closure = std::max(closure, duhamel_residuals(b, rho, f, t, out).closure_error);
  const auto sup_over = [&](int n) {
    double m = 0.0;
    for (double t : {0.01, 0.1, 0.5, 0.9}) {
      for (int i = 1; i <= n; ++i) {
        for (int k = 1; k <= n; ++k) {
          const double x = rho.inner.hi * i / (n + 0.5);
          const double y = rho.inner.hi * k / (n + 0.5);
          for (double v : duhamel_kernels(b, rho, t, x, y)) m = std::max(m, std::fabs(v));
        }
      }
    }
    return m;
  };
  const double m4 = sup_over(4);
  const double m8 = sup_over(8);
  return {closure < 1e-5 && std::isfinite(m8) && m8 < 1.5 * m4 + 1.0,
          "closure " + fmt("%.2e", closure) + ", sup |R| on 4x4 / 8x8 grids " + fmt("%.3g", m4) + " / " + fmt("%.3g", m8)};
}

// ---------------------------------------------------------------- 7

Outcome interval_vs_halfline() {
  const EigenBasis& b = large_basis();
  const Order o = b.order();
  const Interval space = CutoffRho::standard().inner;
  const TimeGrid g = TimeGrid::geometric();
  std::mt19937_64 rng(20240611);
  const auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  struct Input {
    std::vector<double> c, w, s;
  };
  std::vector<Input> inputs(20);
  std::vector<double> focus{0.0};
  for (Input& in : inputs) {
    const int bumps = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < bumps; ++k) {
      const double w = 0.03 + 0.12 * unit();
      in.w.push_back(w);
      in.c.push_back(w + (space.hi - 2.0 * w) * unit());
      in.s.push_back(unit() < 0.5 ? -1.0 : 1.0);
      focus.push_back(in.c.back());
    }
  }
  const auto rule_for = [&](double finest) {
    return with_mu_density(composite(graded_edges(0.0, space.hi, focus, finest, 1.5), 8), o);
  };
  const auto ratios = [&](const SemigroupComparison& cmp) {
    std::vector<double> r;
    for (const Input& in : inputs) {
      std::vector<double> v(cmp.rule().size(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t k = 0; k < in.c.size(); ++k) v[i] += in.s[k] * sextic_bump(cmp.rule().nodes[i], in.c[k], in.w[k]);
      }
      r.push_back(cmp.ratio(v));
    }
    return r;
  };
  const std::vector<double> coarse = ratios(SemigroupComparison(b, rule_for(0.02), g));
  const std::vector<double> fine = ratios(SemigroupComparison(b, rule_for(0.005), g));
  bool ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    ok = ok && std::isfinite(coarse[k]) && std::isfinite(fine[k]) && coarse[k] > 0.0;
    worst = std::max(worst, rel_change(coarse[k], fine[k]));
  }
  return {ok && worst < 0.20, "ratios in [" + fmt("%.3g", *std::min_element(coarse.begin(), coarse.end())) + ", " +
                                  fmt("%.3g", *std::max_element(coarse.begin(), coarse.end())) +
                                  "], largest change under refinement " + fmt("%.2f%%", 100.0 * worst)};
}

// ---------------------------------------------------------------- 8

Outcome uchiyama() {
  const EigenBasis& b = large_basis();
  bool ok = true;
  std::vector<double> nat;
  for (int j = 1; j <= 6; ++j) {
    const UchiyamaReport r = check_uchiyama_conditions(b, UchiyamaFamily::NaturalLocal, j);
    ok = ok && std::isfinite(r.constant) && std::isfinite(r.holder_constant) && r.min_kernel > 0.0;
    nat.push_back(r.constant);
  }
  std::vector<double> leb;
  for (int j : {-5, -4, -3, -2, -1, 1, 2, 3, 4, 5}) {
    const UchiyamaReport r = check_uchiyama_conditions(b, UchiyamaFamily::LebesgueLocal, j);
    ok = ok && std::isfinite(r.constant) && std::isfinite(r.holder_constant) && r.min_kernel > 0.0;
    leb.push_back(r.constant);
  }
  const UchiyamaReport rep = check_uchiyama_conditions(b, UchiyamaFamily::Reparametrized, 0);
  ok = ok && std::isfinite(rep.constant) && std::isfinite(rep.holder_constant) && rep.min_kernel > 0.0;
  return {ok && spread(nat) < 5.0 && spread(leb) < 5.0,
          "max/min over j: natural " + fmt("%.3g", spread(nat)) + ", Lebesgue " + fmt("%.3g", spread(leb)) +
              "; reparametrized constant " + fmt("%.3g", rep.constant)};
}

// ---------------------------------------------------------------- 9

Outcome atom_bound() {
  const EigenBasis& b = large_basis();
  bool ok = true;
  std::string detail;
  for (AtomFamily fam : {AtomFamily::Bessel, AtomFamily::Schrodinger}) {
    const AtomBatchReport r = atom_batch(b, fam, 100, 20240611, 8);
    for (const AtomBatchEntry& e : r.entries) ok = ok && e.valid && std::isfinite(e.maximal_norm);
    ok = ok && std::isfinite(r.max_norm) && std::fabs(r.slope) <= 0.15;
    if (!detail.empty()) detail += "; ";
    detail += std::string(family_name(fam)) + ": max " + fmt("%.3g", r.max_norm) + ", slope " + fmt("%+.4f", r.slope);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 10

Outcome round_trip() {
  const EigenBasis& b = large_basis();
  const TimeGrid g = TimeGrid::geometric();
  bool ok = true;
  double worst_err = 0.0;
  double worst_change = 0.0;
  double lo = INFINITY;
  double hi = 0.0;
  for (AtomFamily fam : {AtomFamily::Bessel, AtomFamily::Schrodinger}) {
    for (const char* name : {"phi1", "x(1-x)", "bump"}) {
      const PiecewisePolynomial f = named_function(name, b, fam);
      const Decomposition d = atomic_decompose(f, fam, b.order());
      worst_err = std::max(worst_err, d.relative_error());
      const H1Report r = h1_norm_report(b, f, fam, g);
      const H1Report rr = h1_norm_report(b, f, fam, g.refined());
      ok = ok && std::isfinite(r.ratio) && r.ratio > 0.0 && std::isfinite(rr.ratio);
      worst_change = std::max(worst_change, rel_change(r.ratio, rr.ratio));
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
  }
  return {ok && worst_err < 1e-6 && worst_change < 0.20,
          "max relative L1 error " + fmt("%.2e", worst_err) + ", h1 ratios in [" + fmt("%.3g", lo) + ", " +
              fmt("%.3g", hi) + "], largest change under refinement " + fmt("%.3f%%", 100.0 * worst_change)};
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"zeros", zeros},
      {"orthonormality", gram},
      {"semigroup identities", semigroup_identities},
      {"half-order closed forms", half_order_closed_forms},
      {"sharp estimates", sharp_estimates},
      {"Duhamel closure", duhamel},
      {"interval vs half-line Poisson", interval_vs_halfline},
      {"Uchiyama conditions", uchiyama},
      {"uniform atom bound", atom_bound},
      {"decomposition round trip", round_trip},
  };
  const auto start = Clock::now();
  int failures = 0;
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    selected[k - 1] = true;
  }
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k]) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2zu %-30s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  const double total = seconds_since(start);
  const bool in_time = total < 900.0;
  if (!in_time) ++failures;
  std::printf("[%s]    %-30s %.1f s (limit 900 s)\n", in_time ? "PASS" : "FAIL", "total runtime", total);
  return failures == 0 ? 0 : 1;
}
