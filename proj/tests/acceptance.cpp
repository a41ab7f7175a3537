// End-to-end acceptance run: reproduces the reference eigenvalue tables, the
// two-grid comparisons, the lambda sweep and the timing comparison, printing
// one PASS/FAIL line per criterion. Pass --quick to skip the (32, 512) pair.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "crtg/eigsolve.hpp"
#include "crtg/experiments.hpp"

using namespace crtg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

struct Report {
  std::ostringstream details;
  bool ok = true;

  void check(bool condition, const std::string& what) {
    details << "    " << (condition ? "ok  " : "BAD ") << what << '\n';
    ok = ok && condition;
  }
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

struct Outcome {
  int number;
  std::string title;
  bool ok;
};

std::vector<Outcome> outcomes;

void run_criterion(int number, const std::string& title, const std::function<void(Report&)>& body) {
  Report report;
  const auto start = Clock::now();
  try {
    body(report);
  } catch (const std::exception& e) {
    report.check(false, std::string("exception: ") + e.what());
  }
  std::cout << "criterion " << number << ": " << (report.ok ? "PASS" : "FAIL") << "  " << title
            << fmt("  (%.1f s)", seconds_since(start)) << '\n'
            << report.details.str() << std::flush;
  outcomes.push_back({number, title, report.ok});
}

void table_square_unit(Report& r) {
  const auto start = Clock::now();
  const ConvergenceTable t = run_table(Domain::square, ElasticParams{1.0, 1.0, 1.0}, 5, 16);
  const double elapsed = seconds_since(start);
  const double omega_ref[] = {36.968038, 37.188573, 37.246310, 37.261082};
  const double ratio_ref[] = {1.9334, 1.9666, 1.9833};
  for (int i = 0; i < 4; ++i)
    r.check(rel(t.rows[i].omega, omega_ref[i]) <= 1e-3,
            fmt("n=%g  omega %.6f vs %.6f", t.rows[i].n, t.rows[i].omega, omega_ref[i]));
  for (int i = 0; i < 3; ++i)
    r.check(t.rows[i].ratio && std::abs(*t.rows[i].ratio - ratio_ref[i]) <= 0.05,
            fmt("n=%g  ratio %.4f vs %.4f", t.rows[i].n, t.rows[i].ratio.value_or(NAN), ratio_ref[i]));
  r.check(elapsed < 120.0, fmt("runtime %.1f s < 120 s", elapsed));
}

void table_lambda50(Report& r) {
  const ElasticParams params{1.0, 50.0, 1.0};
  const ConvergenceTable sq = run_table(Domain::square, params, 1, 64);
  r.check(rel(sq.rows[0].omega, 52.253005) <= 1e-3, fmt("square n=64  omega %.6f vs %.6f", sq.rows[0].omega, 52.253005));
  const ConvergenceTable l = run_table(Domain::lshape, params, 5, 16);
  r.check(rel(l.rows[2].omega, 125.865404) <= 1e-3,
          fmt("L-shape n=64  omega %.6f vs %.6f", l.rows[2].omega, 125.865404));
  const double ratio_ref[] = {1.3352, 1.2887, 1.2300};
  for (int i = 0; i < 3; ++i)
    r.check(l.rows[i].ratio && std::abs(*l.rows[i].ratio - ratio_ref[i]) <= 0.08,
            fmt("L-shape n=%g  ratio %.4f vs %.4f", l.rows[i].n, l.rows[i].ratio.value_or(NAN), ratio_ref[i]));
}

struct PairResult {
  TwoGridRow s1, s2;
  double direct = 0.0;
  double direct_seconds = 0.0;
};

PairResult run_pair(const ElasticParams& params, int nH, int nh) {
  PairResult p;
  p.s1 = run_twogrid(TwoGridScheme::inverse_iteration, Domain::lshape, params, nH, nh, true);
  p.s2 = run_twogrid(TwoGridScheme::shifted_inverse_iteration, Domain::lshape, params, nH, nh, false);
  p.direct = *p.s1.omega_direct;
  p.direct_seconds = *p.s1.direct_seconds;
  return p;
}

PairResult pair_16_256_unit;  // reused for the timing criterion

void twogrid_unit(Report& r, bool quick) {
  const ElasticParams params{1.0, 1.0, 1.0};
  const PairResult p = run_pair(params, 8, 64);
  r.check(rel(p.s1.omega, 54.375337) <= 1e-3, fmt("(8,64) scheme 1  %.6f vs %.6f", p.s1.omega, 54.375337));
  r.check(rel(p.s2.omega, 54.189403) <= 1e-3, fmt("(8,64) scheme 2  %.6f vs %.6f", p.s2.omega, 54.189403));
  r.check(rel(p.direct, 54.188497) <= 1e-3, fmt("(8,64) direct    %.6f vs %.6f", p.direct, 54.188497));

  std::vector<std::pair<std::pair<int, int>, PairResult>> pairs{{{8, 64}, p}};
  pair_16_256_unit = run_pair(params, 16, 256);
  pairs.push_back({{16, 256}, pair_16_256_unit});
  if (!quick) pairs.push_back({{32, 512}, run_pair(params, 32, 512)});
  for (const auto& [hh, q] : pairs) {
    const double e1 = std::abs(q.s1.omega - q.direct), e2 = std::abs(q.s2.omega - q.direct);
    r.check(e2 <= e1, fmt("(%g,%g) ordering |w2 - wh| = %.3e", hh.first, hh.second, e2) + fmt(" <= |w1 - wh| = %.3e", e1));
  }
}

void twogrid_lambda50(Report& r) {
  const PairResult p = run_pair(ElasticParams{1.0, 50.0, 1.0}, 16, 256);
  r.check(rel(p.s2.omega, p.direct) <= 1e-3, fmt("(16,256) scheme 2 %.6f vs direct %.6f", p.s2.omega, p.direct));
  r.check(rel(p.s2.omega, 127.095813) <= 1e-3, fmt("(16,256) scheme 2 %.6f vs %.6f", p.s2.omega, 127.095813));
  r.check(rel(p.direct, 127.092195) <= 1e-3, fmt("(16,256) direct   %.6f vs %.6f", p.direct, 127.092195));
}

void properties(Report& r) {
  const auto start = Clock::now();
  const std::array<Point, 3> tri{{{0.2, 0.1}, {1.1, 0.3}, {0.4, 0.9}}};
  const double area = signed_area(tri[0], tri[1], tri[2]);

  const LocalMatrix m = local_mass(tri, 1.7);
  bool diag_exact = true;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const double expected = i == j ? 1.7 * area / 3.0 : 0.0;
      diag_exact = diag_exact && std::abs(m[i][j] - expected) <= 1e-15 * 1.7 * area;
    }
  r.check(diag_exact, "local mass is diag(rho |K| / 3)");

  const LocalMatrix k = local_stiffness(tri, ElasticParams{1.0, 50.0, 1.0});
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int c = 0; c < 2; ++c) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += k[i][2 * j + c];
      worst = std::max(worst, std::abs(s));
      for (int j = 0; j < 6; ++j) scale = std::max(scale, std::abs(k[i][j]));
    }
  r.check(worst <= 1e-13 * scale, fmt("translations in the local stiffness kernel (%.1e)", worst / scale));

  const TriangleMesh mesh = build_lshape_mesh(16);
  const Vector quad = cr_interpolate_all_edges([](const Point& p) { return Vec2{p.x * p.x - p.y * p.y, 3 * p.x * p.y + p.y * p.y}; }, mesh);
  const Vector lin = cr_interpolate_all_edges([](const Point& p) { return Vec2{1 + 2 * p.x - 3 * p.y, -p.x + 0.5 * p.y}; }, mesh);
  double div_err = 0.0, p1_err = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = mesh.triangle_points(t);
    const double a = triangle_area(mesh, t);
    const double cx = (p[0].x + p[1].x + p[2].x) / 3, cy = (p[0].y + p[1].y + p[2].y) / 3;
    // div (x^2 - y^2, 3xy + y^2) = 2x + 3x + 2y, linear: exact mean at the centroid
    div_err = std::max(div_err, std::abs(a * element_divergence(mesh, t, quad) - a * (5 * cx + 2 * cy)));
    const auto g = element_gradient(mesh, t, lin);
    p1_err = std::max({p1_err, std::abs(g[0].x - 2), std::abs(g[0].y + 3), std::abs(g[1].x + 1), std::abs(g[1].y - 0.5)});
  }
  r.check(div_err <= 1e-12, fmt("element divergence mean identity (%.1e)", div_err));
  const auto mids = edge_midpoints(mesh);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    p1_err = std::max(p1_err, std::abs(lin[2 * e] - (1 + 2 * mids[e].x - 3 * mids[e].y)));
  r.check(p1_err <= 1e-12, fmt("interpolation reproduces P1 (%.1e)", p1_err));

  const AssembledSystem sys = assemble(std::make_shared<const TriangleMesh>(mesh), ElasticParams{1.0, 50.0, 1.0});
  r.check(sys.stiffness.is_symmetric() && sys.mass.is_symmetric(), "assembled matrices symmetric");

  bool mesh_ok = true;
  for (Domain d : {Domain::square, Domain::lshape}) {
    const TriangleMesh mm = build_mesh(d, 32);
    const long euler = static_cast<long>(mm.num_vertices()) - static_cast<long>(mm.num_edges()) +
                       static_cast<long>(mm.num_triangles());
    mesh_ok = mesh_ok && euler == 1 && std::abs(total_area(mm) - domain_area(d)) <= 1e-13;
  }
  r.check(mesh_ok, "mesh Euler characteristic and area");

  const SolverConfig config;
  const auto pairs = smallest_eigenpairs(sys, 3, config);
  double res = 0.0;
  for (const auto& p : pairs) {
    Vector au = sys.stiffness.multiply(p.u);
    const double ref = norm2(au);
    axpy(-p.omega, sys.mass.multiply(p.u), au);
    res = std::max(res, norm2(au) / ref);
  }
  r.check(res <= 1e-10, fmt("eigen residual %.1e <= 1e-10 relative", res));

  Vector u = pairs[0].u;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += 0.01 * std::sin(static_cast<double>(i));
  const double q = rayleigh_quotient(u, sys.stiffness, sys.mass);
  bool invariant = true;
  for (double s : {-7.0, 1e-8, 3e5}) {
    Vector v = u;
    for (double& x : v) x *= s;
    invariant = invariant && rel(rayleigh_quotient(v, sys.stiffness, sys.mass), q) <= 1e-14;
  }
  r.check(invariant, "Rayleigh quotient scale invariance");
  const double elapsed = seconds_since(start);
  r.check(elapsed < 10.0, fmt("runtime %.2f s < 10 s", elapsed));
}

void locking(Report& r) {
  const std::vector<double> lambdas{1.0, 1e3, 1e5, 1e8};
  for (Domain d : {Domain::square, Domain::lshape}) {
    const LockingSweep sweep = run_locking_sweep(d, lambdas, 64, 8);
    for (const auto& row : sweep.rows)
      r.details << "    " << to_string(d) << " lambda=" << format_number(row.lambda)
                << fmt("  proxies direct %.6e  scheme1 %.6e  scheme2 %.6e", row.proxy_direct(), row.proxy_scheme1(),
                       row.proxy_scheme2())
                << (row.ok() ? "" : "  [" + row.status + "]") << (row.lambda > 1e5 ? "  (recorded only)" : "")
                << '\n';
    const char* names[] = {"direct", "scheme 1", "scheme 2"};
    double (LockingRow::*proxy[])() const = {&LockingRow::proxy_direct, &LockingRow::proxy_scheme1,
                                             &LockingRow::proxy_scheme2};
    for (int m = 0; m < 3; ++m) {
      double lo = INFINITY, hi = 0.0;
      bool finite = true;
      for (const auto& row : sweep.rows) {
        if (row.lambda > 1e5) continue;
        const double v = (row.*proxy[m])();
        finite = finite && std::isfinite(v) && v > 0.0;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      r.check(finite && hi < 10.0 * lo,
              to_string(d) + " " + names[m] + fmt(": max/min proxy over lambda<=1e5 = %.3f < 10", hi / lo));
    }
  }
}

void timing(Report& r) {
  const PairResult& p = pair_16_256_unit;
  if (p.direct_seconds == 0.0) throw std::runtime_error("the (16,256) pair was not computed");
  r.check(p.s1.seconds < p.direct_seconds,
          fmt("scheme 1 %.2f s < direct %.2f s", p.s1.seconds, p.direct_seconds));
  r.check(p.s2.seconds < p.direct_seconds,
          fmt("scheme 2 %.2f s < direct %.2f s", p.s2.seconds, p.direct_seconds));
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      quick = true;
    } else {
      std::cerr << "usage: acceptance [--quick]\n";
      return 2;
    }
  }
  run_criterion(1, "square convergence table, mu = lambda = 1", table_square_unit);
  run_criterion(2, "convergence tables, lambda = 50", table_lambda50);
  run_criterion(3, "L-shape two-grid schemes, mu = lambda = 1", [&](Report& r) { twogrid_unit(r, quick); });
  run_criterion(4, "L-shape two-grid scheme 2, lambda = 50, (16, 256)", twogrid_lambda50);
  run_criterion(5, "property suite", properties);
  run_criterion(6, "locking-free proxy errors across lambda", locking);
  run_criterion(7, "two-grid wall time below the direct solve at (16, 256)", timing);

  int failed = 0;
  std::cout << "\nsummary\n";
  for (const auto& o : outcomes) {
    std::cout << "  criterion " << o.number << ": " << (o.ok ? "PASS" : "FAIL") << "  " << o.title << '\n';
    failed += o.ok ? 0 : 1;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed\n" : "all criteria passed\n");
  return failed ? 1 : 0;
}
