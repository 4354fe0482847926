#include <cmath>
#include <vector>

#include "doctest.h"
#include "potentia/errors.hpp"
#include "potentia/rng.hpp"
#include "potentia/simplex.hpp"

using namespace potentia;

namespace {

SimplexSolution solve_lp(std::vector<double> c,
                         const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& rhs) {
  SimplexSolver s(std::move(c));
  for (std::size_t i = 0; i < rows.size(); ++i) s.add_row(rows[i].data(), rhs[i]);
  return s.solve();
}

}  // namespace

TEST_CASE("box constraints reach the corner") {
  auto sol = solve_lp({1.0, 1.0}, {{1.0, 0.0}, {0.0, 1.0}}, {1.0, 1.0});
  CHECK(sol.objective == doctest::Approx(2.0));
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.x[1] == doctest::Approx(1.0));
}

TEST_CASE("coupling row binds before the box") {
  auto sol = solve_lp({1.0, 1.0}, {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}},
                      {1.0, 1.0, 1.5});
  CHECK(sol.objective == doctest::Approx(1.5));
  CHECK(sol.x[0] + sol.x[1] == doctest::Approx(1.5));
  CHECK(sol.x[0] <= 1.0 + 1e-9);
  CHECK(sol.x[1] <= 1.0 + 1e-9);
}

TEST_CASE("textbook vertex optimum") {
  // max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x <= 3  ->  (3, 1), 11
  auto sol = solve_lp({3.0, 2.0}, {{1.0, 1.0}, {1.0, 3.0}, {1.0, 0.0}},
                      {4.0, 6.0, 3.0});
  CHECK(sol.objective == doctest::Approx(11.0));
  CHECK(sol.x[0] == doctest::Approx(3.0));
  CHECK(sol.x[1] == doctest::Approx(1.0));
}

TEST_CASE("unbounded directions are detected") {
  SimplexSolver bare({1.0});
  CHECK_THROWS_AS(bare.solve(), Error);

  // the only row never touches x0, which can grow freely
  SimplexSolver open({1.0, 0.5});
  const double row[] = {0.0, 1.0};
  open.add_row(row, 1.0);
  CHECK_THROWS_AS(open.solve(), Error);
}

TEST_CASE("zero objective is trivially optimal") {
  auto sol = solve_lp({0.0, 0.0}, {{1.0, 1.0}}, {2.0});
  CHECK(sol.objective == doctest::Approx(0.0));
  CHECK(sol.x[0] == doctest::Approx(0.0));
  CHECK(sol.x[1] == doctest::Approx(0.0));
}

TEST_CASE("incremental rows re-solve through dual pivots") {
  // This is the cutting-plane pattern used by the capacity driver: optimize,
  // then append a violated row and optimize again.
  SimplexSolver s({1.0, 1.0});
  const double r0[] = {1.0, 0.0};
  const double r1[] = {0.0, 1.0};
  s.add_row(r0, 1.0);
  s.add_row(r1, 1.0);
  auto first = s.solve();
  CHECK(first.objective == doctest::Approx(2.0));

  const double cut[] = {1.0, 1.0};
  s.add_row(cut, 1.2);
  auto second = s.solve();
  CHECK(second.objective == doctest::Approx(1.2));
  CHECK(second.x[0] + second.x[1] == doctest::Approx(1.2));

  // a slack cut must not move the optimum
  const double loose[] = {1.0, 1.0};
  s.add_row(loose, 3.0);
  auto third = s.solve();
  CHECK(third.objective == doctest::Approx(1.2));
}

TEST_CASE("diagonal packing splits into independent caps") {
  const std::size_t n = 50;
  SimplexSolver s(std::vector<double>(n, 1.0));
  std::vector<double> row(n);
  double expect = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    const double diag = 1.0 + 0.1 * static_cast<double>(i);
    row[i] = diag;
    s.add_row(row.data(), 1.0);
    expect += 1.0 / diag;
  }
  auto sol = s.solve();
  CHECK(sol.objective == doctest::Approx(expect));
}

TEST_CASE("random dense LPs match a reference vertex enumeration") {
  // 3 variables, 6 rows: enumerate all basic feasible points by brute force
  // and compare objectives. Entries are kept positive so the LP is bounded.
  PathRng rng(2024, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3, m = 6;
    std::vector<std::vector<double>> A(m, std::vector<double>(n));
    std::vector<double> b(m);
    std::vector<double> c(n);
    for (auto& v : c) v = 0.2 + rng.uniform();
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) A[i][j] = 0.05 + rng.uniform();
      b[i] = 0.5 + rng.uniform();
    }

    // reference: test all intersections of 3 tight constraints drawn from the
    // m rows plus the n coordinate planes
    std::vector<std::vector<double>> planes = A;
    std::vector<double> prhs = b;
    for (int j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      planes.push_back(e);
      prhs.push_back(0.0);
    }
    double best = 0.0;
    const int P = static_cast<int>(planes.size());
    for (int i = 0; i < P; ++i)
      for (int j = i + 1; j < P; ++j)
        for (int k = j + 1; k < P; ++k) {
          // solve the 3x3 system by Cramer's rule
          const auto& p = planes;
          const double det =
              p[i][0] * (p[j][1] * p[k][2] - p[j][2] * p[k][1]) -
              p[i][1] * (p[j][0] * p[k][2] - p[j][2] * p[k][0]) +
              p[i][2] * (p[j][0] * p[k][1] - p[j][1] * p[k][0]);
          if (std::fabs(det) < 1e-12) continue;
          double x[3];
          const double rr[3] = {prhs[i], prhs[j], prhs[k]};
          for (int col = 0; col < 3; ++col) {
            double M[3][3];
            for (int a = 0; a < 3; ++a) {
              const int rowsel[3] = {i, j, k};
              for (int bcol = 0; bcol < 3; ++bcol) M[a][bcol] = p[rowsel[a]][bcol];
              M[a][col] = rr[a];
            }
            const double dc = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                              M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                              M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
            x[col] = dc / det;
          }
          bool feas = x[0] >= -1e-9 && x[1] >= -1e-9 && x[2] >= -1e-9;
          for (int r = 0; feas && r < m; ++r) {
            if (A[r][0] * x[0] + A[r][1] * x[1] + A[r][2] * x[2] > b[r] + 1e-9)
              feas = false;
          }
          if (feas) best = std::max(best, c[0] * x[0] + c[1] * x[1] + c[2] * x[2]);
        }

    auto sol = solve_lp(c, A, b);
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-7));
  }
}

TEST_CASE("solutions are deterministic across repeat runs") {
  auto a = solve_lp({2.0, 1.0, 0.5}, {{1.0, 1.0, 1.0}, {2.0, 0.5, 1.0}}, {3.0, 4.0});
  auto b = solve_lp({2.0, 1.0, 0.5}, {{1.0, 1.0, 1.0}, {2.0, 0.5, 1.0}}, {3.0, 4.0});
  CHECK(a.objective == b.objective);
  CHECK(a.x == b.x);
  CHECK(a.pivots == b.pivots);
}
