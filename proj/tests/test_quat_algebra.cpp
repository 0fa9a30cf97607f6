#include <catch2/catch_amalgamated.hpp>

#include "polysymp/quat_algebra.hpp"
#include "polysymp/rng.hpp"

#include "oracle_helpers.hpp"

using namespace polysymp;
using oracle::coord_to_quat;
using oracle::qmul;
using oracle::quat_to_coord;

namespace {
Vec4 quat_coord(int axis) { return quat_to_coord(oracle::unit(axis)); }
}  // namespace

TEST_CASE("left multiplication matches quaternion arithmetic", "[quat]") {
  // i*1 = i, j*i = -k, k*k = -1
  CHECK((left_mul(Structure::I, quat_coord(0)) - quat_coord(1)).norm() == 0.0);
  CHECK((left_mul(Structure::J, quat_coord(1)) + quat_coord(3)).norm() == 0.0);
  CHECK((left_mul(Structure::K, quat_coord(3)) + quat_coord(0)).norm() == 0.0);

  SplitMix64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec4 v = oracle::random_vec4(rng);
    for (auto [s, axis] : {std::pair{Structure::I, 1},
                           std::pair{Structure::J, 2},
                           std::pair{Structure::K, 3}}) {
      const Vec4 expected =
          quat_to_coord(qmul(oracle::unit(axis), coord_to_quat(v)));
      CHECK((left_mul(s, v) - expected).norm() < 1e-15);
    }
  }
}

TEST_CASE("quaternion relations hold for the left structures", "[quat]") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec4 v = oracle::random_vec4(rng);
    CHECK((left_mul(Structure::I, left_mul(Structure::J, v)) -
           left_mul(Structure::K, v))
              .norm() < 1e-15);
    for (Structure s : kLeftStructures)
      CHECK((left_mul(s, left_mul(s, v)) + v).norm() < 1e-15);
  }
  // pairwise anticommutation
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const Mat4 la = left_mul_matrix(kLeftStructures[a]);
      const Mat4 lb = left_mul_matrix(kLeftStructures[b]);
      CHECK((la * lb + lb * la).norm() < 1e-15);
    }
}

TEST_CASE("right multiplication by i commutes with every left structure",
          "[quat]") {
  CHECK((right_mul_i(quat_coord(0)) - quat_coord(1)).norm() == 0.0);
  CHECK((right_mul_i(quat_coord(2)) + quat_coord(3)).norm() == 0.0);  // j*i = -k

  SplitMix64 rng(13);
  for (int k = 0; k < 4; ++k) {
    const Vec4 v = Vec4::Unit(k);
    for (Structure s : kLeftStructures)
      CHECK((left_mul(s, right_mul_i(v)) - right_mul_i(left_mul(s, v))).norm() ==
            0.0);
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Vec4 v = oracle::random_vec4(rng);
    for (Structure s : kLeftStructures)
      CHECK((left_mul(s, right_mul_i(v)) - right_mul_i(left_mul(s, v))).norm() <
            1e-15);
  }
}

TEST_CASE("Kaehler form coefficients", "[quat]") {
  const TwoForm wi = kaehler_form(Structure::I);
  CHECK(wi.c[TwoForm::index(0, 1)] == 1.0);   // dx1^dy1
  CHECK(wi.c[TwoForm::index(2, 3)] == -1.0);  // dx2^dy2
  CHECK(wi.c[1] == 0.0);
  CHECK(wi.c[2] == 0.0);
  CHECK(wi.c[3] == 0.0);

  const TwoForm wj = kaehler_form(Structure::J);
  CHECK(wj.c[TwoForm::index(0, 2)] == 1.0);  // dx1^dx2
  CHECK(wj.c[TwoForm::index(1, 3)] == 1.0);  // dy1^dy2
  CHECK(wj.c[0] == 0.0);
  CHECK(wj.c[5] == 0.0);

  const TwoForm wk = kaehler_form(Structure::K);
  CHECK(wk.c[TwoForm::index(0, 3)] == -1.0);  // dx1^dy2
  CHECK(wk.c[TwoForm::index(1, 2)] == 1.0);   // dy1^dx2 = -dx2^dy1
  CHECK(wk.c[0] == 0.0);
  CHECK(wk.c[5] == 0.0);

  // each form is the metric pairing with the matching structure:
  // w_s(u, v) = <S u, v>
  SplitMix64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec4 u = oracle::random_vec4(rng), v = oracle::random_vec4(rng);
    CHECK(kaehler_form(Structure::V)(u, v) ==
          Catch::Approx(right_mul_i(u).dot(v)).margin(1e-14));
    for (Structure s : kLeftStructures)
      CHECK(kaehler_form(s)(u, v) ==
            Catch::Approx(left_mul(s, u).dot(v)).margin(1e-14));
  }
}

TEST_CASE("Hodge star involution and duality types", "[quat]") {
  TwoForm e12;
  e12.c[TwoForm::index(0, 1)] = 1.0;
  TwoForm e34;
  e34.c[TwoForm::index(2, 3)] = 1.0;
  CHECK((hodge_star(e12) - e34).norm() == 0.0);

  const TwoForm wv = kaehler_form(Structure::V);
  CHECK((hodge_star(wv) - wv).norm() == 0.0);
  for (Structure s : kLeftStructures)
    CHECK((hodge_star(kaehler_form(s)) + kaehler_form(s)).norm() == 0.0);

  // star o star = identity on the whole 6-dimensional space
  for (int k = 0; k < 6; ++k) {
    TwoForm b;
    b.c[k] = 1.0;
    CHECK((hodge_star(hodge_star(b)) - b).norm() == 0.0);
  }

  // the three left Kaehler forms are an orthogonal basis of the -1
  // eigenspace and omega_V lies in the +1 eigenspace
  Eigen::Matrix<double, 6, 6> star;
  for (int k = 0; k < 6; ++k) {
    TwoForm b;
    b.c[k] = 1.0;
    const TwoForm s = hodge_star(b);
    for (int r = 0; r < 6; ++r) star(r, k) = s.c[r];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(star);
  int plus = 0, minus = 0;
  for (int k = 0; k < 6; ++k) {
    if (es.eigenvalues()[k] > 0.5) ++plus;
    if (es.eigenvalues()[k] < -0.5) ++minus;
  }
  CHECK(plus == 3);
  CHECK(minus == 3);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      CHECK(kaehler_form(kLeftStructures[a]).dot(
                kaehler_form(kLeftStructures[b])) == 0.0);
}

TEST_CASE("pullback of constant 2-forms", "[quat]") {
  SplitMix64 rng(15);
  const TwoForm b = oracle::random_two_form(rng);
  CHECK((pullback(Mat4::Identity(), b) - b).norm() < 1e-15);
  CHECK((pullback(2.0 * Mat4::Identity(), b) - b * 4.0).norm() < 1e-14);

  Mat4 d = Mat4::Identity();
  d(3, 3) = 2.0;
  const TwoForm p = pullback(d, kaehler_form(Structure::V));
  TwoForm expected;
  expected.c[TwoForm::index(0, 1)] = 1.0;
  expected.c[TwoForm::index(2, 3)] = 2.0;
  CHECK((p - expected).norm() == 0.0);

  // (A*b)(u,v) = b(Au, Av) directly
  for (int trial = 0; trial < 20; ++trial) {
    const Mat4 a = oracle::random_mat4(rng);
    const TwoForm f = oracle::random_two_form(rng);
    const Vec4 u = oracle::random_vec4(rng), v = oracle::random_vec4(rng);
    CHECK(pullback(a, f)(u, v) ==
          Catch::Approx(f(a * u, a * v)).margin(1e-12));
  }
}

TEST_CASE("wedge ratio table and brute-force oracle", "[quat]") {
  const TwoForm wv = kaehler_form(Structure::V);
  CHECK(wedge_ratio(wv, wv) == 2.0);
  for (Structure s : kLeftStructures) {
    CHECK(wedge_ratio(kaehler_form(s), kaehler_form(s)) == -2.0);
    CHECK(wedge_ratio(wv, kaehler_form(s)) == 0.0);
  }

  SplitMix64 rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    const TwoForm b1 = oracle::random_two_form(rng);
    const TwoForm b2 = oracle::random_two_form(rng);
    CHECK(wedge_ratio(b1, b2) ==
          Catch::Approx(oracle::wedge_ratio_bruteforce(b1, b2)).margin(1e-13));
    CHECK(wedge_ratio(b1, b2) == Catch::Approx(wedge_ratio(b2, b1)));
  }

  // degree-2 homogeneity in the map of pullback composed with wedge
  for (int trial = 0; trial < 10; ++trial) {
    const Mat4 a = oracle::random_mat4(rng);
    const TwoForm b1 = oracle::random_two_form(rng);
    const TwoForm b2 = oracle::random_two_form(rng);
    const double t = 1.0 + rng.uniform01();
    CHECK(wedge_ratio(pullback(t * a, b1), b2) ==
          Catch::Approx(t * t * wedge_ratio(pullback(a, b1), b2)));
  }
}

TEST_CASE("reflections are quaternionic involutions", "[quat]") {
  CHECK(reflect(Structure::I, Mat4::Zero()).norm() == 0.0);

  // reflect(I, Id) via the quaternion oracle v -> -(i v) i, column by column
  Mat4 expected;
  for (int axis = 0; axis < 4; ++axis) {
    const Vec4 e = Vec4::Unit(axis);
    oracle::Quat q = coord_to_quat(e);
    oracle::Quat r = qmul(qmul(oracle::unit(1), q), oracle::unit(1));
    for (double& x : r) x = -x;
    expected.col(axis) = quat_to_coord(r);
  }
  CHECK((reflect(Structure::I, Mat4::Identity()) - expected).norm() < 1e-15);
  // ... which is diag(+1, +1, -1, -1) over the quaternion axes (1, i, j, k)
  const Mat4 ri = reflect(Structure::I, Mat4::Identity());
  CHECK(ri(0, 0) == 1.0);
  CHECK(ri(1, 1) == 1.0);
  CHECK(ri(2, 2) == -1.0);
  CHECK(ri(3, 3) == -1.0);
  CHECK(std::abs(ri.norm() * ri.norm() - 4.0) < 1e-14);

  SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat4 a = oracle::random_mat4(rng);
    const Mat4 b = oracle::random_mat4(rng);
    for (Structure s : kLeftStructures) {
      CHECK((reflect(s, reflect(s, a)) - a).norm() < 1e-14);
      // Frobenius isometry
      CHECK(frob(reflect(s, a), reflect(s, b)) ==
            Catch::Approx(frob(a, b)).margin(1e-13));
    }
  }
}

TEST_CASE("eigenspace split of the reflections", "[quat]") {
  SplitMix64 rng(18);
  for (Structure s : kLeftStructures) {
    auto [plus, minus] = reflect_split(s, Mat4::Identity());
    CHECK((reflect(s, plus) - plus).norm() < 1e-14);
    CHECK((reflect(s, minus) + minus).norm() < 1e-14);
    CHECK((plus + minus - Mat4::Identity()).norm() < 1e-14);
  }
  // Id splits under I into the diagonal (1,1,0,0) and (0,0,1,1) parts
  auto [plus, minus] = reflect_split(Structure::I, Mat4::Identity());
  CHECK((plus - Vec4(1, 1, 0, 0).asDiagonal().toDenseMatrix()).norm() < 1e-15);
  CHECK((minus - Vec4(0, 0, 1, 1).asDiagonal().toDenseMatrix()).norm() < 1e-15);

  for (int trial = 0; trial < 20; ++trial) {
    const Mat4 a = oracle::random_mat4(rng);
    for (Structure s : kLeftStructures) {
      auto [p, m] = reflect_split(s, a);
      CHECK((p + m - a).norm() < 1e-14);
      // a fixed point of the reflection splits as (a, 0)
      auto [pp, mm] = reflect_split(s, p);
      CHECK((pp - p).norm() < 1e-14);
      CHECK(mm.norm() < 1e-14);
    }
  }
}
