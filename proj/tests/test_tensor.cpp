#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "test_support.hpp"
#include "tgpr/eig.hpp"
#include "tgpr/reference.hpp"
#include "tgpr/tensor_ops.hpp"

using namespace tgpr;

TEST_CASE("tensor shape bookkeeping") {
  DenseTensor t({2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.order() == 3);
  CHECK_THROWS(DenseTensor({2, 0, 3}));
  t.at({1, 2, 3}) = 7.0;
  CHECK(t[t.size() - 1] == 7.0);
  CHECK_THROWS(t.at({2, 0, 0}));
}

TEST_CASE("dtf round trip is bit exact") {
  Rng rng(3);
  DenseTensor t = testing::random_tensor({3, 4, 2}, rng);
  t[0] = -0.0;
  t[1] = 1e-310;  // subnormal
  const std::string path = (std::filesystem::temp_directory_path() / "t.dtf").string();
  write_dtf(path, t);
  const DenseTensor back = read_dtf(path);
  REQUIRE(back.shape() == t.shape());
  CHECK(std::memcmp(back.data(), t.data(), t.size() * sizeof(double)) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("mode_matricize basic shapes") {
  DenseTensor t({2, 3});
  for (std::size_t i = 0; i < 6; ++i) t[i] = static_cast<double>(i);
  const Matrix m0 = mode_matricize(t, 0);
  CHECK(m0.rows() == 2);
  CHECK(m0.cols() == 3);
  CHECK(m0(1, 2) == 5.0);  // the matrix itself

  const Matrix m1 = mode_matricize(t, 1);
  CHECK(m1.rows() == 3);
  CHECK(m1 == m0.transpose());

  CHECK_THROWS(mode_matricize(t, 2));
}

TEST_CASE("mode_matricize fixed example against index mapping") {
  DenseTensor t({2, 3, 2});
  for (std::size_t i = 0; i < 12; ++i) t[i] = static_cast<double>(i);
  const Matrix m = mode_matricize(t, 1);
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 4);
  Matrix expected(3, 4);
  expected << 0, 1, 6, 7, 2, 3, 8, 9, 4, 5, 10, 11;
  CHECK((m - expected).cwiseAbs().maxCoeff() == 0.0);
  // and against the plain-loop reference
  CHECK((m - reference::mode_matricize(t, 1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matricize/fold round trip over all modes") {
  Rng rng(17);
  for (const auto& shape : std::vector<std::vector<std::size_t>>{
           {5}, {3, 4}, {2, 3, 4}, {2, 3, 2, 4}}) {
    const DenseTensor t = testing::random_tensor(shape, rng);
    for (std::size_t mode = 0; mode < shape.size(); ++mode) {
      const DenseTensor back = mode_fold(mode_matricize(t, mode), shape, mode);
      CHECK(std::memcmp(back.data(), t.data(), t.size() * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("mode_product identity and composition") {
  Rng rng(5);
  const DenseTensor t = testing::random_tensor({2, 3, 2}, rng);
  const DenseTensor same = mode_product(t, Matrix::Identity(3, 3), 1);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(same[i] == doctest::Approx(t[i]));

  const Matrix a = rng.normal_matrix(3, 3);
  const Matrix b = rng.normal_matrix(3, 3);
  const DenseTensor lhs = mode_product(mode_product(t, a, 1), b, 1);
  const DenseTensor rhs = mode_product(t, Matrix(b * a), 1);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-12));

  CHECK_THROWS(mode_product(t, rng.normal_matrix(3, 4), 1));
}

TEST_CASE("mode_product equals per-voxel products on the subject mode") {
  Rng rng(6);
  const DenseTensor coeff = testing::random_tensor({2, 2, 2}, rng);  // F x T1 x T2
  const Matrix x = rng.normal_matrix(2, 2);                          // N x F
  const DenseTensor out = mode_product(coeff, x, 0);
  ConstRowMap cm(coeff.data(), 2, 4);
  ConstRowMap om(out.data(), 2, 4);
  for (Eigen::Index v = 0; v < 4; ++v) {
    const Vector expect = x * cm.col(v);
    CHECK(om(0, v) == doctest::Approx(expect[0]).epsilon(1e-13));
    CHECK(om(1, v) == doctest::Approx(expect[1]).epsilon(1e-13));
  }
}

TEST_CASE("openmp kernels match serial references on random tensors") {
  Rng rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseTensor t = testing::random_tensor({3, 4, 2, 3}, rng);
    for (std::size_t mode = 0; mode < 4; ++mode) {
      const Matrix m = rng.normal_matrix(3, static_cast<Eigen::Index>(t.extent(mode)));
      const DenseTensor fast = mode_product(t, m, mode);
      const DenseTensor slow = reference::mode_product(t, m, mode);
      REQUIRE(fast.shape() == slow.shape());
      for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
      const Matrix mf = mode_matricize(t, mode);
      const Matrix ms = reference::mode_matricize(t, mode);
      CHECK((mf - ms).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("kron_matvec against the dense construction") {
  Rng rng(7);
  SUBCASE("identity factors leave the vector unchanged") {
    const Vector v = rng.normal_vector(12);
    const Vector out =
        kron_matvec({Matrix::Identity(3, 3), Matrix::Identity(4, 4)}, v);
    CHECK((out - v).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("two square factors") {
    const std::vector<Matrix> f{rng.normal_matrix(2, 2), rng.normal_matrix(2, 2)};
    const Vector v = rng.normal_vector(4);
    const Vector a = kron_matvec(f, v);
    const Vector b = reference::kron_dense(f) * v;
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
  }
  SUBCASE("three rectangular factors") {
    const std::vector<Matrix> f{rng.normal_matrix(2, 3), rng.normal_matrix(2, 2),
                                rng.normal_matrix(3, 2)};
    const Vector v = rng.normal_vector(12);
    const Vector a = kron_matvec(f, v);
    REQUIRE(a.size() == 12);
    const Vector b = reference::kron_dense(f) * v;
    CHECK((a - b).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()));
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS(kron_matvec({Matrix::Identity(3, 3)}, rng.normal_vector(4)));
  }
  SUBCASE("sizes up to 4 per mode, one to three factors") {
    for (int trial = 0; trial < 20; ++trial) {
      const int count = 1 + static_cast<int>(rng.uniform01() * 3);
      std::vector<Matrix> f;
      Eigen::Index len = 1;
      for (int k = 0; k < count; ++k) {
        const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.uniform01() * 4);
        const Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.uniform01() * 4);
        f.push_back(rng.normal_matrix(r, c));
        len *= c;
      }
      const Vector v = rng.normal_vector(len);
      const Vector a = kron_matvec(f, v);
      const Vector b = reference::kron_dense(f) * v;
      CHECK((a - b).cwiseAbs().maxCoeff() <=
            1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("kron_diag matches the dense kron diagonal") {
  Rng rng(9);
  std::vector<Matrix> mats{rng.normal_matrix(3, 3), rng.normal_matrix(2, 2),
                           rng.normal_matrix(4, 4)};
  std::vector<Vector> diags;
  for (const Matrix& m : mats) diags.push_back(m.diagonal());
  const dvec d = kron_diag(diags);
  const Matrix dense = reference::kron_dense(mats);
  REQUIRE(d.size() == static_cast<std::size_t>(dense.rows()));
  for (std::size_t i = 0; i < d.size(); ++i)
    CHECK(d[i] == doctest::Approx(dense.diagonal()[static_cast<Eigen::Index>(i)])
                      .epsilon(1e-12));
}

// The algebraic identities every transform in the likelihood path relies on.
TEST_CASE("kronecker and trace identities on random matrices") {
  Rng rng(41);
  const Matrix a = rng.normal_matrix(3, 3);
  const Matrix b = rng.normal_matrix(2, 2);
  const Matrix c = rng.normal_matrix(3, 3);
  const Matrix d = rng.normal_matrix(2, 2);

  SUBCASE("inverse of a triple product") {
    const Matrix b3 = rng.normal_matrix(3, 3);
    const Matrix lhs = (a * c * b3).inverse();
    const Matrix rhs = b3.inverse() * c.inverse() * a.inverse();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("mixed product rule") {
    const Matrix lhs = reference::kron_dense({a, b}) * reference::kron_dense({c, d});
    const Matrix rhs = reference::kron_dense({Matrix(a * c), Matrix(b * d)});
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("inverse distributes over kron") {
    const Matrix lhs = reference::kron_dense({a, b}).inverse();
    const Matrix rhs = reference::kron_dense({a.inverse(), b.inverse()});
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("shifted kron eigendecomposition") {
    const Matrix sa = a * a.transpose();
    const Matrix sb = b * b.transpose();
    const SymEig ea = eig_sym(sa);
    const SymEig eb = eig_sym(sb);
    const Matrix u = reference::kron_dense({ea.eigvecs, eb.eigvecs});
    Vector s(6);
    int k = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) s[k++] = ea.eigvals[i] * eb.eigvals[j] + 1.0;
    const Matrix lhs = reference::kron_dense({sa, sb}) + Matrix::Identity(6, 6);
    const Matrix rhs = u * s.asDiagonal() * u.transpose();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("kron matvec is a sandwiched matrix product") {
    const Matrix cc = rng.normal_matrix(2, 3);
    Vector vc(6);  // column-major vec of cc
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 2; ++i) vc[j * 2 + i] = cc(i, j);
    const Vector lhs = reference::kron_dense({a, b}) * vc;
    const Matrix prod = b * cc * a.transpose();
    Vector rhs(6);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 2; ++i) rhs[j * 2 + i] = prod(i, j);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("trace as a vec inner product") {
    const double lhs = (a.transpose() * c).trace();
    double rhs = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rhs += c(i, j) * a(i, j);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  SUBCASE("log determinant of a kron product") {
    const Matrix sa = a * a.transpose() + 3.0 * Matrix::Identity(3, 3);
    const Matrix sb = b * b.transpose() + 2.0 * Matrix::Identity(2, 2);
    const double lhs = std::log(reference::kron_dense({sa, sb}).determinant());
    const double rhs = 2.0 * std::log(sa.determinant()) + 3.0 * std::log(sb.determinant());
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
  SUBCASE("log determinant of a diagonal matrix") {
    const Vector diag = rng.normal_vector(4).cwiseAbs().array() + 0.5;
    const double lhs = std::log(Matrix(diag.asDiagonal()).determinant());
    CHECK(lhs == doctest::Approx(diag.array().log().sum()).epsilon(1e-12));
  }
}

TEST_CASE("eig_sym basics and clamping") {
  SUBCASE("identity") {
    const SymEig e = eig_sym(Matrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i) CHECK(e.eigvals[i] == doctest::Approx(1.0));
    CHECK((e.eigvecs.transpose() * e.eigvecs - Matrix::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  SUBCASE("diag(4,1) sorted non-increasing") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 4.0;
    m(1, 1) = 1.0;
    const SymEig e = eig_sym(m);
    CHECK(e.eigvals[0] == doctest::Approx(4.0));
    CHECK(e.eigvals[1] == doctest::Approx(1.0));
  }
  SUBCASE("random spd reconstruction") {
    Rng rng(2);
    const Matrix g = rng.normal_matrix(5, 5);
    const Matrix spd = g * g.transpose();
    const SymEig e = eig_sym(spd);
    const Matrix rec = e.eigvecs * e.eigvals.asDiagonal() * e.eigvecs.transpose();
    CHECK((rec - spd).norm() < 1e-10 * spd.norm());
    CHECK((e.eigvecs.transpose() * e.eigvecs - Matrix::Identity(5, 5))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
  SUBCASE("eigenvalues are floored") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;  // second eigenvalue is exactly zero
    const SymEig e = eig_sym(m);
    CHECK(e.eigvals[1] >= eig_floor(1.0));
  }
  SUBCASE("non-finite input throws") {
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(eig_sym(m));
  }
  SUBCASE("asymmetric input throws") {
    Matrix m = Matrix::Identity(3, 3);
    m(0, 2) = 1.0;
    CHECK_THROWS(eig_sym(m));
  }
}
