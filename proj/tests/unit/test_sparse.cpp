#include <doctest.h>

#include <sstream>

#include "homogmem/sparse.hpp"

using namespace homogmem;

TEST_CASE("triplets are sorted and duplicates summed") {
  const std::vector<Triplet> t{{1, 1, 2.0}, {0, 1, 1.0}, {0, 0, 4.0}, {1, 0, 1.0}, {0, 0, 1.0}};
  const auto a = SparseMatrix::from_triplets(2, t);
  CHECK(a.nnz() == 4);
  CHECK(a.at(0, 0) == 5.0);
  CHECK(a.at(1, 1) == 2.0);
  CHECK(a.is_symmetric());
  const auto y = a * std::vector<double>{1.0, 2.0};
  CHECK(y[0] == 7.0);
  CHECK(y[1] == 5.0);
  CHECK(a.bilinear(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
}

TEST_CASE("linear combination merges patterns") {
  const auto a = SparseMatrix::identity(3);
  const auto b = SparseMatrix::from_triplets(3, std::vector<Triplet>{{0, 2, 1.0}, {2, 0, 1.0}});
  const auto c = linear_combination(2.0, a, -1.0, b);
  CHECK(c.at(0, 0) == 2.0);
  CHECK(c.at(0, 2) == -1.0);
  CHECK(c.at(1, 2) == 0.0);
}

TEST_CASE("asymmetry is relative to the largest entry") {
  const auto a = SparseMatrix::from_triplets(2, std::vector<Triplet>{{0, 1, 1.0}, {1, 0, 1.5}, {0, 0, 10.0}});
  CHECK(a.asymmetry() == doctest::Approx(0.05));
  CHECK_FALSE(a.is_symmetric());
}

TEST_CASE("matrix market export") {
  std::ostringstream out;
  write_matrix_market(out, SparseMatrix::identity(2));
  CHECK(out.str().find("%%MatrixMarket matrix coordinate real general") == 0);
  CHECK(out.str().find("2 2 2") != std::string::npos);
}
