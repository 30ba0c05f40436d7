#include <doctest.h>

#include <cmath>
#include <limits>

#include "r2d2/errors.hpp"
#include "r2d2/image.hpp"

using namespace r2d2;

TEST_CASE("construction and row-major indexing") {
  Image x(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(x.rows() == 2);
  CHECK(x.cols() == 3);
  CHECK(x(1, 0) == 4.0);
  CHECK(x[5] == 6.0);
  x(0, 2) = -1.0;
  CHECK(x[2] == -1.0);
  CHECK(Image(3, 2, 7.0).values()[5] == 7.0);
  CHECK(Image().empty());
  CHECK_THROWS_AS(Image(2, 2, std::vector<double>{1, 2, 3}), DomainError);
}

TEST_CASE("arithmetic requires equal shapes") {
  const Image a(2, 2, std::vector<double>{1, 2, 3, 4});
  const Image b(2, 2, 1.0);
  CHECK(a + b == Image(2, 2, std::vector<double>{2, 3, 4, 5}));
  CHECK(a - b == Image(2, 2, std::vector<double>{0, 1, 2, 3}));
  CHECK(2.0 * a == a * 2.0);
  Image c = a;
  c.add_scaled(b, -0.5);
  CHECK(c == Image(2, 2, std::vector<double>{0.5, 1.5, 2.5, 3.5}));
  CHECK_THROWS_AS(a + Image(1, 4), DomainError);
  CHECK_THROWS_AS(dot(a, Image(4, 1)), DomainError);
}

TEST_CASE("reductions") {
  const Image a(1, 4, std::vector<double>{3, -4, 0, 0});
  const Image b(1, 4, std::vector<double>{0, 0, 1, 1});
  CHECK(dot(a, b) == 0.0);
  CHECK(norm(a) == 5.0);
  CHECK(mean(a) == -0.25);
  CHECK(max_abs(a) == 4.0);
  CHECK(max_abs_diff(a, b) == 4.0);
  CHECK(rms_diff(a, b) == doctest::Approx(std::sqrt(27.0 / 4.0)));
  CHECK(all_finite(a));
  Image bad = a;
  bad[1] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(all_finite(bad));
}
