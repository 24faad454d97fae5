#include "riga/modfield.hpp"
#include "riga/rigacore.hpp"

#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

using namespace riga::modfield;

namespace {

// Independent oracle: evaluates the Lagrange sum directly at x, with
// machine integers and Fermat inverses. No coefficient form involved.
std::int64_t direct_lagrange(const std::vector<std::pair<std::int64_t, std::int64_t>>& pts, std::int64_t x,
                             std::int64_t p) {
  auto pow_mod = [p](std::int64_t b, std::int64_t e) {
    std::int64_t r = 1;
    b %= p;
    while (e > 0) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
      e >>= 1;
    }
    return r;
  };
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::int64_t num = 1, den = 1;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      num = num * (((x - pts[j].first) % p + p) % p) % p;
      den = den * (((pts[i].first - pts[j].first) % p + p) % p) % p;
    }
    sum = (sum + pts[i].second % p * num % p * pow_mod(den, p - 2)) % p;
  }
  return sum;
}

FieldPoly interpolate_ints(const std::vector<std::pair<std::int64_t, std::int64_t>>& pts, const PrimeField& f) {
  std::vector<std::pair<BigInt, BigInt>> big;
  for (auto [x, y] : pts) big.emplace_back(x, y);
  return lagrange_interpolate(std::span<const std::pair<BigInt, BigInt>>(big), f);
}

const PrimeField& f97() {
  static const PrimeField f{BigInt(97)};
  return f;
}

}  // namespace

TEST_CASE("mod_inv examples") {
  CHECK(mod_inv(Residue{1}, f97()).value == 1);
  CHECK(mod_inv(Residue{3}, PrimeField(BigInt(7))).value == 5);
  try {
    mod_inv(Residue{0}, f97());
    FAIL("expected ZeroInverse");
  } catch (const FieldError& e) {
    CHECK(e.code() == Errc::ZeroInverse);
  }
}

TEST_CASE("mod_inv is an inverse for every nonzero residue mod 97") {
  for (int a = 1; a < 97; ++a) {
    const Residue inv = mod_inv(Residue{a}, f97());
    CHECK(inv.value < 97);
    CHECK((a * inv.value) % 97 == 1);
  }
}

TEST_CASE("primality check at field construction") {
  CHECK(is_probable_prime(BigInt(2)));
  CHECK(is_probable_prime(BigInt(97)));
  CHECK_FALSE(is_probable_prime(BigInt(1)));
  CHECK_FALSE(is_probable_prime(BigInt(91)));
  CHECK_FALSE(is_probable_prime(BigInt(561)));    // Carmichael
  CHECK_FALSE(is_probable_prime(BigInt(41041)));  // Carmichael
  CHECK_FALSE(is_probable_prime((BigInt(1) << 256) + 1));  // F8, composite
  CHECK(is_probable_prime((BigInt(1) << 127) - 1));
  CHECK(is_probable_prime((BigInt(1) << 256) + 297));
  for (int d = 1; d < 297; ++d) CHECK_FALSE(is_probable_prime((BigInt(1) << 256) + d));

  try {
    PrimeField bad{BigInt(91)};
    FAIL("expected NotPrime");
  } catch (const FieldError& e) {
    CHECK(e.code() == Errc::NotPrime);
  }
}

TEST_CASE("lagrange_interpolate examples") {
  SUBCASE("single point gives a constant") {
    const FieldPoly poly = interpolate_ints({{5, 42}}, f97());
    REQUIRE(poly.coefficients().size() == 1);
    CHECK(poly.coefficients()[0].value == 42);
  }
  SUBCASE("line through (2,10) and (5,3)") {
    // Frozen from a brute-force search over all 97^2 lines
    // (tests/oracles/compute_oracles.py): the unique hit is 47 + 30x.
    const FieldPoly poly = interpolate_ints({{2, 10}, {5, 3}}, f97());
    REQUIRE(poly.coefficients().size() == 2);
    CHECK(poly.coefficients()[0].value == 47);
    CHECK(poly.coefficients()[1].value == 30);
  }
  SUBCASE("duplicate abscissa") {
    try {
      interpolate_ints({{2, 10}, {2, 11}}, f97());
      FAIL("expected DuplicateAbscissa");
    } catch (const FieldError& e) {
      CHECK(e.code() == Errc::DuplicateAbscissa);
    }
  }
  SUBCASE("values outside the field") {
    try {
      interpolate_ints({{2, 97}}, f97());
      FAIL("expected OutOfField");
    } catch (const FieldError& e) {
      CHECK(e.code() == Errc::OutOfField);
    }
    try {
      interpolate_ints({{100, 1}}, f97());
      FAIL("expected OutOfField");
    } catch (const FieldError& e) {
      CHECK(e.code() == Errc::OutOfField);
    }
  }
  SUBCASE("empty point set") {
    CHECK_THROWS_AS(interpolate_ints({}, f97()), FieldError);
  }
}

TEST_CASE("poly_eval examples") {
  const FieldPoly constant({Residue{42}}, f97());
  CHECK(poly_eval(constant, BigInt(1000000000)).value == 42);

  const FieldPoly line({Residue{47}, Residue{30}}, f97());
  CHECK(poly_eval(line, BigInt(5)).value == 3);
  CHECK(poly_eval(line, BigInt(2)).value == 10);
  // Inputs are reduced mod p first.
  CHECK(poly_eval(line, BigInt(2 + 97 * 11)).value == 10);
}

TEST_CASE("trailing zero coefficients are trimmed") {
  const FieldPoly poly({Residue{1}, Residue{0}, Residue{0}}, f97());
  CHECK(poly.degree() == 0);
  // Three collinear points give a degree-1 polynomial.
  const FieldPoly line = interpolate_ints({{0, 1}, {1, 3}, {2, 5}}, f97());
  CHECK(line.degree() == 1);
}

TEST_CASE("interpolate-then-evaluate is the identity on the anchors") {
  std::mt19937_64 rng(604);
  SUBCASE("p = 97") {
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t k = 1 + rng() % 16;
      std::vector<std::int64_t> xs(97);
      std::iota(xs.begin(), xs.end(), 0);
      std::shuffle(xs.begin(), xs.end(), rng);
      std::vector<std::pair<std::int64_t, std::int64_t>> pts;
      for (std::size_t i = 0; i < k; ++i) pts.emplace_back(xs[i], static_cast<std::int64_t>(rng() % 97));
      const FieldPoly poly = interpolate_ints(pts, f97());
      CHECK(poly.coefficients().size() <= k);
      for (auto [x, y] : pts) CHECK(poly.eval(BigInt(x)).value == y);
    }
  }
  SUBCASE("production prime") {
    const PrimeField& field = riga::core::production_field();
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t k = 1 + rng() % 16;
      std::vector<Point> pts;
      std::set<std::uint64_t> used;
      while (pts.size() < k) {
        const std::uint64_t x = rng() % (1u << 20);
        if (!used.insert(x).second) continue;
        BigInt y = 0;
        for (int w = 0; w < 4; ++w) y = (y << 64) | BigInt(rng());
        pts.push_back(Point{field.reduce(BigInt(x)), field.canonical(y)});
      }
      const FieldPoly poly = lagrange_interpolate(pts, field);
      CHECK(poly.coefficients().size() <= k);
      for (const auto& pt : pts) CHECK(poly.eval(pt.x.value) == pt.y);
    }
  }
}

TEST_CASE("coefficient form agrees with the direct Lagrange sum at every point of GF(97)") {
  std::mt19937_64 rng(7);
  for (std::size_t k = 1; k <= 4; ++k) {
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<std::int64_t> xs(97);
      std::iota(xs.begin(), xs.end(), 0);
      std::shuffle(xs.begin(), xs.end(), rng);
      std::vector<std::pair<std::int64_t, std::int64_t>> pts;
      for (std::size_t i = 0; i < k; ++i) pts.emplace_back(xs[i], static_cast<std::int64_t>(rng() % 97));
      const FieldPoly poly = interpolate_ints(pts, f97());
      for (std::int64_t x = 0; x < 97; ++x) {
        CHECK(poly.eval(BigInt(x)).value == direct_lagrange(pts, x, 97));
      }
    }
  }
}
