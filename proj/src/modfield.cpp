#include "riga/modfield.hpp"

#include "riga/rng.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace riga::modfield {

namespace {

using boost::multiprecision::powm;

constexpr std::array<unsigned, 25> kSmallPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                                   43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

std::string describe(const BigInt& v) {
  std::string s = v.str();
  if (s.size() > 24) s = s.substr(0, 10) + "..." + s.substr(s.size() - 10);
  return s;
}

}  // namespace

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ZeroInverse: return "ZeroInverse";
    case Errc::NotPrime: return "NotPrime";
    case Errc::DuplicateAbscissa: return "DuplicateAbscissa";
    case Errc::OutOfField: return "OutOfField";
    case Errc::EmptyPointSet: return "EmptyPointSet";
  }
  return "Unknown";
}

bool is_probable_prime(const BigInt& n, int rounds) {
  if (n < 2) return false;
  for (unsigned sp : kSmallPrimes) {
    if (n == sp) return true;
    if (n % sp == 0) return false;
  }

  BigInt d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }

  // Bases come from a fixed stream so the verdict is reproducible.
  SplitMix64 gen(0x52494741'5052494dULL);
  const BigInt span = n - 3;
  const BigInt n_minus_1 = n - 1;
  for (int round = 0; round < rounds; ++round) {
    BigInt draw = 0;
    for (int w = 0; w < 6; ++w) {
      draw <<= 64;
      draw |= gen();
    }
    BigInt a = draw % span + 2;

    BigInt x = powm(a, d, n);
    if (x == 1 || x == n_minus_1) continue;
    bool witness = true;
    for (unsigned r = 1; r < s; ++r) {
      x = (x * x) % n;
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

PrimeField::PrimeField(BigInt prime, int rounds) : prime_(std::move(prime)) {
  if (!is_probable_prime(prime_, rounds)) {
    throw FieldError(Errc::NotPrime, "modulus " + describe(prime_) + " is not prime");
  }
}

Residue PrimeField::reduce(const BigInt& x) const {
  BigInt r = x % prime_;
  if (r < 0) r += prime_;
  return Residue{std::move(r)};
}

Residue PrimeField::canonical(const BigInt& x) const {
  if (x < 0 || x >= prime_) {
    throw FieldError(Errc::OutOfField, "value " + describe(x) + " is outside [0, p)");
  }
  return Residue{x};
}

Residue PrimeField::add(const Residue& a, const Residue& b) const {
  BigInt r = a.value + b.value;
  if (r >= prime_) r -= prime_;
  return Residue{std::move(r)};
}

Residue PrimeField::sub(const Residue& a, const Residue& b) const {
  BigInt r = a.value - b.value;
  if (r < 0) r += prime_;
  return Residue{std::move(r)};
}

Residue PrimeField::mul(const Residue& a, const Residue& b) const {
  return Residue{(a.value * b.value) % prime_};
}

Residue mod_inv(const Residue& a, const PrimeField& field) {
  const BigInt& p = field.modulus();
  if (a.value == 0) throw FieldError(Errc::ZeroInverse, "zero has no inverse");
  if (a.value < 0 || a.value >= p) {
    throw FieldError(Errc::OutOfField, "value " + describe(a.value) + " is outside [0, p)");
  }

  BigInt old_r = a.value, r = p;
  BigInt old_s = 1, s = 0;
  while (r != 0) {
    BigInt q = old_r / r;
    BigInt tmp = old_r - q * r;
    old_r = std::move(r);
    r = std::move(tmp);
    tmp = old_s - q * s;
    old_s = std::move(s);
    s = std::move(tmp);
  }
  // old_r == gcd(a, p) == 1 for prime p.
  return field.reduce(old_s);
}

FieldPoly::FieldPoly(std::vector<Residue> coefficients, const PrimeField& field)
    : coefficients_(std::move(coefficients)), prime_(field.modulus()) {
  for (const auto& c : coefficients_) {
    if (c.value < 0 || c.value >= prime_) {
      throw FieldError(Errc::OutOfField, "coefficient " + describe(c.value) + " is outside [0, p)");
    }
  }
  while (!coefficients_.empty() && coefficients_.back().value == 0) coefficients_.pop_back();
}

Residue FieldPoly::eval(const BigInt& x) const {
  BigInt xr = x % prime_;
  if (xr < 0) xr += prime_;
  BigInt acc = 0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
    acc = (acc * xr + it->value) % prime_;
  }
  return Residue{std::move(acc)};
}

FieldPoly lagrange_interpolate(std::span<const Point> points, const PrimeField& field) {
  if (points.empty()) throw FieldError(Errc::EmptyPointSet, "interpolation needs at least one point");

  std::set<BigInt> seen;
  for (const auto& pt : points) {
    field.canonical(pt.x.value);
    field.canonical(pt.y.value);
    if (!seen.insert(pt.x.value).second) {
      throw FieldError(Errc::DuplicateAbscissa, "abscissa " + describe(pt.x.value) + " appears twice");
    }
  }

  const std::size_t k = points.size();

  // master[j] is the coefficient of x^j in prod_i (x - x_i); degree k.
  std::vector<Residue> master(k + 1, Residue{0});
  master[0] = Residue{1};
  for (std::size_t i = 0; i < k; ++i) {
    const Residue neg_xi = field.sub(Residue{0}, points[i].x);
    for (std::size_t j = i + 1; j > 0; --j) {
      master[j] = field.add(master[j - 1], field.mul(master[j], neg_xi));
    }
    master[0] = field.mul(master[0], neg_xi);
  }

  std::vector<Residue> result(k, Residue{0});
  std::vector<Residue> basis(k, Residue{0});
  for (std::size_t i = 0; i < k; ++i) {
    const Residue& xi = points[i].x;
    // Synthetic division of master by (x - x_i).
    basis[k - 1] = master[k];
    for (std::size_t j = k - 1; j > 0; --j) {
      basis[j - 1] = field.add(master[j], field.mul(xi, basis[j]));
    }
    // basis(x_i) = prod_{j != i} (x_i - x_j).
    Residue denom{0};
    for (std::size_t j = k; j > 0; --j) denom = field.add(field.mul(denom, xi), basis[j - 1]);

    const Residue scale = field.mul(points[i].y, mod_inv(denom, field));
    if (scale.value == 0) continue;
    for (std::size_t j = 0; j < k; ++j) {
      result[j] = field.add(result[j], field.mul(scale, basis[j]));
    }
  }
  return FieldPoly(std::move(result), field);
}

FieldPoly lagrange_interpolate(std::span<const std::pair<BigInt, BigInt>> points,
                               const PrimeField& field) {
  std::vector<Point> pts;
  pts.reserve(points.size());
  for (const auto& [x, y] : points) pts.push_back(Point{field.canonical(x), field.canonical(y)});
  return lagrange_interpolate(pts, field);
}

}  // namespace riga::modfield
