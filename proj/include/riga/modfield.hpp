#pragma once

// Arithmetic over a prime field GF(p) with arbitrary-precision p, plus
// Lagrange interpolation into coefficient form and Horner evaluation.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riga::modfield {

using BigInt = boost::multiprecision::cpp_int;

enum class Errc {
  ZeroInverse,
  NotPrime,
  DuplicateAbscissa,
  OutOfField,
  EmptyPointSet,
};

const char* to_string(Errc code) noexcept;

class FieldError : public std::runtime_error {
 public:
  FieldError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Miller-Rabin with `rounds` pseudo-random bases drawn from a fixed seed,
/// after trial division by small primes. Error probability <= 4^-rounds.
bool is_probable_prime(const BigInt& n, int rounds = 64);

/// An element of GF(p). Always canonical: 0 <= value < p.
struct Residue {
  BigInt value;

  friend bool operator==(const Residue&, const Residue&) = default;
  friend std::strong_ordering operator<=>(const Residue& a, const Residue& b) {
    if (a.value < b.value) return std::strong_ordering::less;
    if (a.value > b.value) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
};

/// A prime modulus verified once at construction.
class PrimeField {
 public:
  /// Throws FieldError(NotPrime) if `prime` fails the probabilistic test.
  explicit PrimeField(BigInt prime, int rounds = 64);

  const BigInt& modulus() const noexcept { return prime_; }

  /// Reduces any non-negative integer into the field.
  Residue reduce(const BigInt& x) const;
  /// Wraps an already-canonical value; throws OutOfField otherwise.
  Residue canonical(const BigInt& x) const;

  Residue add(const Residue& a, const Residue& b) const;
  Residue sub(const Residue& a, const Residue& b) const;
  Residue mul(const Residue& a, const Residue& b) const;

  friend bool operator==(const PrimeField& a, const PrimeField& b) { return a.prime_ == b.prime_; }

 private:
  BigInt prime_;
};

/// Inverse by the extended Euclidean algorithm.
Residue mod_inv(const Residue& a, const PrimeField& field);

struct Point {
  Residue x;
  Residue y;
};

/// Polynomial over GF(p) in coefficient form, constant term first.
/// Trailing zero coefficients are trimmed, so the zero polynomial has
/// no coefficients at all.
class FieldPoly {
 public:
  FieldPoly(std::vector<Residue> coefficients, const PrimeField& field);

  const std::vector<Residue>& coefficients() const noexcept { return coefficients_; }
  const BigInt& prime() const noexcept { return prime_; }
  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }

  /// Horner evaluation; `x` is reduced mod p first.
  Residue eval(const BigInt& x) const;

 private:
  std::vector<Residue> coefficients_;
  BigInt prime_;
};

inline Residue poly_eval(const FieldPoly& poly, const BigInt& x) { return poly.eval(x); }

/// Builds the unique polynomial of degree <= k-1 through the k points.
/// O(k^2): the product of all (x - x_j) is built once and divided by each
/// linear factor in turn.
FieldPoly lagrange_interpolate(std::span<const Point> points, const PrimeField& field);

/// Convenience overload for raw integer pairs; values must already be < p.
FieldPoly lagrange_interpolate(std::span<const std::pair<BigInt, BigInt>> points,
                               const PrimeField& field);

}  // namespace riga::modfield
