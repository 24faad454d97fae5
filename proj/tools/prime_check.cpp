// Build-time gate: fails (exit 1) unless the production modulus equals
// 2^256 + 297 and passes 64 Miller-Rabin rounds.

#include "riga/modfield.hpp"
#include "riga/rigacore.hpp"

#include <iostream>

int main() {
  using riga::modfield::BigInt;
  const BigInt p(riga::core::kProductionPrimeDecimal);
  const bool exact = p == (BigInt(1) << 256) + 297;
  const bool prime = riga::modfield::is_probable_prime(p, 64);
  std::cout << "prime_check: modulus " << (exact ? "equals" : "DIFFERS FROM") << " 2^256 + 297 and "
            << (prime ? "is" : "is NOT") << " a probable prime (64 rounds)\n";
  return exact && prime ? 0 : 1;
}
