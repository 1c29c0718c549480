#include "tepdec/gf2poly.hpp"

#include <bit>
#include <stdexcept>

namespace tepdec::gf2poly {

int degree(Poly p) { return p ? 63 - std::countl_zero(p) : -1; }

Poly mul(Poly a, Poly b) {
  if (a && b && degree(a) + degree(b) >= 64)
    throw std::invalid_argument("product degree exceeds 63");
  Poly r = 0;
  while (b) {
    if (b & 1) r ^= a;
    a <<= 1;
    b >>= 1;
  }
  return r;
}

Poly mod(Poly a, Poly m) {
  if (m == 0) throw std::invalid_argument("modulus is zero");
  const int dm = degree(m);
  for (int d = degree(a); d >= dm; d = degree(a)) a ^= m << (d - dm);
  return a;
}

bool divides(Poly d, Poly a) { return mod(a, d) == 0; }

}  // namespace tepdec::gf2poly
