#pragma once

#include <cstdint>

namespace tepdec::gf2poly {

// Binary polynomial with bit i holding the coefficient of x^i.
// All operations here stay below degree 64, which covers every generator
// polynomial this library constructs (largest modulus is x^47 + 1).
using Poly = std::uint64_t;

inline constexpr Poly kZero = 0;
inline constexpr Poly kOne = 1;

int degree(Poly p);  // degree of 0 is -1
Poly mul(Poly a, Poly b);
Poly mod(Poly a, Poly m);
bool divides(Poly d, Poly a);

}  // namespace tepdec::gf2poly
