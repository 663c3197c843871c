#pragma once

#include <Eigen/Core>

#include "sclab/rational.hpp"
#include "sclab/real.hpp"

// NumTraits adaptations so Eigen matrices can carry exact scalars. Exact
// types have no rounding, hence zero epsilon / dummy precision; costs are
// rough hints only.

namespace Eigen {

template <>
struct NumTraits<sclab::Rat> : GenericNumTraits<sclab::Rat> {
  typedef sclab::Rat Real;
  typedef sclab::Rat NonInteger;
  typedef sclab::Rat Nested;
  typedef sclab::Rat Literal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 4,
    AddCost = 32,
    MulCost = 32,
  };
  static inline sclab::Rat epsilon() { return sclab::Rat(0); }
  static inline sclab::Rat dummy_precision() { return sclab::Rat(0); }
  static inline int digits10() { return 0; }
};

template <>
struct NumTraits<sclab::Real> : GenericNumTraits<sclab::Real> {
  typedef sclab::Real Real;
  typedef sclab::Real NonInteger;
  typedef sclab::Real Nested;
  typedef sclab::Real Literal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 128,
    MulCost = 128,
  };
  static inline sclab::Real epsilon() { return sclab::Real(0); }
  static inline sclab::Real dummy_precision() { return sclab::Real(0); }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen
