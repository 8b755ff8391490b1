#pragma once
// Shared chain specs and error helpers for the test binaries.

#include <doctest.h>

#include "sovchain/errors.hpp"
#include "sovchain/model.hpp"

namespace fixture {

using namespace sovchain;

inline ChainSpec rational_spec(int n, const TwistMatrix& c) {
  std::vector<cplx> nu;
  for (int k = 0; k < n; ++k) nu.push_back(cplx(1.0 - 2.0 * k / std::max(1, n - 1), 0.1 * k));
  return ChainSpec::make(Model::Rational, nu, c);
}

inline ChainSpec trig_spec(int n, const TwistMatrix& c) {
  std::vector<cplx> nu;
  for (int k = 0; k < n; ++k) nu.push_back(cplx(0.6 + 0.5 * k, 0.2 - 0.15 * k));
  return ChainSpec::make(Model::Trigonometric, nu, c);
}

template <class E>
ErrorKind kind_of(E&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::ConfigInvalid;
}

}  // namespace fixture
