#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace monodromize {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

enum class Errc {
  ZeroPolynomial,
  ZeroB,
  BadStep,
  OnCut,
  OutOfStrip,
  NearSingular,
  PoleTooClose,
  QuadratureFail,
  NonConstant,
  AtPole,
  NoContraction,
  SmallDenominator,
  Infeasible,
  WeightOverflow,
  Degenerate,
  CouplingMismatch,
  OutOfVicinity,
  RootOnContour,
  Inconsistent,
  KindUnavailable,
  BasisMismatch,
  DegeneratePair,
  Unsupported,
  ShapeMismatch,
  RationalTermination,
  ChartViolation,
  DegenerateWronskian,
};

const char* errc_name(Errc e);

// Library failure. `where` carries the offending point when there is one.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what, cplx where = cplx(NAN, NAN));
  Errc code() const { return code_; }
  cplx where() const { return where_; }

private:
  Errc code_;
  cplx where_;
};

}  // namespace monodromize
