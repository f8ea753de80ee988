#include "monodromize/errors.hpp"

namespace monodromize {

const char* errc_name(Errc e) {
  switch (e) {
    case Errc::ZeroPolynomial: return "ZeroPolynomial";
    case Errc::ZeroB: return "ZeroB";
    case Errc::BadStep: return "BadStep";
    case Errc::OnCut: return "OnCut";
    case Errc::OutOfStrip: return "OutOfStrip";
    case Errc::NearSingular: return "NearSingular";
    case Errc::PoleTooClose: return "PoleTooClose";
    case Errc::QuadratureFail: return "QuadratureFail";
    case Errc::NonConstant: return "NonConstant";
    case Errc::AtPole: return "AtPole";
    case Errc::NoContraction: return "NoContraction";
    case Errc::SmallDenominator: return "SmallDenominator";
    case Errc::Infeasible: return "Infeasible";
    case Errc::WeightOverflow: return "WeightOverflow";
    case Errc::Degenerate: return "Degenerate";
    case Errc::CouplingMismatch: return "CouplingMismatch";
    case Errc::OutOfVicinity: return "OutOfVicinity";
    case Errc::RootOnContour: return "RootOnContour";
    case Errc::Inconsistent: return "Inconsistent";
    case Errc::KindUnavailable: return "KindUnavailable";
    case Errc::BasisMismatch: return "BasisMismatch";
    case Errc::DegeneratePair: return "DegeneratePair";
    case Errc::Unsupported: return "Unsupported";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::RationalTermination: return "RationalTermination";
    case Errc::ChartViolation: return "ChartViolation";
    case Errc::DegenerateWronskian: return "DegenerateWronskian";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what, cplx where)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), where_(where) {}

}  // namespace monodromize
