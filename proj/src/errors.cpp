#include "clarklab/errors.hpp"

namespace clarklab {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::NotPSD: return "NotPSD";
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::SingularCore: return "SingularCore";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::TooCloseToAtom: return "TooCloseToAtom";
        case ErrorKind::OutsideDisk: return "OutsideDisk";
        case ErrorKind::BadRadius: return "BadRadius";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NotScalarFibers: return "NotScalarFibers";
        case ErrorKind::ExhaustedRetries: return "ExhaustedRetries";
        case ErrorKind::GammaNotStrict: return "GammaNotStrict";
        case ErrorKind::NotInner: return "NotInner";
        case ErrorKind::TruncationOverflow: return "TruncationOverflow";
        case ErrorKind::UnsupportedTestFunction: return "UnsupportedTestFunction";
        case ErrorKind::HorizonTooLarge: return "HorizonTooLarge";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace clarklab
