/**
 * Exception types raised by the foliage library.
 *
 * Every failure mode has its own type so callers (and the CLI exit-code
 * mapping) can dispatch on it; all of them derive from foliage::Error.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace foliage {

class Error : public std::runtime_error
{
    public:
        explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define FOLIAGE_DEFINE_ERROR(Name)                                          \
    class Name : public Error                                               \
    {                                                                       \
        public:                                                             \
            explicit Name(const std::string& what)                          \
                : Error(std::string(#Name ": ") + what) {}                  \
    };

// Cover and Čech complex
FOLIAGE_DEFINE_ERROR(InvalidCover)
FOLIAGE_DEFINE_ERROR(MissingFace)
FOLIAGE_DEFINE_ERROR(BadComponentMap)
FOLIAGE_DEFINE_ERROR(DegreeOutOfRange)
FOLIAGE_DEFINE_ERROR(DimensionMismatch)
FOLIAGE_DEFINE_ERROR(ParameterOutOfRange)

// Linearizations
FOLIAGE_DEFINE_ERROR(DegenerateLinearization)
FOLIAGE_DEFINE_ERROR(NonOrthogonalHolonomy)

// Hopf ledger
FOLIAGE_DEFINE_ERROR(BadIndexValue)
FOLIAGE_DEFINE_ERROR(OddDegreeNonzero)
FOLIAGE_DEFINE_ERROR(MalformedBetti)

// Spectral
FOLIAGE_DEFINE_ERROR(InvalidProfile)
FOLIAGE_DEFINE_ERROR(BadParity)
FOLIAGE_DEFINE_ERROR(NegativeWeight)
FOLIAGE_DEFINE_ERROR(SpectralGapTooSmall)
FOLIAGE_DEFINE_ERROR(NonIntegerSupertrace)

// Input files
FOLIAGE_DEFINE_ERROR(ParseError)
FOLIAGE_DEFINE_ERROR(SchemaError)

#undef FOLIAGE_DEFINE_ERROR

}   // namespace foliage
