#pragma once

#include <stdexcept>
#include <string>

namespace backoff {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define BACKOFF_ERROR(Name)                \
    class Name : public Error {            \
    public:                                \
        using Error::Error;                \
    }

BACKOFF_ERROR(InvalidParams);
BACKOFF_ERROR(DivergentSeries);
BACKOFF_ERROR(NoConvergence);
BACKOFF_ERROR(GridTooCoarse);
BACKOFF_ERROR(InsufficientTrace);
BACKOFF_ERROR(InsufficientData);
BACKOFF_ERROR(QuadratureFailure);
BACKOFF_ERROR(InversionUnstable);
BACKOFF_ERROR(PoorFit);
BACKOFF_ERROR(SeriesTooShort);
BACKOFF_ERROR(EmptyInput);
BACKOFF_ERROR(DomainError);
BACKOFF_ERROR(IoError);

#undef BACKOFF_ERROR

}  // namespace backoff
