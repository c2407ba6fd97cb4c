#pragma once

#include <stdexcept>
#include <string>

namespace fracsplit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FRACSPLIT_ERROR(Name)                 \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    }

FRACSPLIT_ERROR(PoleArgument);
FRACSPLIT_ERROR(Overflow);
FRACSPLIT_ERROR(DomainError);
FRACSPLIT_ERROR(UnsupportedOrder);
FRACSPLIT_ERROR(BranchCutViolation);
FRACSPLIT_ERROR(BudgetExceeded);
FRACSPLIT_ERROR(NonPlanar);
FRACSPLIT_ERROR(NonConforming);
FRACSPLIT_ERROR(UnsupportedDegree);
FRACSPLIT_ERROR(PointOutsideDomain);
FRACSPLIT_ERROR(SegmentOutsideDomain);
FRACSPLIT_ERROR(NonNestedMeshes);
FRACSPLIT_ERROR(StrategyMismatch);
FRACSPLIT_ERROR(SingularAtZero);
FRACSPLIT_ERROR(QuadratureFailure);
FRACSPLIT_ERROR(UnsupportedDomain);
FRACSPLIT_ERROR(ConfigError);

#undef FRACSPLIT_ERROR

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

} // namespace fracsplit
