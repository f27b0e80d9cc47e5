#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lindods {

/// Base of every error the library throws. The CLI maps all of these to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define LINDODS_ERROR(Name)                                                    \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}   \
    }

class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& message)
        : Error("ParseError at " + std::to_string(position) + ": " + message),
          position_(position), message_(message) {}

    std::size_t position() const { return position_; }
    const std::string& message() const { return message_; }

private:
    std::size_t position_;
    std::string message_;
};

// expr
LINDODS_ERROR(DomainError);
LINDODS_ERROR(UnboundVariable);
// delay
LINDODS_ERROR(NoForwardPoint);
LINDODS_ERROR(NotMonotone);
// dods / catalog
LINDODS_ERROR(NoDodsError);
LINDODS_ERROR(ParameterDomainError);
LINDODS_ERROR(InvalidDods);
// steps
LINDODS_ERROR(SchemeMismatch);
LINDODS_ERROR(OutOfRange);
// symmetry
LINDODS_ERROR(MeshRangeError);
LINDODS_ERROR(NotASolution);
LINDODS_ERROR(UnsupportedFlow);
LINDODS_ERROR(NonConvergence);
LINDODS_ERROR(DegenerateRoot);
LINDODS_ERROR(DivergenceWarning);
// reduction
LINDODS_ERROR(BracketNotFound);
LINDODS_ERROR(StatusError);
// io
LINDODS_ERROR(IoError);
LINDODS_ERROR(SpecFileError);

#undef LINDODS_ERROR

} // namespace lindods
