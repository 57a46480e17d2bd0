#ifndef SQZ_ERROR_HPP
#define SQZ_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sqz
{

enum class ErrorCode
{
    invalid_argument,   // precondition violated by a caller-supplied value
    unphysical,         // input is well-formed but has no physical solution
    config,             // configuration document rejected
    data,               // malformed or inconsistent data file / series
    singular,           // normal equations not invertible
    not_converged,      // iteration budget exhausted
};

const char *to_string(ErrorCode code);

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when a measured variance lies below the floor a loss channel can produce.
class UnphysicalError : public Error
{
public:
    explicit UnphysicalError(const std::string &what) : Error(ErrorCode::unphysical, what) {}
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) { throw Error(code, what); }

inline void require(bool ok, const std::string &what)
{
    if (!ok)
        throw Error(ErrorCode::invalid_argument, what);
}

} // namespace sqz

#endif // SQZ_ERROR_HPP
