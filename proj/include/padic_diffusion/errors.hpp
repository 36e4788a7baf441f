#pragma once

#include <stdexcept>
#include <string>

namespace padic_diffusion {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidSpace : public Error {
public:
    using Error::Error;
};

/// gamma <= -n: the kernel ‖x‖^γ is not integrable near the origin.
class GammaOutOfRange : public Error {
public:
    using Error::Error;
};

class NonPositiveRate : public Error {
public:
    using Error::Error;
};

class SeriesDiverged : public Error {
public:
    using Error::Error;
};

/// A coset digit would fall below the configured depth cap.
class DepthOverflow : public Error {
public:
    using Error::Error;
};

class ZeroPoint : public Error {
public:
    using Error::Error;
};

class UnsupportedBall : public Error {
public:
    using Error::Error;
};

class StepTooCoarse : public Error {
public:
    using Error::Error;
};

class NonPositiveS : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    InvalidConfig(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace padic_diffusion
