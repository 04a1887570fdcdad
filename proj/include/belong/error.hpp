#pragma once

#include <stdexcept>
#include <string>

namespace belong {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// Operation not available for a model architecture (e.g. gradients of a grid model).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

// Statistics with zero spread or too few samples.
class DegenerateError : public Error {
public:
    using Error::Error;
};

// A cached distribution does not match the requested model/config.
class ConfigMismatchError : public Error {
public:
    using Error::Error;
};

class MissingArtifactError : public Error {
public:
    explicit MissingArtifactError(const std::string& path)
        : Error("missing artifact: " + path), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace belong
