#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qperc {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad argument: index out of range, non-unitary gate, non-Hermitian operator.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

/// Rydberg parameters violate the detuning/interaction condition required to
/// cancel the single-input sigma_z terms.
class MappingInfeasible : public Error {
  public:
    MappingInfeasible(const std::string& what, std::vector<int> atoms)
        : Error(what), offending_atoms_(std::move(atoms)) {}

    const std::vector<int>& offending_atoms() const noexcept { return offending_atoms_; }

  private:
    std::vector<int> offending_atoms_;
};

class RejectionBudgetExceeded : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace qperc
