#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace optlaws {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a documented precondition (ordering, sign, range).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A quantity is outside the domain where a formula is defined,
/// e.g. a zero integral that would appear in a denominator.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed external data (CSV rows, JSON documents).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Least-squares design matrix without full column rank.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, double condition_number)
      : Error(what), condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

/// A simulated path produced a non-finite state.
class DivergedPath : public Error {
 public:
  DivergedPath(const std::string& what, std::size_t path_index, std::size_t step)
      : Error(what), path_index_(path_index), step_(step) {}
  std::size_t path_index() const noexcept { return path_index_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t path_index_;
  std::size_t step_;
};

}  // namespace optlaws
