#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lexalign {

using WordId = std::int32_t;

using RowMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dot product of float rows accumulated in double, fixed summation order.
double dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const double> a, std::span<const float> b);
double norm(std::span<const float> a);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `threads`
// workers. Chunk boundaries never affect per-index results.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace lexalign
