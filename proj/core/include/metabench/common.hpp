#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace metabench {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, out-of-bounds values, inconsistent shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent files; message names the offending field.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Requested dimension exceeds the direction-number table.
class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

// Numerical blow-up; carries the step/iteration where it happened.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t step)
      : Error(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

// ---------------------------------------------------------------------------
// Hashing and seed derivation

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(const std::string& s);

// Stable per-cell seed: depends only on (master, method, task, run), so
// adding or removing methods never perturbs other cells' random streams.
std::uint64_t derive_seed(std::uint64_t master, const std::string& method_tag,
                          std::uint64_t task_id, std::uint64_t run_index);

// ---------------------------------------------------------------------------
// Random number generation
//
// All distributions are implemented on top of the (fully specified)
// mt19937_64 engine so that streams are identical across standard libraries.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t u64() { return engine_(); }

  // Uniform in [0, 1).
  double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform in (0, 1); safe as a log() argument.
  double u01_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform integer in [0, n). Multiply-shift; bias < 2^-64.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(engine_()) * n) >> 64);
  }

  // Standard normal via a 128-layer ziggurat.
  double normal();
  void fill_normal(double* dst, std::size_t n);
  void fill_normal(float* dst, std::size_t n);

 private:
  double normal_fallback(std::uint64_t u);
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Gaussian distribution helpers

double normal_pdf(double x);
double normal_cdf(double x);

// ---------------------------------------------------------------------------
// Base64 (RFC 4648, no padding stripped, no line breaks)

std::string base64_encode(const void* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string encode_f64(const std::vector<double>& v);
std::vector<double> decode_f64(const std::string& text);

}  // namespace metabench
