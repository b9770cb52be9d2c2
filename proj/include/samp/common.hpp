#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace samp {

using NodeId = std::int32_t;
using ArcId = std::int32_t;
using LineId = std::int32_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Raised when an input file is structurally broken (missing column, bad id,
// dangling reference). CLI maps this to exit code 3.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when inputs parse but violate a model invariant (negative time,
// duplicate id, fleet outside bounds). Also exit code 3 territory.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A positive-demand OD pair with no finite-cost strategy. CLI maps this to
// exit code 4; the solver treats it as move infeasibility.
class UnreachableDemandError : public std::runtime_error {
 public:
  UnreachableDemandError(NodeId origin, NodeId destination)
      : std::runtime_error("no finite-cost route for demand from node " +
                           std::to_string(origin) + " to node " +
                           std::to_string(destination)),
        origin(origin),
        destination(destination) {}
  NodeId origin;
  NodeId destination;
};

// Requested operation cannot produce a feasible result (bound violation,
// verification failure). Exit code 4.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a, the 64-bit variant. Used for input digests in run manifests and for
// hashing fleet vectors in evaluation caches.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

inline std::uint64_t fnv1a64(const std::vector<int>& v) {
  return fnv1a64(v.data(), v.size() * sizeof(int));
}

// Dense row-major matrix, just enough for OD tables and distance grids.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace samp
