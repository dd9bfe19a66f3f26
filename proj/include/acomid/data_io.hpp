#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "acomid/objectives.hpp"

namespace acomid {

struct Dataset {
  std::vector<LabeledSample> samples;
  std::size_t dim = 0;
  std::string name;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Thrown for malformed input files; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads `<label> <idx>:<val> ...` lines with 1-based ascending indices.
/// Labels 0/-1 map to -1 and 1/+1 to +1. Files ending in `.gz` are inflated.
Dataset read_libsvm(const std::filesystem::path& path,
                    std::optional<std::size_t> dim_override = std::nullopt);

/// Canonical form: `+1`/`-1` labels, 1-based indices, shortest round-trip values.
void write_libsvm(const Dataset& data, const std::filesystem::path& path);
std::string format_libsvm_line(const LabeledSample& s);

struct SyntheticProfile {
  std::size_t dim = 0;
  std::size_t n_samples = 0;
  std::size_t nnz_lo = 1;
  std::size_t nnz_hi = 1;
  std::uint64_t seed = 0;
  /// When set, labels are sign(planted . x + noise); otherwise Rademacher.
  std::optional<DenseVec> planted_w;
  double noise_sd = 0.0;
};

Dataset gen_synthetic(const SyntheticProfile& profile);

/// Standard normal entries, deterministic in seed.
DenseVec make_planted_w(std::size_t dim, std::uint64_t seed);

}  // namespace acomid
