#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>

#include "qcurv/radial_kernel.hpp"

namespace qcurv {

// Assembled kernel matrices keyed by a content hash of (grid, targets, n, variant).
// With a directory, matrices are also persisted as binary files:
//   "QCKM" | u32 version | u32 n | u32 variant | u64 key | u64 rows | u64 cols |
//   rows*cols little-endian float64, row-major.
class KernelCache {
 public:
  KernelCache() = default;
  explicit KernelCache(std::filesystem::path directory);

  std::shared_ptr<const KernelMatrix> get(const RadialGrid& grid, std::span<const double> targets, int n,
                                          KernelVariant variant);

  std::size_t assembled() const noexcept { return assembled_; }
  std::size_t hits() const noexcept { return hits_; }

  static void save(const std::filesystem::path& file, const KernelMatrix& kernel);
  static KernelMatrix load(const std::filesystem::path& file);

 private:
  std::optional<std::filesystem::path> directory_;
  std::map<std::uint64_t, std::shared_ptr<const KernelMatrix>> entries_;
  std::mutex mutex_;
  std::size_t assembled_ = 0;
  std::size_t hits_ = 0;
};

}  // namespace qcurv
