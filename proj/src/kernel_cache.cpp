#include "qcurv/kernel_cache.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "qcurv/errors.hpp"

namespace qcurv {

namespace {

constexpr std::array<char, 4> kMagic{'Q', 'C', 'K', 'M'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
T take(std::ifstream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!is) throw std::runtime_error("kernel cache: truncated header");
  return value;
}

std::filesystem::path file_for(const std::filesystem::path& dir, std::uint64_t key) {
  char name[40];
  std::snprintf(name, sizeof name, "kernel_%016llx.bin", static_cast<unsigned long long>(key));
  return dir / name;
}

}  // namespace

KernelCache::KernelCache(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(*directory_);
}

std::shared_ptr<const KernelMatrix> KernelCache::get(const RadialGrid& grid, std::span<const double> targets, int n,
                                                     KernelVariant variant) {
  const std::uint64_t key = kernel_key(grid, targets, n, variant);
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) {
    ++hits_;
    return it->second;
  }
  std::shared_ptr<const KernelMatrix> kernel;
  if (directory_) {
    const auto file = file_for(*directory_, key);
    if (std::filesystem::exists(file)) {
      auto loaded = load(file);
      if (loaded.key == key && loaded.rows() == targets.size() && loaded.cols() == grid.size()) {
        loaded.targets.assign(targets.begin(), targets.end());
        kernel = std::make_shared<const KernelMatrix>(std::move(loaded));
        ++hits_;
      }
    }
  }
  if (!kernel) {
    kernel = std::make_shared<const KernelMatrix>(assemble_kernel_matrix(grid, targets, n, variant));
    ++assembled_;
    if (directory_) save(file_for(*directory_, key), *kernel);
  }
  entries_.emplace(key, kernel);
  return kernel;
}

void KernelCache::save(const std::filesystem::path& file, const KernelMatrix& kernel) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("kernel cache: cannot write " + file.string());
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(kernel.n));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(kernel.variant));
  put<std::uint64_t>(os, kernel.key);
  put<std::uint64_t>(os, kernel.rows());
  put<std::uint64_t>(os, kernel.cols());
  for (Eigen::Index i = 0; i < kernel.entries.rows(); ++i)
    for (Eigen::Index j = 0; j < kernel.entries.cols(); ++j) put<double>(os, kernel.entries(i, j));
}

KernelMatrix KernelCache::load(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("kernel cache: cannot read " + file.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw std::runtime_error("kernel cache: bad magic in " + file.string());
  if (take<std::uint32_t>(is) != kVersion) throw std::runtime_error("kernel cache: unsupported version");
  KernelMatrix k;
  k.n = static_cast<int>(take<std::uint32_t>(is));
  const auto variant = take<std::uint32_t>(is);
  if (variant > 1) throw std::runtime_error("kernel cache: unknown variant");
  k.variant = static_cast<KernelVariant>(variant);
  k.key = take<std::uint64_t>(is);
  const auto rows = take<std::uint64_t>(is);
  const auto cols = take<std::uint64_t>(is);
  k.entries.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::vector<double> row(cols);
  for (std::uint64_t i = 0; i < rows; ++i) {
    is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(cols * sizeof(double)));
    if (!is) throw std::runtime_error("kernel cache: truncated body in " + file.string());
    for (std::uint64_t j = 0; j < cols; ++j) k.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return k;
}

}  // namespace qcurv
