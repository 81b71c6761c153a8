#include "metabench/sobol.hpp"

#include <array>
#include <cstdint>

namespace metabench {

namespace {

constexpr int kBits = 32;

struct SobolRow {
  int degree;
  std::uint32_t coeffs;     // middle polynomial coefficients a_1..a_{s-1}
  std::uint32_t m[9];       // initial direction numbers m_1..m_s
};

static const SobolRow kDirectionRows[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},
    {7, 50, {1, 3, 1, 3, 5, 53, 69}},
    {7, 55, {1, 1, 5, 5, 23, 33, 13}},
    {7, 56, {1, 1, 7, 7, 1, 61, 123}},
    {7, 59, {1, 1, 7, 9, 13, 61, 49}},
    {7, 62, {1, 3, 3, 5, 3, 55, 33}},
    {8, 14, {1, 3, 1, 15, 31, 13, 49, 245}},
    {8, 21, {1, 3, 5, 15, 31, 59, 63, 97}},
    {8, 22, {1, 3, 1, 11, 11, 11, 77, 249}},
    {8, 38, {1, 3, 1, 11, 27, 43, 71, 9}},
    {8, 47, {1, 1, 7, 15, 21, 11, 81, 45}},
    {8, 49, {1, 3, 7, 3, 25, 31, 65, 79}},
    {8, 50, {1, 3, 1, 1, 19, 11, 3, 205}},
    {8, 52, {1, 1, 5, 9, 19, 21, 29, 157}},
    {8, 56, {1, 3, 7, 11, 1, 33, 89, 185}},
    {8, 67, {1, 3, 3, 3, 15, 9, 79, 71}},
    {8, 70, {1, 3, 7, 11, 15, 39, 119, 27}},
    {8, 84, {1, 1, 3, 1, 11, 31, 97, 225}},
    {8, 97, {1, 1, 1, 3, 23, 43, 57, 177}},
    {8, 103, {1, 3, 7, 7, 17, 17, 37, 71}},
    {8, 115, {1, 3, 1, 5, 27, 63, 123, 213}},
    {8, 122, {1, 1, 3, 5, 11, 43, 53, 133}},
    {9, 8, {1, 3, 5, 5, 29, 17, 47, 173, 479}},
    {9, 13, {1, 3, 3, 11, 3, 1, 109, 9, 69}},
    {9, 16, {1, 1, 1, 5, 17, 39, 23, 5, 343}},
    {9, 22, {1, 3, 1, 5, 25, 15, 31, 103, 499}},
    {9, 25, {1, 1, 1, 11, 11, 17, 63, 105, 183}},
    {9, 44, {1, 1, 5, 11, 9, 29, 97, 231, 363}},
    {9, 47, {1, 1, 5, 15, 19, 45, 41, 7, 383}},
    {9, 52, {1, 3, 7, 7, 31, 19, 83, 137, 221}},
    {9, 55, {1, 1, 1, 3, 23, 15, 111, 223, 83}},
    {9, 59, {1, 1, 5, 13, 31, 15, 55, 25, 161}},
    {9, 62, {1, 1, 3, 13, 25, 47, 39, 87, 257}},
};

constexpr int kMaxDim = 1 + static_cast<int>(sizeof(kDirectionRows) / sizeof(kDirectionRows[0]));

// Left-aligned direction integers V[0..kBits-1] for one dimension.
void direction_integers(int dim_index, std::uint64_t v[kBits]) {
  if (dim_index == 0) {
    // First dimension: van der Corput radical inverse (all m_i = 1).
    for (int i = 0; i < kBits; ++i) v[i] = 1ULL << (kBits - 1 - i);
    return;
  }
  const SobolRow& row = kDirectionRows[dim_index - 1];
  const int s = row.degree;
  for (int i = 0; i < s && i < kBits; ++i)
    v[i] = static_cast<std::uint64_t>(row.m[i]) << (kBits - 1 - i);
  for (int i = s; i < kBits; ++i) {
    std::uint64_t newv = v[i - s] ^ (v[i - s] >> s);
    for (int k = 1; k < s; ++k) {
      if ((row.coeffs >> (s - 1 - k)) & 1U) newv ^= v[i - k];
    }
    v[i] = newv;
  }
}

int lowest_zero_bit(std::uint64_t n) {
  int c = 0;
  while (n & 1ULL) {
    n >>= 1;
    ++c;
  }
  return c;
}

}  // namespace

int sobol_max_dimension() { return kMaxDim; }

Eigen::MatrixXd sobol_points01(int dim, long count, bool skip_initial) {
  if (dim < 1) throw ValidationError("sobol: dimension must be >= 1");
  if (dim > kMaxDim)
    throw UnsupportedDimensionError(
        "sobol: dimension " + std::to_string(dim) +
        " exceeds the direction-number table (max " + std::to_string(kMaxDim) + ")");
  if (count < 1) throw ValidationError("sobol: count must be >= 1");

  std::vector<std::array<std::uint64_t, kBits>> v(static_cast<size_t>(dim));
  for (int d = 0; d < dim; ++d) direction_integers(d, v[static_cast<size_t>(d)].data());

  const double scale = 1.0 / 4294967296.0;  // 2^-32
  Eigen::MatrixXd out(count, dim);
  std::vector<std::uint64_t> x(static_cast<size_t>(dim), 0);

  long emitted = 0;
  if (!skip_initial) {
    out.row(emitted++).setZero();
  }
  for (std::uint64_t n = 0; emitted < count; ++n) {
    const int c = lowest_zero_bit(n);
    for (int d = 0; d < dim; ++d) {
      x[static_cast<size_t>(d)] ^= v[static_cast<size_t>(d)][c];
      out(emitted, d) = static_cast<double>(x[static_cast<size_t>(d)]) * scale;
    }
    ++emitted;
  }
  return out;
}

std::vector<Config> sobol_grid(const ConfigSpace& space, long count,
                               bool skip_initial) {
  const Eigen::MatrixXd pts = sobol_points01(space.dimension(), count, skip_initial);
  std::vector<Config> grid;
  grid.reserve(static_cast<size_t>(count));
  for (long i = 0; i < count; ++i) grid.push_back(space.from_unit(pts.row(i)));
  return grid;
}

int default_grid_size(const ConfigSpace& space) { return 100 * space.dimension(); }

}  // namespace metabench
