#pragma once
// Data-parallel inner loops used across the pipeline.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The variant is
// selected once at startup from the CPU capabilities; tests can pin the
// scalar path through set_backend() to check equivalence.

#include <cstddef>
#include <span>
#include <string_view>

namespace mmvad::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view backend_name(Backend b);

/// Best backend the running CPU supports.
Backend detect_backend();
/// Backend currently used by the dispatching entry points below.
Backend active_backend();
/// Overrides the active backend. Throws std::invalid_argument if the CPU
/// cannot run it.
void set_backend(Backend b);
bool backend_available(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// out[i] = dot(rows[i*dim .. (i+1)*dim), x) for every row.
void matvec(std::span<const double> rows, std::size_t dim,
            std::span<const double> x, std::span<double> out);

// Per-backend tables. The scalar table is always present.
struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

const Table& scalar_table();
const Table* avx2_table();  // nullptr when not compiled in
const Table* neon_table();  // nullptr when not compiled in

}  // namespace mmvad::kernels
