#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mmvad/kernels.hpp"

namespace mmvad::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* table_for(Backend b) {
  switch (b) {
    case Backend::kScalar: return &scalar_table();
    case Backend::kAvx2: return cpu_has_avx2() ? avx2_table() : nullptr;
    case Backend::kNeon: return neon_table();
  }
  return nullptr;
}

Backend initial_backend() {
  // MMVAD_KERNELS=scalar pins the reference path for debugging.
  if (const char* env = std::getenv("MMVAD_KERNELS"); env && std::string(env) == "scalar")
    return Backend::kScalar;
  return detect_backend();
}

struct State {
  std::atomic<Backend> backend{initial_backend()};
  std::atomic<const Table*> table{table_for(backend.load())};
};

State& state() {
  static State s;
  return s;
}

inline const Table& active() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) { return table_for(b) != nullptr; }

Backend detect_backend() {
  if (backend_available(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_available(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

Backend active_backend() { return state().backend.load(); }

void set_backend(Backend b) {
  const Table* t = table_for(b);
  if (t == nullptr)
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(b)));
  state().table.store(t);
  state().backend.store(b);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const double> a) { return active().squared_norm(a.data(), a.size()); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void matvec(std::span<const double> rows, std::size_t dim, std::span<const double> x,
            std::span<double> out) {
  assert(x.size() == dim && rows.size() == dim * out.size());
  const Table& t = active();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t.dot(rows.data() + i * dim, x.data(), dim);
}

}  // namespace mmvad::kernels
