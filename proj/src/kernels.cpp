#include "layercon/kernels.hpp"

#include <cstdlib>
#include <string>

namespace layercon::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table;
    case Isa::avx2:
#if defined(LAYERCON_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return &detail::avx2_table;
      }
#endif
      return nullptr;
    case Isa::neon:
#if defined(LAYERCON_HAVE_NEON)
      return &detail::neon_table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::scalar};
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (table_for(isa)) out.push_back(isa);
  }
  return out;
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("LAYERCON_SIMD")) {
    const std::string want(env);
    for (Isa isa : available()) {
      if (want == isa_name(isa)) return *table_for(isa);
    }
  }
  return *table_for(available().back());
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace layercon::kernels
