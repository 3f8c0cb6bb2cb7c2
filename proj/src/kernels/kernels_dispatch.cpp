#include "potlab/kernels.hpp"
#include "potlab/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace potlab::kernels {

const Kernels* avx2_impl(); // defined in kernels_avx2.cpp (may return nullptr)

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Kernels* resolve_auto() {
    const Kernels* v = avx2();
    return v != nullptr ? v : &scalar();
}

std::atomic<const Kernels*> g_active{nullptr};

const Kernels* initial() {
    if (const char* env = std::getenv("POTLAB_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar();
        if (std::strcmp(env, "avx2") == 0 && avx2() != nullptr) return avx2();
    }
    return resolve_auto();
}

} // namespace

const Kernels* avx2() {
    static const Kernels* k = cpu_has_avx2() ? avx2_impl() : nullptr;
    return k;
}

const Kernels& active() {
    const Kernels* k = g_active.load(std::memory_order_acquire);
    if (k == nullptr) {
        k = initial();
        g_active.store(k, std::memory_order_release);
    }
    return *k;
}

void set_active(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&scalar(), std::memory_order_release);
    } else if (std::strcmp(name, "avx2") == 0) {
        if (avx2() == nullptr)
            throw domain_error("avx2 kernels not available on this build/CPU");
        g_active.store(avx2(), std::memory_order_release);
    } else if (std::strcmp(name, "auto") == 0) {
        g_active.store(resolve_auto(), std::memory_order_release);
    } else {
        throw domain_error(std::string("unknown kernel variant: ") + name);
    }
}

} // namespace potlab::kernels
