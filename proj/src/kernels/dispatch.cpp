#include "iontrap/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace iontrap::kernels {

namespace {

const Impl* pick_default() {
    if (const char* env = std::getenv("IONTRAP_SIMD")) {
        const std::string_view v(env);
        if (v == "scalar") return &scalar_impl();
#if defined(__x86_64__) || defined(_M_X64)
        if (v == "avx2" && avx2_supported()) return &avx2_impl();
#endif
        // "auto" or anything unrecognized falls through
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) return &avx2_impl();
#endif
    return &scalar_impl();
}

std::atomic<const Impl*>& active_slot() {
    static std::atomic<const Impl*> slot{pick_default()};
    return slot;
}

} // namespace

const Impl& active_impl() { return *active_slot().load(std::memory_order_relaxed); }

bool set_active(std::string_view name) {
    if (name == "scalar") {
        active_slot().store(&scalar_impl(), std::memory_order_relaxed);
        return true;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2" && avx2_supported()) {
        active_slot().store(&avx2_impl(), std::memory_order_relaxed);
        return true;
    }
#endif
    if (name == "auto") {
        active_slot().store(pick_default(), std::memory_order_relaxed);
        return true;
    }
    return false;
}

std::string active_name() { return active_impl().name; }

} // namespace iontrap::kernels
