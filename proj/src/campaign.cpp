#include "ponsim/campaign.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ponsim {

std::uint64_t slot_seed(std::uint64_t base_seed, std::uint64_t slot) {
    // splitmix64 over a per-slot stream offset. Distinct slots always get
    // distinct, well-mixed seeds even for tiny base values.
    std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (slot + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int parallel_width() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void for_each_index(std::size_t n, ExecMode mode,
                    const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (mode == ExecMode::Serial) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::exception_ptr first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(ponsim_for_each_index_error)
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
#else
    for (std::size_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
#endif
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace ponsim
