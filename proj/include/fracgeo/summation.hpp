#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace fracgeo {

/// Neumaier compensated accumulator. Pair sums over millions of kernel
/// weights stay within a few ulps of the exact sum irrespective of order.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{0};
    return n;
}
} // namespace detail

/// Number of worker threads used by the row-parallel reductions. 0 means
/// hardware concurrency.
inline void set_thread_count(unsigned n) { detail::thread_setting() = n; }

inline unsigned thread_count() {
    const unsigned n = detail::thread_setting();
    if (n != 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates row(i) for i in [0, rows) and folds the results in index
/// order. Workers only write their own slots, so the result does not
/// depend on the thread count.
template <class RowFn>
double parallel_row_sum(std::size_t rows, RowFn&& row) {
    std::vector<double> partial(rows, 0.0);
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(thread_count(), std::max<std::size_t>(rows / 64, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < rows; ++i) partial[i] = row(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            constexpr std::size_t chunk = 16;
            for (;;) {
                const std::size_t begin = next.fetch_add(chunk);
                if (begin >= rows) return;
                const std::size_t end = std::min(rows, begin + chunk);
                for (std::size_t i = begin; i < end; ++i) partial[i] = row(i);
            }
        };
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
        work();
    }
    return compensated_total(partial);
}

} // namespace fracgeo
