#include "boxmodel/numeric.hpp"

namespace boxmodel {

double batch_means_stderr(std::span<const double> series, std::size_t n_batches) {
    const std::size_t n = series.size();
    if (n < 2) return 0.0;
    const std::size_t size = n / std::max<std::size_t>(n_batches, 1);
    if (n_batches < 2 || size < 1 || n / size < 2) {
        RunningStats s;
        for (double x : series) s.push(x);
        return std::sqrt(s.variance() / static_cast<double>(n));
    }
    RunningStats batches;
    const std::size_t count = n / size;
    for (std::size_t b = 0; b < count; ++b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < size; ++i) sum += series[b * size + i];
        batches.push(sum / static_cast<double>(size));
    }
    return std::sqrt(batches.variance() / static_cast<double>(count));
}

}  // namespace boxmodel
