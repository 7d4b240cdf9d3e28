#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace flexlp {

/// Sample quantile, linear interpolation between order statistics (R type 7).
double quantile(std::span<const double> values, double p);
std::vector<double> quantiles(std::span<const double> values, std::span<const double> levels);
double mean(std::span<const double> values);
double median(std::span<const double> values);

/// Runs fn(0..n-1) on up to `threads` workers. Each index must write only its
/// own output slot, so results never depend on scheduling. The first exception
/// thrown by any job is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace flexlp
