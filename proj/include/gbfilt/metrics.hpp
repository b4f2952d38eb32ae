#pragma once

#include "gbfilt/signal.hpp"

namespace gbf {

/// Mean squared error. Throws PreconditionError on a length mismatch.
double mse(const Signal& prediction, const Signal& target);

/// MSE / mean(target^2); 0 when both are zero.
double nmse(const Signal& prediction, const Signal& target);

}  // namespace gbf
