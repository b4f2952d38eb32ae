#include "gbfilt/metrics.hpp"

#include <string>

#include "gbfilt/error.hpp"

namespace gbf {

double mse(const Signal& prediction, const Signal& target) {
  if (prediction.size() != target.size()) {
    throw PreconditionError("prediction has " + std::to_string(prediction.size()) +
                            " samples but target has " + std::to_string(target.size()));
  }
  if (target.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t n = 0; n < target.size(); ++n) {
    const double e = target[n] - prediction[n];
    acc += e * e;
  }
  return acc / static_cast<double>(target.size());
}

double nmse(const Signal& prediction, const Signal& target) {
  const double err = mse(prediction, target);
  double power = 0.0;
  for (double v : target) power += v * v;
  if (!target.empty()) power /= static_cast<double>(target.size());
  if (power == 0.0) return err == 0.0 ? 0.0 : err / power;
  return err / power;
}

}  // namespace gbf
