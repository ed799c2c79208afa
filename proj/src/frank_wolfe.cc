#include "cocofw/frank_wolfe.hpp"

namespace cocofw {

Vector offline_frank_wolfe(const AggregateLoss& loss, const FeasibleSet& set, int iters) {
  Vector x = Vector::Zero(set.dimension());
  for (int tau = 0; tau < iters; ++tau) {
    const Vector v = lmo(set, loss.gradient(x));
    x += 2.0 / (tau + 2.0) * (v - x);
  }
  return x;
}

}  // namespace cocofw
