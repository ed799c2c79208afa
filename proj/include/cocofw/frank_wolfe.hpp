#pragma once

#include "cocofw/geometry.hpp"
#include "cocofw/objectives.hpp"

namespace cocofw {

// Classic Frank-Wolfe on an aggregate loss with step 2/(tau+2), started at
// the origin.
Vector offline_frank_wolfe(const AggregateLoss& loss, const FeasibleSet& set, int iters);

}  // namespace cocofw
