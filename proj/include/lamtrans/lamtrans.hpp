#pragma once

// Umbrella header: the whole library in dependency order.

#include "lamtrans/errors.hpp"
#include "lamtrans/linalg.hpp"
#include "lamtrans/quadrature.hpp"
#include "lamtrans/medium.hpp"
#include "lamtrans/spectral.hpp"
#include "lamtrans/transform.hpp"
#include "lamtrans/elastodyn.hpp"
#include "lamtrans/oracles.hpp"
#include "lamtrans/config.hpp"
#include "lamtrans/verify.hpp"
