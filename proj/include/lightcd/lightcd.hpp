#pragma once

#include "lightcd/config.hpp"
#include "lightcd/core.hpp"
#include "lightcd/csv.hpp"
#include "lightcd/detector.hpp"
#include "lightcd/divergence.hpp"
#include "lightcd/errors.hpp"
#include "lightcd/evalharness.hpp"
#include "lightcd/factorization.hpp"
#include "lightcd/rng.hpp"
#include "lightcd/sampled_pca.hpp"
#include "lightcd/synthgen.hpp"
#include "lightcd/version.hpp"
