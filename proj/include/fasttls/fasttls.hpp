#pragma once

#include "fasttls/bench.hpp"
#include "fasttls/data.hpp"
#include "fasttls/decomp.hpp"
#include "fasttls/errors.hpp"
#include "fasttls/fast_tls.hpp"
#include "fasttls/matrix.hpp"
#include "fasttls/random.hpp"
#include "fasttls/rank_constrained.hpp"
#include "fasttls/regularized.hpp"
#include "fasttls/sketch.hpp"
#include "fasttls/tls.hpp"
