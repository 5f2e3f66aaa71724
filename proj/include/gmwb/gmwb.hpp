#pragma once

// Pricing and semi-static hedging of guaranteed-minimum-withdrawal-benefit
// guarantees: backward put-weight recursions, the reverse gamma-adjoint
// dual, roll-up features, forward vega/volga analysis and a Monte-Carlo
// oracle.

#include "gmwb/adjoint.hpp"
#include "gmwb/black_scholes.hpp"
#include "gmwb/config.hpp"
#include "gmwb/markov.hpp"
#include "gmwb/mc.hpp"
#include "gmwb/model.hpp"
#include "gmwb/rollup.hpp"
#include "gmwb/schedule.hpp"
#include "gmwb/sensitivities.hpp"
#include "gmwb/variance_gamma.hpp"
#include "gmwb/verify.hpp"
#include "gmwb/weights.hpp"
