#pragma once

#include "cavity_entropy/bayes.hpp"
#include "cavity_entropy/dynamics.hpp"
#include "cavity_entropy/errors.hpp"
#include "cavity_entropy/hilbert.hpp"
#include "cavity_entropy/infotheory.hpp"
#include "cavity_entropy/numerics.hpp"
#include "cavity_entropy/ode.hpp"
#include "cavity_entropy/parallel.hpp"
#include "cavity_entropy/steady_state.hpp"
#include "cavity_entropy/version.hpp"
