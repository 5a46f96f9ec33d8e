#pragma once

#include "lossyhom/errors.hpp"
#include "lossyhom/optics.hpp"
#include "lossyhom/closed_form.hpp"
#include "lossyhom/fringe_fit.hpp"
#include "lossyhom/oracle.hpp"
#include "lossyhom/nelder_mead.hpp"
#include "lossyhom/tuner.hpp"
#include "lossyhom/sweep.hpp"
#include "lossyhom/config_io.hpp"
