#pragma once

#include "deception/attack.hpp"
#include "deception/exponent.hpp"
#include "deception/model_io.hpp"
#include "deception/oracle.hpp"
#include "deception/prob_core.hpp"
#include "deception/rational.hpp"
#include "deception/rd_side_info.hpp"
#include "deception/sequences.hpp"
#include "deception/types.hpp"
