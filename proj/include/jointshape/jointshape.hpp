#pragma once

#include "jointshape/analysis.hpp"
#include "jointshape/error.hpp"
#include "jointshape/io.hpp"
#include "jointshape/oscillator.hpp"
#include "jointshape/shaping.hpp"
#include "jointshape/sysid.hpp"
