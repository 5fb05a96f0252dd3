#pragma once

#include "qig/error.hpp"
#include "qig/matrix_core.hpp"
#include "qig/monotone.hpp"
#include "qig/quadrature.hpp"
#include "qig/metric.hpp"
#include "qig/channel.hpp"
#include "qig/estimation.hpp"
#include "qig/divergence.hpp"
#include "qig/geometry.hpp"
#include "qig/io.hpp"
#include "qig/cli.hpp"
