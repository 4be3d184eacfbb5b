#pragma once

#include "dslab/core.hpp"
#include "dslab/spectral.hpp"
#include "dslab/metric.hpp"
#include "dslab/geometry_flow.hpp"
#include "dslab/formal_expansion.hpp"
#include "dslab/psigma.hpp"
#include "dslab/poisson.hpp"
#include "dslab/mode_scattering.hpp"
#include "dslab/pde.hpp"
#include "dslab/config.hpp"
#include "dslab/acceptance.hpp"
