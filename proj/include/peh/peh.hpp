#pragma once

#include "peh/errors.hpp"
#include "peh/geometry.hpp"
#include "peh/bspline.hpp"
#include "peh/assembly.hpp"
#include "peh/modal.hpp"
#include "peh/nelder_mead.hpp"
#include "peh/frf.hpp"
#include "peh/ode.hpp"
#include "peh/simulation.hpp"
#include "peh/harvester.hpp"
#include "peh/parallel.hpp"
#include "peh/events.hpp"
#include "peh/synthetic.hpp"
#include "peh/pso.hpp"
#include "peh/kmeans.hpp"
#include "peh/optimization.hpp"
#include "peh/sweep.hpp"
#include "peh/config.hpp"
#include "peh/io.hpp"
