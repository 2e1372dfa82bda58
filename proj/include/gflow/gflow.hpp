#ifndef GFLOW_GFLOW_HPP
#define GFLOW_GFLOW_HPP

#include "gflow/config.hpp"
#include "gflow/energy.hpp"
#include "gflow/error.hpp"
#include "gflow/field.hpp"
#include "gflow/flow.hpp"
#include "gflow/grid.hpp"
#include "gflow/io.hpp"
#include "gflow/manifold.hpp"
#include "gflow/presets.hpp"
#include "gflow/run.hpp"
#include "gflow/verify.hpp"
#include "gflow/weakform.hpp"

#endif // GFLOW_GFLOW_HPP
