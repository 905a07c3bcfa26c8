#pragma once

#include "hdgstokes/basis.hpp"
#include "hdgstokes/convergence.hpp"
#include "hdgstokes/dofmap.hpp"
#include "hdgstokes/errors.hpp"
#include "hdgstokes/forms.hpp"
#include "hdgstokes/local.hpp"
#include "hdgstokes/mesh.hpp"
#include "hdgstokes/problems.hpp"
#include "hdgstokes/quadrature.hpp"
#include "hdgstokes/singular.hpp"
#include "hdgstokes/solution.hpp"
#include "hdgstokes/solver.hpp"
#include "hdgstokes/trace_system.hpp"
