#pragma once

// Everything at once.

#include "supg/analysis.hpp"
#include "supg/app.hpp"
#include "supg/fe_space.hpp"
#include "supg/forms.hpp"
#include "supg/mesh.hpp"
#include "supg/problem.hpp"
#include "supg/solve.hpp"
