#pragma once

#include "ellab/coupling.hpp"
#include "ellab/elliptic.hpp"
#include "ellab/equilibria.hpp"
#include "ellab/error.hpp"
#include "ellab/experiments.hpp"
#include "ellab/field.hpp"
#include "ellab/forcing.hpp"
#include "ellab/grid.hpp"
#include "ellab/linalg.hpp"
#include "ellab/manifold.hpp"
#include "ellab/model.hpp"
#include "ellab/newton.hpp"
#include "ellab/nonlinearity.hpp"
#include "ellab/operators.hpp"
#include "ellab/parabolic.hpp"
#include "ellab/parallel.hpp"
#include "ellab/periodic.hpp"
#include "ellab/symbol.hpp"
#include "ellab/io/config.hpp"
#include "ellab/io/export.hpp"
#include "ellab/io/field_io.hpp"
#include "ellab/io/report.hpp"
#include "ellab/io/runner.hpp"
#include "ellab/io/svg.hpp"
