#pragma once

#include "pbiharm/benchmark.hpp"
#include "pbiharm/functional.hpp"
#include "pbiharm/hessian.hpp"
#include "pbiharm/mesh.hpp"
#include "pbiharm/norms.hpp"
#include "pbiharm/quadrature.hpp"
#include "pbiharm/space.hpp"
#include "pbiharm/study.hpp"
#include "pbiharm/traces.hpp"
#include "pbiharm/vtk_io.hpp"
