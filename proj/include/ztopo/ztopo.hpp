#pragma once

#include "ztopo/bloch.hpp"
#include "ztopo/dipole_coupling.hpp"
#include "ztopo/error.hpp"
#include "ztopo/geometry.hpp"
#include "ztopo/io.hpp"
#include "ztopo/parallel.hpp"
#include "ztopo/realspace.hpp"
#include "ztopo/sweep.hpp"
#include "ztopo/synthetic.hpp"
#include "ztopo/version.hpp"
