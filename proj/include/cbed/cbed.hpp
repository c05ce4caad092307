#pragma once

#include "cbed/sparse_operator.hpp"
#include "cbed/spin_algebra.hpp"
#include "cbed/lattice.hpp"
#include "cbed/hamiltonian.hpp"
#include "cbed/solver.hpp"
#include "cbed/reflection.hpp"
#include "cbed/thermo.hpp"
#include "cbed/verification.hpp"
#include "cbed/io.hpp"
