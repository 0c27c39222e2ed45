#pragma once

#include "constants.hpp"
#include "dephasing.hpp"
#include "errors.hpp"
#include "hamiltonian.hpp"
#include "linalg.hpp"
#include "materials.hpp"
#include "optimizer.hpp"
#include "random.hpp"
#include "readout_noise.hpp"
#include "report_io.hpp"
#include "sample.hpp"
#include "sensitivity.hpp"
#include "spin_dynamics.hpp"
