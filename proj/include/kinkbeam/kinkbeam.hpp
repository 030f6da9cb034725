#pragma once

#include "kinkbeam/errors.hpp"
#include "kinkbeam/params.hpp"
#include "kinkbeam/profiles.hpp"
#include "kinkbeam/grid.hpp"
#include "kinkbeam/tridiagonal.hpp"
#include "kinkbeam/dirac.hpp"
#include "kinkbeam/wavefunction.hpp"
#include "kinkbeam/observables.hpp"
#include "kinkbeam/tdse.hpp"
