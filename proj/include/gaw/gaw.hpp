#pragma once

#include "gaw/errors.hpp"
#include "gaw/tolerances.hpp"
#include "gaw/matcore.hpp"
#include "gaw/gausslaw.hpp"
#include "gaw/coupling.hpp"
#include "gaw/solver.hpp"
#include "gaw/oracle.hpp"
#include "gaw/sinkhorn.hpp"
#include "gaw/io.hpp"
#include "gaw/instances.hpp"
#include "gaw/commands.hpp"
