#pragma once

#include "stabilis/algorithm.hpp"
#include "stabilis/checker.hpp"
#include "stabilis/cli.hpp"
#include "stabilis/daemons.hpp"
#include "stabilis/json_io.hpp"
#include "stabilis/potentials.hpp"
#include "stabilis/topology.hpp"
