// Convenience umbrella: the whole library.
#pragma once

#include "channel.hpp"
#include "charts.hpp"
#include "cli.hpp"
#include "config_io.hpp"
#include "core.hpp"
#include "csv.hpp"
#include "engine.hpp"
#include "metrics.hpp"
#include "routing.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "switching.hpp"
#include "traffic.hpp"
#include "units.hpp"
