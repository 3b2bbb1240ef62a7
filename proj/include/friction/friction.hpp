#pragma once

#include "friction/dynamics.hpp"
#include "friction/error.hpp"
#include "friction/protocol.hpp"
#include "friction/protocol_config.hpp"
#include "friction/pulses.hpp"
#include "friction/spin_core.hpp"
#include "friction/thermo.hpp"
