#pragma once

#include "lpvstab/analysis.hpp"
#include "lpvstab/lmi.hpp"
#include "lpvstab/sdp.hpp"
#include "lpvstab/sdpa.hpp"
#include "lpvstab/simplex_poly.hpp"
#include "lpvstab/system.hpp"
#include "lpvstab/system_io.hpp"
