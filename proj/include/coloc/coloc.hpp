#pragma once

#include "coloc/geometry.hpp"
#include "coloc/network.hpp"
#include "coloc/channel.hpp"
#include "coloc/sdp.hpp"
#include "coloc/refine.hpp"
#include "coloc/metrics.hpp"
#include "coloc/harness.hpp"
#include "coloc/io.hpp"
#include "coloc/svg.hpp"
