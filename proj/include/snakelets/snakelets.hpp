#pragma once

#include "canny.hpp"
#include "detect.hpp"
#include "eval.hpp"
#include "filter.hpp"
#include "gradient.hpp"
#include "gvf.hpp"
#include "image_io.hpp"
#include "raster.hpp"
#include "recovery.hpp"
#include "serialize.hpp"
#include "snakelet.hpp"
