#pragma once

#include "cpscan/calibrate.hpp"
#include "cpscan/csv.hpp"
#include "cpscan/detect.hpp"
#include "cpscan/dist.hpp"
#include "cpscan/experiments.hpp"
#include "cpscan/models.hpp"
#include "cpscan/rng.hpp"
#include "cpscan/series.hpp"
#include "cpscan/simulate.hpp"
#include "cpscan/version.hpp"
