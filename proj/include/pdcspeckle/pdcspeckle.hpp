#pragma once

#include "analysis/correlation.hpp"
#include "analysis/estimators.hpp"
#include "analysis/fit.hpp"
#include "analysis/radius.hpp"
#include "campaign.hpp"
#include "config.hpp"
#include "detector.hpp"
#include "error.hpp"
#include "fft.hpp"
#include "image.hpp"
#include "io/config_file.hpp"
#include "io/csv.hpp"
#include "io/pgm.hpp"
#include "io/text.hpp"
#include "phasematch.hpp"
#include "random.hpp"
#include "synthesis.hpp"
