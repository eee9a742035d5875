#pragma once

#include "gamplab/common.hpp"
#include "gamplab/ensembles.hpp"
#include "gamplab/estimators.hpp"
#include "gamplab/gamp.hpp"
#include "gamplab/analysis.hpp"
#include "gamplab/baselines.hpp"
#include "gamplab/io.hpp"
