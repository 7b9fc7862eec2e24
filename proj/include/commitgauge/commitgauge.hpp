#pragma once

#include "commitgauge/error.hpp"
#include "commitgauge/instrument.hpp"
#include "commitgauge/rational.hpp"
#include "commitgauge/report.hpp"
#include "commitgauge/scoring.hpp"
#include "commitgauge/session.hpp"
#include "commitgauge/store.hpp"
#include "commitgauge/workflow.hpp"
