#pragma once

#include "bpd.hpp"
#include "classifiers.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "features.hpp"
#include "labels.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "report.hpp"
#include "spectrum.hpp"
#include "synth.hpp"
#include "text.hpp"
