// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#define HLOSIM_VERSION "0.1.0"

#include "hlosim/estimators.hpp"
#include "hlosim/graph.hpp"
#include "hlosim/hardware.hpp"
#include "hlosim/ir.hpp"
#include "hlosim/log.hpp"
#include "hlosim/metrics.hpp"
#include "hlosim/network.hpp"
#include "hlosim/parser.hpp"
#include "hlosim/pipeline.hpp"
#include "hlosim/printer.hpp"
#include "hlosim/report.hpp"
#include "hlosim/slicer.hpp"
#include "hlosim/system.hpp"
#include "hlosim/trace.hpp"
#include "hlosim/workload_gen.hpp"
