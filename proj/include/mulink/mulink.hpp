// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mulink/adaptation/baselines.hpp"
#include "mulink/adaptation/features.hpp"
#include "mulink/adaptation/model.hpp"
#include "mulink/adaptation/post_snr.hpp"
#include "mulink/adaptation/svm.hpp"
#include "mulink/channel.hpp"
#include "mulink/feedback.hpp"
#include "mulink/harness/config.hpp"
#include "mulink/harness/dataset.hpp"
#include "mulink/harness/experiment.hpp"
#include "mulink/harness/leakage_check.hpp"
#include "mulink/harness/parallel.hpp"
#include "mulink/harness/train.hpp"
#include "mulink/leakage.hpp"
#include "mulink/phy/convolutional.hpp"
#include "mulink/phy/interleaver.hpp"
#include "mulink/phy/link_sim.hpp"
#include "mulink/phy/mcs.hpp"
#include "mulink/phy/modulation.hpp"
#include "mulink/precoding.hpp"
#include "mulink/rng.hpp"
#include "mulink/scheduler.hpp"
#include "mulink/snr_grid.hpp"
#include "mulink/types.hpp"
