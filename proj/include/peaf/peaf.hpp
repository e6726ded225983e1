// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header for the analog acoustic feature toolkit.

#pragma once

#include "peaf/audio.hpp"
#include "peaf/config_json.hpp"
#include "peaf/corpus.hpp"
#include "peaf/entropy.hpp"
#include "peaf/feature.hpp"
#include "peaf/filterbank.hpp"
#include "peaf/frontend.hpp"
#include "peaf/learnable.hpp"
#include "peaf/manifest.hpp"
#include "peaf/mfcc.hpp"
#include "peaf/mlp.hpp"
#include "peaf/optimize.hpp"
#include "peaf/power.hpp"
#include "peaf/random.hpp"
#include "peaf/wav.hpp"
