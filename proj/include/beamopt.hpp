// SPDX-License-Identifier: Apache-2.0
//
// beamopt: multi-user MISO downlink beamforming toolkit
// Copyright (C) 2026 The beamopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "beamopt/autodiff.hpp"
#include "beamopt/baselines.hpp"
#include "beamopt/binary_io.hpp"
#include "beamopt/channel.hpp"
#include "beamopt/checkpoint.hpp"
#include "beamopt/config.hpp"
#include "beamopt/dataset.hpp"
#include "beamopt/error.hpp"
#include "beamopt/evaluate.hpp"
#include "beamopt/gradcheck.hpp"
#include "beamopt/linalg.hpp"
#include "beamopt/metrics.hpp"
#include "beamopt/models.hpp"
#include "beamopt/parallel.hpp"
#include "beamopt/results.hpp"
#include "beamopt/rng.hpp"
#include "beamopt/sum_rate_loss.hpp"
#include "beamopt/trainer.hpp"
#include "beamopt/verify.hpp"
