// Copyright 2026 The oppsync Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "oppsync/crdt.hpp"
#include "oppsync/event_log.hpp"
#include "oppsync/g_counter.hpp"
#include "oppsync/invariants.hpp"
#include "oppsync/messages.hpp"
#include "oppsync/metrics.hpp"
#include "oppsync/mobility.hpp"
#include "oppsync/or_map.hpp"
#include "oppsync/protocol.hpp"
#include "oppsync/relay.hpp"
#include "oppsync/relay_store.hpp"
#include "oppsync/replica.hpp"
#include "oppsync/selection.hpp"
#include "oppsync/shapes.hpp"
#include "oppsync/simulator.hpp"
#include "oppsync/trace.hpp"
#include "oppsync/versioning.hpp"
