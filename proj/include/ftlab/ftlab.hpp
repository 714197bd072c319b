// Copyright 2026 The ftlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FTLAB_FTLAB_HPP
#define FTLAB_FTLAB_HPP

#include "ftlab/matcore.hpp"
#include "ftlab/parallel.hpp"
#include "ftlab/channels.hpp"
#include "ftlab/circuit.hpp"
#include "ftlab/faultpaths.hpp"
#include "ftlab/gadgets.hpp"
#include "ftlab/threshold.hpp"
#include "ftlab/io.hpp"
#include "ftlab/cli.hpp"

#endif  // FTLAB_FTLAB_HPP
