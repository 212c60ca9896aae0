// Copyright 2026 The tubalcs Authors.
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


// Umbrella header.  oracle.hpp and selftest.hpp are testing aids and are not
// pulled in here.

#pragma once

#include "tubalcs/algebra.hpp"
#include "tubalcs/error.hpp"
#include "tubalcs/harness.hpp"
#include "tubalcs/io.hpp"
#include "tubalcs/recovery.hpp"
#include "tubalcs/sensing.hpp"
#include "tubalcs/spectral.hpp"
#include "tubalcs/synthetic.hpp"
#include "tubalcs/tensor3.hpp"
