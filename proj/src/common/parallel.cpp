// Copyright 2026 The qmlbk Authors
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

#include "qmlbk/common/parallel.hpp"

#include <atomic>

namespace qmlbk {

namespace {
std::atomic<unsigned> g_default_threads{0};
}

void set_default_threads(unsigned threads) { g_default_threads = threads; }

unsigned default_threads() {
    const unsigned t = g_default_threads.load();
    if (t != 0)
        return t;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace qmlbk
