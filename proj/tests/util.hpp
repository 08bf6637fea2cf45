// Copyright 2026 The epiq Authors
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

#pragma once

#include <vector>

#include "epiq/tensor.hpp"
#include "oracle.hpp"

namespace testing_util {

inline epiq::ComplexMatrix to_epiq(const oracle::Mat &m) { return epiq::ComplexMatrix(m.n, m.n, m.a); }

inline epiq::ComplexMatrix to_epiq(const oracle::Vec &v) { return epiq::ComplexMatrix::column(v); }

inline oracle::Mat from_epiq(const epiq::ComplexMatrix &m) {
    oracle::Mat out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out(r, c) = m(r, c);
        }
    }
    return out;
}

inline epiq::ComplexMatrix density(const oracle::Vec &v) { return to_epiq(oracle::outer(v)); }

} // namespace testing_util
