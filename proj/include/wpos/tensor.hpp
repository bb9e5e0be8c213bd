// Copyright 2026 The wpos Authors
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

#ifndef WPOS_TENSOR_HPP
#define WPOS_TENSOR_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace wpos::nn {

/// Dense row-major 4-D tensor (batch, channels, rows, cols). Vectors live as
/// (batch, d, 1, 1).
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), v(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0)
    {
        if (n_ < 0 || c_ < 1 || h_ < 1 || w_ < 1)
            throw std::invalid_argument("tensor: invalid shape");
    }

    std::size_t size() const { return v.size(); }
    int per_record() const { return c * h * w; }
    bool empty() const { return v.empty(); }

    double& at(int ni, int ci, int hi, int wi)
    {
        return v[((static_cast<std::size_t>(ni) * c + ci) * h + hi) * w + wi];
    }
    double at(int ni, int ci, int hi, int wi) const
    {
        return v[((static_cast<std::size_t>(ni) * c + ci) * h + hi) * w + wi];
    }

    bool same_record_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
};

/// Gathers the given records of a tensor into a new batch.
inline Tensor gather(const Tensor& src, const std::vector<int>& rows)
{
    Tensor out(static_cast<int>(rows.size()), src.c, src.h, src.w);
    const int stride = src.per_record();
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < stride; ++j)
            out.v[i * stride + j] = src.v[static_cast<std::size_t>(rows[i]) * stride + j];
    return out;
}

} // namespace wpos::nn

#endif // WPOS_TENSOR_HPP
