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

#ifndef WPOS_MODELS_HPP
#define WPOS_MODELS_HPP

#include <stdexcept>
#include <string>

#include "wpos/nn.hpp"

namespace wpos {

/// Architecture constants shared by the classifier builders. The paper-style
/// two-branch network and the baselines use these widths unless overridden.
struct ArchDefaults {
    int conv1_channels = 8;
    int conv2_channels = 16;
    int kernel = 3;
    int fc_width = 128;
    int mlp_width = 64;
};

/// Two-branch classifier over the ordered-power matrix and the bin-index
/// matrix (each M x F): conv-relu-conv-relu per branch, flatten, concatenate,
/// then dense(fc)-relu-dense(classes).
inline nn::ModelSpec build_pnn(int sensors, int features, int zones,
                               const ArchDefaults& arch = {})
{
    if (features < 1) throw std::invalid_argument("models: feature count must be >= 1");
    const int pad = (arch.kernel - 1) / 2;
    nn::ModelSpec spec;
    for (auto* branch : {&spec.branch_e, &spec.branch_b}) {
        branch->push_back(nn::LayerSpec::make_conv(arch.conv1_channels, arch.kernel, arch.kernel, pad));
        branch->push_back(nn::LayerSpec::make_relu());
        branch->push_back(nn::LayerSpec::make_conv(arch.conv2_channels, arch.kernel, arch.kernel, pad));
        branch->push_back(nn::LayerSpec::make_relu());
        branch->push_back(nn::LayerSpec::make_flatten());
    }
    spec.head.push_back(nn::LayerSpec::make_dense(arch.fc_width));
    spec.head.push_back(nn::LayerSpec::make_relu());
    spec.head.push_back(nn::LayerSpec::make_dense(zones));
    spec.input_e = {1, sensors, features};
    spec.input_b = {1, sensors, features};
    return spec;
}

/// Single-branch convolutional classifier over the full M x N_b profile.
inline nn::ModelSpec build_pdp_cnn(int sensors, int bins, int zones, const ArchDefaults& arch = {})
{
    const int pad = (arch.kernel - 1) / 2;
    nn::ModelSpec spec;
    spec.branch_e.push_back(nn::LayerSpec::make_conv(arch.conv1_channels, arch.kernel, arch.kernel, pad));
    spec.branch_e.push_back(nn::LayerSpec::make_relu());
    spec.branch_e.push_back(nn::LayerSpec::make_conv(arch.conv2_channels, arch.kernel, arch.kernel, pad));
    spec.branch_e.push_back(nn::LayerSpec::make_relu());
    spec.branch_e.push_back(nn::LayerSpec::make_flatten());
    spec.head.push_back(nn::LayerSpec::make_dense(arch.fc_width));
    spec.head.push_back(nn::LayerSpec::make_relu());
    spec.head.push_back(nn::LayerSpec::make_dense(zones));
    spec.input_e = {1, sensors, bins};
    return spec;
}

/// Dense classifier over the 2M-vector of arrival estimates and total powers.
inline nn::ModelSpec build_toa_rss_mlp(int sensors, int zones, const ArchDefaults& arch = {})
{
    nn::ModelSpec spec;
    spec.branch_e.push_back(nn::LayerSpec::make_flatten());
    spec.head.push_back(nn::LayerSpec::make_dense(arch.mlp_width));
    spec.head.push_back(nn::LayerSpec::make_relu());
    spec.head.push_back(nn::LayerSpec::make_dense(arch.mlp_width));
    spec.head.push_back(nn::LayerSpec::make_relu());
    spec.head.push_back(nn::LayerSpec::make_dense(zones));
    spec.input_e = {1, 1, 2 * sensors};
    return spec;
}

enum class ModelKind { pnn, pdp_cnn, toa_rss };

inline ModelKind parse_model_kind(const std::string& name)
{
    if (name == "pnn") return ModelKind::pnn;
    if (name == "pdp-cnn") return ModelKind::pdp_cnn;
    if (name == "toa-rss") return ModelKind::toa_rss;
    throw std::invalid_argument("models: unknown model '" + name + "'");
}

inline std::string model_kind_name(ModelKind kind)
{
    switch (kind) {
    case ModelKind::pnn: return "pnn";
    case ModelKind::pdp_cnn: return "pdp-cnn";
    case ModelKind::toa_rss: return "toa-rss";
    }
    throw std::logic_error("models: bad kind");
}

} // namespace wpos

#endif // WPOS_MODELS_HPP
