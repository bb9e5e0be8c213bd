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

#include <doctest.h>

#include <vector>

#include "wpos/models.hpp"
#include "wpos/nn.hpp"
#include "wpos/rng.hpp"

using wpos::RandomStream;
using namespace wpos::nn;

TEST_CASE("feature dimensions across the builder family")
{
    Model pnn(wpos::build_pnn(12, 5, 8));
    CHECK(pnn.input_feature_count() == 120); // 2 F M

    for (int f = 4; f <= 10; ++f) {
        Model m(wpos::build_pnn(12, f, 8));
        CHECK(m.input_feature_count() == 2 * f * 12);
    }
    CHECK(Model(wpos::build_pnn(12, 3, 8)).input_feature_count() == 72);
    CHECK(Model(wpos::build_pnn(12, 10, 8)).input_feature_count() == 240);

    Model cnn(wpos::build_pdp_cnn(12, 100, 8));
    CHECK(cnn.input_feature_count() == 1200);

    Model mlp(wpos::build_toa_rss_mlp(12, 8));
    CHECK(mlp.input_feature_count() == 24);

    // The compact feature set stays at or under a fifth of the profile size
    // whenever 2F/N_b does.
    for (int f = 4; f <= 10; ++f)
        CHECK(2 * f * 12 <= 0.2 * 1200 + 1e-9);

    CHECK_THROWS_AS(wpos::build_pnn(12, 0, 8), std::invalid_argument);
}

TEST_CASE("builders produce valid probability outputs")
{
    RandomStream rng(91);

    Model pnn(wpos::build_pnn(6, 5, 8));
    Tensor e(3, 1, 6, 5), b(3, 1, 6, 5);
    for (double& x : e.v) x = rng.normal();
    for (double& x : b.v) x = rng.normal();
    const Tensor probs = pnn.forward(e, b);
    CHECK(probs.c == 8);
    for (int ni = 0; ni < probs.n; ++ni) {
        double total = 0.0;
        for (int k = 0; k < probs.c; ++k) {
            const double p = probs.at(ni, k, 0, 0);
            CHECK(p >= 0.0);
            total += p;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }

    Model cnn(wpos::build_pdp_cnn(4, 20, 5));
    for (Parameter* p : cnn.parameters()) std::fill(p->value.begin(), p->value.end(), 0.0);
    Tensor pdp(2, 1, 4, 20);
    const Tensor uniform = cnn.forward(pdp, Tensor());
    for (double p : uniform.v) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));

    Model mlp(wpos::build_toa_rss_mlp(4, 6));
    for (Parameter* p : mlp.parameters()) std::fill(p->value.begin(), p->value.end(), 0.0);
    Tensor toa(2, 1, 1, 8);
    const Tensor u2 = mlp.forward(toa, Tensor());
    for (double p : u2.v) CHECK(p == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("sensor permutations change the dense baseline's output")
{
    Model mlp(wpos::build_toa_rss_mlp(3, 4));
    Tensor in(1, 1, 1, 6), permuted(1, 1, 1, 6);
    in.v = {1.0, 2.0, 3.0, 0.5, 0.25, 0.125};
    permuted.v = {2.0, 1.0, 3.0, 0.25, 0.5, 0.125};
    const Tensor a = mlp.forward(in, Tensor());
    const Tensor b = mlp.forward(permuted, Tensor());
    bool differs = false;
    for (std::size_t i = 0; i < a.v.size(); ++i) differs |= (a.v[i] != b.v[i]);
    CHECK(differs);
}

TEST_CASE("gradient check passes on the profile-image baseline")
{
    wpos::ArchDefaults arch;
    arch.conv1_channels = 2;
    arch.conv2_channels = 2;
    arch.fc_width = 6;
    ModelSpec spec = wpos::build_pdp_cnn(3, 8, 4, arch);
    spec.init_seed = 92;
    Model model(spec);

    RandomStream rng(93);
    Tensor e(2, 1, 3, 8);
    for (double& x : e.v) x = rng.normal();
    const std::vector<int> labels{1, 2};

    model.accumulate_gradients(e, Tensor(), labels);
    std::vector<std::vector<double>> grads;
    for (Parameter* p : model.parameters()) grads.push_back(p->grad);

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t pi = 0; pi < model.parameters().size(); ++pi) {
        Parameter* p = model.parameters()[pi];
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + h;
            const double up = model.loss(e, Tensor(), labels);
            p->value[i] = saved - h;
            const double down = model.loss(e, Tensor(), labels);
            p->value[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = grads[pi][i];
            if (std::fabs(fd) < 1e-10 && std::fabs(an) < 1e-10) continue;
            worst = std::max(worst,
                             std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1.0}));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("model names round-trip")
{
    for (const char* name : {"pnn", "pdp-cnn", "toa-rss"})
        CHECK(wpos::model_kind_name(wpos::parse_model_kind(name)) == name);
    CHECK_THROWS_AS(wpos::parse_model_kind("mystery"), std::invalid_argument);
}
