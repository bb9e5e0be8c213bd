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

#ifndef WPOS_NN_IO_HPP
#define WPOS_NN_IO_HPP

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "wpos/nn.hpp"

namespace wpos::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace detail {

inline void write_bytes(std::ostream& out, const void* data, std::size_t count)
{
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(count));
}

inline void read_bytes(std::istream& in, void* data, std::size_t count)
{
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(count));
    if (!in) throw std::runtime_error("nn: truncated checkpoint");
}

template <typename T> void write_value(std::ostream& out, T value)
{
    write_bytes(out, &value, sizeof(T));
}

template <typename T> T read_value(std::istream& in)
{
    T value{};
    read_bytes(in, &value, sizeof(T));
    return value;
}

inline void write_layers(std::ostream& out, const std::vector<LayerSpec>& layers)
{
    write_value<std::uint32_t>(out, static_cast<std::uint32_t>(layers.size()));
    for (const LayerSpec& l : layers) {
        write_value<std::uint8_t>(out, static_cast<std::uint8_t>(l.kind));
        write_value<std::int32_t>(out, l.units);
        write_value<std::int32_t>(out, l.kernel_h);
        write_value<std::int32_t>(out, l.kernel_w);
        write_value<std::int32_t>(out, l.pad);
    }
}

inline std::vector<LayerSpec> read_layers(std::istream& in)
{
    const auto count = read_value<std::uint32_t>(in);
    std::vector<LayerSpec> layers(count);
    for (LayerSpec& l : layers) {
        l.kind = static_cast<LayerKind>(read_value<std::uint8_t>(in));
        l.units = read_value<std::int32_t>(in);
        l.kernel_h = read_value<std::int32_t>(in);
        l.kernel_w = read_value<std::int32_t>(in);
        l.pad = read_value<std::int32_t>(in);
    }
    return layers;
}

} // namespace detail

inline constexpr char kCheckpointMagic[4] = {'W', 'P', 'N', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_model(Model& model, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("nn: cannot open checkpoint for writing: " + path);

    detail::write_bytes(out, kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::write_value<std::uint32_t>(out, kCheckpointVersion);

    const ModelSpec& spec = model.spec();
    detail::write_layers(out, spec.branch_e);
    detail::write_layers(out, spec.branch_b);
    detail::write_layers(out, spec.head);
    for (const InputShape& s : {spec.input_e, spec.input_b}) {
        detail::write_value<std::int32_t>(out, s.channels);
        detail::write_value<std::int32_t>(out, s.rows);
        detail::write_value<std::int32_t>(out, s.cols);
    }
    detail::write_value<std::uint64_t>(out, spec.init_seed);
    detail::write_value<double>(out, spec.adam.learning_rate);
    detail::write_value<double>(out, spec.adam.beta1);
    detail::write_value<double>(out, spec.adam.beta2);
    detail::write_value<double>(out, spec.adam.epsilon);
    detail::write_value<std::int32_t>(out, spec.batch_size);
    detail::write_value<std::int32_t>(out, spec.epochs);

    detail::write_value<std::uint32_t>(out, static_cast<std::uint32_t>(model.parameters().size()));
    for (const Parameter* p : model.parameters()) {
        detail::write_value<std::uint64_t>(out, p->value.size());
        detail::write_bytes(out, p->value.data(), p->value.size() * sizeof(double));
    }
    if (!out) throw std::runtime_error("nn: checkpoint write failed: " + path);
}

inline Model load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("nn: cannot open checkpoint: " + path);

    char magic[4];
    detail::read_bytes(in, magic, sizeof(magic));
    if (std::string(magic, 4) != std::string(kCheckpointMagic, 4))
        throw std::runtime_error("nn: bad checkpoint magic: " + path);
    if (detail::read_value<std::uint32_t>(in) != kCheckpointVersion)
        throw std::runtime_error("nn: unsupported checkpoint version: " + path);

    ModelSpec spec;
    spec.branch_e = detail::read_layers(in);
    spec.branch_b = detail::read_layers(in);
    spec.head = detail::read_layers(in);
    for (InputShape* s : {&spec.input_e, &spec.input_b}) {
        s->channels = detail::read_value<std::int32_t>(in);
        s->rows = detail::read_value<std::int32_t>(in);
        s->cols = detail::read_value<std::int32_t>(in);
    }
    spec.init_seed = detail::read_value<std::uint64_t>(in);
    spec.adam.learning_rate = detail::read_value<double>(in);
    spec.adam.beta1 = detail::read_value<double>(in);
    spec.adam.beta2 = detail::read_value<double>(in);
    spec.adam.epsilon = detail::read_value<double>(in);
    spec.batch_size = detail::read_value<std::int32_t>(in);
    spec.epochs = detail::read_value<std::int32_t>(in);

    Model model(spec);
    const auto param_count = detail::read_value<std::uint32_t>(in);
    if (param_count != model.parameters().size())
        throw std::runtime_error("nn: checkpoint parameter table mismatch: " + path);
    for (Parameter* p : model.parameters()) {
        const auto size = detail::read_value<std::uint64_t>(in);
        if (size != p->value.size())
            throw std::runtime_error("nn: checkpoint parameter shape mismatch: " + path);
        detail::read_bytes(in, p->value.data(), p->value.size() * sizeof(double));
    }
    return model;
}

/// Metrics CSV: one row per epoch.
inline void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("nn: cannot open metrics file: " + path);
    out << "epoch,loss,train_acc,val_acc\n";
    char line[128];
    for (const EpochMetrics& m : history) {
        std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", m.epoch, m.loss,
                      m.train_accuracy, m.val_accuracy);
        out << line;
    }
}

} // namespace wpos::nn

#endif // WPOS_NN_IO_HPP
