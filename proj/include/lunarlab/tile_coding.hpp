#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lunarlab/env.hpp"

namespace lunarlab {

/// Resolution vector over the eight state components. The two contact
/// flags carry 0: they are indexed by their raw boolean value.
using Resolution = std::array<double, kStateDim>;

inline constexpr Resolution kDefaultResolution{0.5, 0.5, 0.5, 0.5, 0.2, 0.2, 0.0, 0.0};

struct TileCodingConfig {
    int layers = 1;
    Resolution resolution = kDefaultResolution;
    std::vector<double> weights;   ///< empty means uniform 1/layers
    double velocity_clamp = 10.0;  ///< |v_x|, |v_y|, |v_theta| clamped before encoding

    std::vector<double> resolved_weights() const {
        if (!weights.empty()) return weights;
        return std::vector<double>(static_cast<std::size_t>(std::max(layers, 0)), 1.0 / layers);
    }

    void validate() const {
        if (layers < 1) throw std::invalid_argument("tiles must be >= 1");
        for (std::size_t j = 0; j < 6; ++j)
            if (!(resolution[j] > 0.0) || !std::isfinite(resolution[j]))
                throw std::invalid_argument("resolution component " + std::to_string(j) + " must be > 0");
        if (resolution[6] != 0.0 || resolution[7] != 0.0)
            throw std::invalid_argument("resolution of the two leg-contact components must be 0");
        if (!weights.empty()) {
            if (weights.size() != static_cast<std::size_t>(layers))
                throw std::invalid_argument("tile weights: expected one weight per layer");
            double sum = 0.0;
            for (double w : weights) {
                if (!(w >= 0.0)) throw std::invalid_argument("tile weights must be non-negative");
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("tile weights must sum to 1");
        }
        if (!(velocity_clamp > 0.0)) throw std::invalid_argument("velocity_clamp must be > 0");
    }

    friend bool operator==(const TileCodingConfig&, const TileCodingConfig&) = default;
};

using CellIndex = std::array<std::int64_t, kStateDim>;

struct TileKey {
    CellIndex cell{};
    Action action = Action::idle;

    friend bool operator==(const TileKey&, const TileKey&) = default;
    friend auto operator<=>(const TileKey& a, const TileKey& b) {
        if (auto c = a.cell <=> b.cell; c != 0) return c;
        return code(a.action) <=> code(b.action);
    }
};

struct TileKeyHash {
    std::size_t operator()(const TileKey& k) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto v : k.cell) h = (h ^ splitmix64(static_cast<std::uint64_t>(v))) * 0x100000001b3ULL;
        h = (h ^ static_cast<std::uint64_t>(code(k.action))) * 0x100000001b3ULL;
        return static_cast<std::size_t>(h);
    }
};

/// Sparse store for one layer; absent cells read as zero.
using TileGrid = std::unordered_map<TileKey, double, TileKeyHash>;

/// k offset grids over the state, each addressed by (cell, action). The
/// value of (x, u) is the weighted sum over layers; updates add w_i * delta
/// to each layer's addressed cell.
class TileCoder {
public:
    explicit TileCoder(TileCodingConfig config = {})
        : config_(std::move(config)) {
        config_.validate();
        weights_ = config_.resolved_weights();
        grids_.resize(weights_.size());
    }

    const TileCodingConfig& config() const { return config_; }
    int layers() const { return config_.layers; }
    const std::vector<double>& weights() const { return weights_; }

    /// Cell of x in layer `layer` (1-based). Real components:
    /// round((x_j - (layer-1) * r_j / k) / r_j), ties away from zero.
    CellIndex encode(const LanderState& x, int layer) const {
        if (layer < 1 || layer > config_.layers)
            throw std::out_of_range("layer " + std::to_string(layer) + " outside [1, " +
                                    std::to_string(config_.layers) + "]");
        auto f = x.features();
        for (std::size_t j : {2u, 3u, 5u}) f[j] = std::clamp(f[j], -config_.velocity_clamp, config_.velocity_clamp);
        CellIndex idx{};
        const double shift = static_cast<double>(layer - 1) / config_.layers;
        for (std::size_t j = 0; j < 6; ++j) {
            const double r = config_.resolution[j];
            const double c = f[j] - shift * r;
            idx[j] = static_cast<std::int64_t>(std::round(c / r));
        }
        idx[6] = x.lg1 ? 1 : 0;
        idx[7] = x.lg2 ? 1 : 0;
        return idx;
    }

    double get(const LanderState& x, Action u) const {
        double q = 0.0;
        for (int i = 1; i <= config_.layers; ++i) q += weights_[i - 1] * cell(i, encode(x, i), u);
        return q;
    }

    std::array<double, kActionCount> values(const LanderState& x) const {
        std::array<double, kActionCount> q{};
        for (int i = 1; i <= config_.layers; ++i) {
            const CellIndex idx = encode(x, i);
            for (Action u : kAllActions) q[code(u)] += weights_[i - 1] * cell(i, idx, u);
        }
        return q;
    }

    void update(const LanderState& x, Action u, double delta) {
        if (!std::isfinite(delta)) throw std::invalid_argument("update_tile: non-finite delta");
        if (delta == 0.0) return;
        for (int i = 1; i <= config_.layers; ++i) {
            double& v = grids_[i - 1][TileKey{encode(x, i), u}];
            v += weights_[i - 1] * delta;
        }
    }

    double cell(int layer, const CellIndex& idx, Action u) const {
        const auto& g = grids_.at(static_cast<std::size_t>(layer - 1));
        auto it = g.find(TileKey{idx, u});
        return it == g.end() ? 0.0 : it->second;
    }

    void set_cell(int layer, const CellIndex& idx, Action u, double value) {
        grids_.at(static_cast<std::size_t>(layer - 1))[TileKey{idx, u}] = value;
    }

    const TileGrid& grid(int layer) const { return grids_.at(static_cast<std::size_t>(layer - 1)); }

    /// Non-zero cells of one layer in key order (stable for serialization).
    std::vector<std::pair<TileKey, double>> nonzero_cells(int layer) const {
        std::vector<std::pair<TileKey, double>> out;
        for (const auto& [k, v] : grid(layer))
            if (v != 0.0) out.emplace_back(k, v);
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    std::size_t stored_cells() const {
        std::size_t n = 0;
        for (const auto& g : grids_) n += g.size();
        return n;
    }

private:
    TileCodingConfig config_;
    std::vector<double> weights_;
    std::vector<TileGrid> grids_;
};

}  // namespace lunarlab
