#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lunarlab/random.hpp"
#include "lunarlab/rlcore.hpp"

namespace lunarlab {

/// Fixed-capacity ring of transitions; the oldest entry is overwritten
/// once the buffer is full.
class ReplayBuffer {
public:
    static constexpr std::size_t kDefaultCapacity = 10'000;

    explicit ReplayBuffer(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
        storage_.reserve(capacity);
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return storage_.size(); }
    bool empty() const { return storage_.empty(); }

    void push(const Transition& tr) {
        if (storage_.size() < capacity_) {
            storage_.push_back(tr);
        } else {
            storage_[cursor_] = tr;
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    /// n uniform draws with replacement.
    std::vector<Transition> sample(std::size_t n, Rng& rng) const {
        if (storage_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
        std::vector<Transition> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(storage_[uniform_index(rng, storage_.size())]);
        return out;
    }

    /// Contents from oldest to newest.
    std::vector<Transition> contents() const {
        if (storage_.size() < capacity_) return storage_;
        std::vector<Transition> out;
        out.reserve(capacity_);
        for (std::size_t i = 0; i < capacity_; ++i) out.push_back(storage_[(cursor_ + i) % capacity_]);
        return out;
    }

    void clear() {
        storage_.clear();
        cursor_ = 0;
    }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

}  // namespace lunarlab
