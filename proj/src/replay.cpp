#include "mardpg/replay.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mardpg {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    }
}

void ReplayBuffer::store(Episode episode) {
    if (episode.steps.empty()) {
        throw std::invalid_argument("ReplayBuffer::store: empty episode");
    }
    episodes_.push_back(std::move(episode));
    while (episodes_.size() > capacity_) episodes_.pop_front();
}

std::vector<const Episode*> ReplayBuffer::sample(std::size_t k, std::mt19937_64& rng) const {
    if (episodes_.empty()) {
        throw std::runtime_error("ReplayBuffer::sample: buffer is empty");
    }
    std::vector<const Episode*> out;
    out.reserve(k);
    if (k <= episodes_.size()) {
        std::vector<std::size_t> indices(episodes_.size());
        std::iota(indices.begin(), indices.end(), 0);
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, indices.size() - 1);
            std::swap(indices[i], indices[pick(rng)]);
            out.push_back(&episodes_[indices[i]]);
        }
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, episodes_.size() - 1);
        for (std::size_t i = 0; i < k; ++i) out.push_back(&episodes_[pick(rng)]);
    }
    return out;
}

}  // namespace mardpg
