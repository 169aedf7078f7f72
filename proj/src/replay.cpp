#include "yieldsim/replay.hpp"

#include <string>

#include "yieldsim/errors.hpp"

namespace yieldsim {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw config_error("replay: capacity must be >= 1");
    storage_.reserve(capacity < 4096 ? capacity : 4096);
}

void ReplayBuffer::push(JointTransition t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
        return;
    }
    storage_[head_] = std::move(t);  // overwrite the oldest entry
    head_ = (head_ + 1) % capacity_;
}

std::vector<const JointTransition*> ReplayBuffer::sample(std::mt19937_64& rng, int batch) const {
    if (batch < 1) throw config_error("replay: batch must be >= 1");
    if (!ready(batch))
        throw state_error("replay: " + std::to_string(storage_.size()) +
                          " transitions stored, batch of " + std::to_string(batch) + " requested");
    std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
    std::vector<const JointTransition*> out;
    out.reserve(static_cast<std::size_t>(batch));
    for (int k = 0; k < batch; ++k) out.push_back(&storage_[pick(rng)]);
    return out;
}

}  // namespace yieldsim
