#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace yieldsim {

// One environment step for all agents together. The reward is the common
// scalar every agent receives (already rescaled by the trainer).
struct JointTransition {
    std::vector<std::vector<double>> obs;       // [agent][feature]
    std::vector<double> actions;                // [agent]
    double reward = 0.0;
    std::vector<std::vector<double>> next_obs;  // [agent][feature]
    bool done = false;
    int episode = 0;
    int step = 0;
    double episode_return = 0.0;  // filled in once the episode completes
};

// Fixed-capacity FIFO store with uniform mini-batch sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(JointTransition t);
    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool ready(int batch) const { return size() >= static_cast<std::size_t>(batch); }
    const JointTransition& at(std::size_t i) const { return storage_[i]; }

    // Uniform with replacement; throws state_error when size() < batch.
    std::vector<const JointTransition*> sample(std::mt19937_64& rng, int batch) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // next slot to overwrite once full
    std::vector<JointTransition> storage_;
};

}  // namespace yieldsim
