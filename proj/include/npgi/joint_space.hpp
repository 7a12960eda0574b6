#pragma once

#include <cassert>
#include <span>
#include <vector>

namespace npgi {

/// Mixed-radix indexing of a Cartesian product of per-agent index sets.
/// Agent 0 is the most significant digit, so flat indices are portable
/// between problem and policy files.
class JointSpace {
public:
    JointSpace() = default;

    explicit JointSpace(std::vector<int> radices) : radices_(std::move(radices)) {
        strides_.assign(radices_.size(), 1);
        size_ = 1;
        for (int i = static_cast<int>(radices_.size()) - 1; i >= 0; --i) {
            strides_[i] = size_;
            size_ *= radices_[i];
        }
    }

    int agents() const noexcept { return static_cast<int>(radices_.size()); }
    int size() const noexcept { return size_; }
    int radix(int agent) const { return radices_[agent]; }
    int stride(int agent) const { return strides_[agent]; }
    const std::vector<int>& radices() const noexcept { return radices_; }

    int encode(std::span<const int> locals) const {
        assert(locals.size() == radices_.size());
        int flat = 0;
        for (std::size_t i = 0; i < locals.size(); ++i) flat += locals[i] * strides_[i];
        return flat;
    }

    std::vector<int> decode(int flat) const {
        std::vector<int> locals(radices_.size());
        for (std::size_t i = 0; i < radices_.size(); ++i) locals[i] = component(flat, static_cast<int>(i));
        return locals;
    }

    /// Local index of one agent inside a flat index.
    int component(int flat, int agent) const { return (flat / strides_[agent]) % radices_[agent]; }

    /// Flat index with one agent's component replaced.
    int with_component(int flat, int agent, int local) const {
        return flat + (local - component(flat, agent)) * strides_[agent];
    }

    bool operator==(const JointSpace& other) const { return radices_ == other.radices_; }

private:
    std::vector<int> radices_;
    std::vector<int> strides_;
    int size_ = 1;
};

}  // namespace npgi
