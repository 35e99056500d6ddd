#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "pftl/model.hpp"

namespace pftl {

/// Set of states of an explicit model, stored as a bitset.
class SatSet {
public:
    SatSet() = default;
    explicit SatSet(std::size_t n, bool value = false) : bits_(n, value) {}

    static SatSet fromLabels(const std::vector<LabelSet>& labels, std::string_view atom) {
        SatSet out(labels.size());
        for (std::size_t s = 0; s < labels.size(); ++s) out.bits_[s] = hasLabel(labels[s], atom);
        return out;
    }

    template <typename Pred>
    static SatSet fromPredicate(std::size_t n, Pred&& pred) {
        SatSet out(n);
        for (std::size_t s = 0; s < n; ++s) out.bits_[s] = static_cast<bool>(pred(s));
        return out;
    }

    std::size_t size() const noexcept { return bits_.size(); }
    bool contains(std::size_t s) const { return bits_[s]; }
    bool contains(StateId s) const { return bits_[s.index]; }
    void insert(std::size_t s) { bits_[s] = true; }
    void erase(std::size_t s) { bits_[s] = false; }

    std::size_t count() const {
        std::size_t c = 0;
        for (bool b : bits_) c += b ? 1 : 0;
        return c;
    }
    bool empty() const { return count() == 0; }

    SatSet complement() const {
        SatSet out(*this);
        out.bits_.flip();
        return out;
    }

    friend SatSet operator&(const SatSet& a, const SatSet& b) {
        SatSet out(a.size());
        for (std::size_t s = 0; s < a.size(); ++s) out.bits_[s] = a.bits_[s] && b.bits_[s];
        return out;
    }

    friend SatSet operator|(const SatSet& a, const SatSet& b) {
        SatSet out(a.size());
        for (std::size_t s = 0; s < a.size(); ++s) out.bits_[s] = a.bits_[s] || b.bits_[s];
        return out;
    }

    std::vector<StateId> states() const {
        std::vector<StateId> out;
        for (std::size_t s = 0; s < bits_.size(); ++s) {
            if (bits_[s]) out.emplace_back(s);
        }
        return out;
    }

    const std::vector<bool>& bits() const noexcept { return bits_; }

    friend bool operator==(const SatSet&, const SatSet&) = default;

private:
    std::vector<bool> bits_;
};

}  // namespace pftl
